"""Classical samplers for matching-based boson-sampling distributions.

Two pipelines: vertex-subset sampling on arbitrary weighted graphs via a
two-copy product construction and an all-matchings Metropolis chain with
rejection to perfect matchings, and occupancy-pattern sampling for
non-negative matrices via a k-copy bipartite gadget and a perfect-matching
chain with hole weights.  Exact brute-force oracles and a verification
harness back every claim at desk scale.
"""

from .bs import BsRequest, choose_k, gadget_bias_report, sample_bs, sample_bs_batch
from .errors import (
    AnnealDiverged,
    DimensionError,
    NoPerfectMatching,
    NotPerfect,
    NotSymmetric,
    RejectionBudgetExceeded,
    RetryBudgetExceeded,
    SizeLimit,
    ZeroNormalizer,
)
from .exact import (
    DistributionTable,
    PartitionProfile,
    enumerate_matchings,
    exact_bs_distribution,
    exact_gadget_distribution,
    exact_gbs_distribution,
    hafnian,
    partition_profile,
    permanent,
    tv_distance,
)
from .gbs import GbsRequest, acceptance_rate_probe, boost_weights, sample_gbs, sample_gbs_batch
from .graphs import (
    BipartiteGadget,
    Graph,
    Matching,
    ProductGraph,
    bs_gadget,
    cartesian_product_k2,
    extract_occupancy,
    project_to_subset,
)
from .matching_chain import ChainConfig, chain_step, required_steps, sample_matching
from .pm_chain import (
    HoleWeights,
    anneal_hole_weights,
    compute_hole_weights_exact,
    pm_chain_step,
    sample_perfect_matching,
)
from .verify import VerificationReport, empirical_distribution, run_all

__version__ = "0.1.0"
