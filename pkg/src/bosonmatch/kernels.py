"""Compiled inner loops for the two Markov chains.

These kernels are the performance path behind the batch samplers; the
single-step reference implementations live in `matching_chain` and
`pm_chain` and are cross-checked against these empirically and by the
transition-matrix tests.

Random numbers come from an xorshift64* stream seeded per draw with a
splitmix-style mix of (base seed XOR draw index), so batches are
deterministic and independent of thread count.  One uniform drives both
the lazy coin and the edge pick: u < 1/2 holds, otherwise 2(u - 1/2) is
again uniform and selects the edge.
"""

from __future__ import annotations

import warnings

import numpy as np

try:
    with warnings.catch_warnings():
        # The TBB layer probe warns on older TBB builds; any layer works here.
        warnings.simplefilter("ignore")
        from numba import njit, prange
    HAVE_NUMBA = True
except ModuleNotFoundError:  # pragma: no cover - slow fallback
    HAVE_NUMBA = False
    prange = range

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        def wrap(fn):
            return fn
        return wrap

__all__ = [
    "HAVE_NUMBA",
    "as_seed",
    "matching_run",
    "gbs_batch",
    "pm_run",
    "bs_batch",
    "pm_visit_counts",
]

U64 = np.uint64
_INV53 = 1.0 / 9007199254740992.0  # 2^-53


def as_seed(x: int) -> np.uint64:
    """Coerce any Python int to the uint64 the kernels expect."""
    return np.uint64(x & ((1 << 64) - 1))


@njit(cache=True, inline="always")
def _mix64(z):
    z = z + U64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> U64(30))) * U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> U64(27))) * U64(0x94D049BB133111EB)
    return z ^ (z >> U64(31))


@njit(cache=True, inline="always")
def _seed_state(seed, index):
    # Mix the base seed before folding in the index: sequential seeds with
    # small indices must not collide (seed ^ 1 == seed + 1 for even seeds).
    s = _mix64(_mix64(U64(seed)) ^ U64(index))
    if s == U64(0):
        s = U64(0x9E3779B97F4A7C15)
    return s


@njit(cache=True, inline="always")
def _matching_steps(eu, ev, w, partner_edge, size, steps, state):
    """Lazy add/remove/slide walk over matchings; returns (size, rng state)."""
    n_e = eu.shape[0]
    for _ in range(steps):
        state ^= state >> U64(12)
        state ^= state << U64(25)
        state ^= state >> U64(27)
        u01 = float((state * U64(0x2545F4914F6CDD1D)) >> U64(11)) * _INV53
        if u01 < 0.5:
            continue
        e = int((u01 - 0.5) * 2.0 * n_e)
        a = eu[e]
        b = ev[e]
        ea = partner_edge[a]
        eb = partner_edge[b]
        if ea == e:
            ratio = 1.0 / w[e]
        elif ea == -1 and eb == -1:
            ratio = w[e]
        elif ea == -1:
            ratio = w[e] / w[eb]
        elif eb == -1:
            ratio = w[e] / w[ea]
        else:
            continue
        if ratio < 1.0:
            state ^= state >> U64(12)
            state ^= state << U64(25)
            state ^= state >> U64(27)
            u2 = float((state * U64(0x2545F4914F6CDD1D)) >> U64(11)) * _INV53
            if u2 >= ratio:
                continue
        if ea == e:
            partner_edge[a] = -1
            partner_edge[b] = -1
            size -= 1
        elif ea == -1 and eb == -1:
            partner_edge[a] = e
            partner_edge[b] = e
            size += 1
        elif ea == -1:
            partner_edge[eu[eb]] = -1
            partner_edge[ev[eb]] = -1
            partner_edge[a] = e
            partner_edge[b] = e
        else:
            partner_edge[eu[ea]] = -1
            partner_edge[ev[ea]] = -1
            partner_edge[a] = e
            partner_edge[b] = e
    return size, state


@njit(cache=True)
def matching_run(eu, ev, w, n_v, steps, seed):
    """One chain run from the empty matching; returns the partner-edge array."""
    partner_edge = np.full(n_v, -1, np.int64)
    state = _seed_state(seed, 0)
    _matching_steps(eu, ev, w, partner_edge, 0, steps, state)
    return partner_edge


@njit(cache=True, parallel=True)
def gbs_batch(eu, ev, w, n_v, copy1_mask, steps, budget, n_draws, seed):
    """Independent chain draws with rejection to perfect matchings.

    Each draw reruns the chain from empty until the terminal matching is
    perfect (at most ``budget`` runs) and records the original vertices
    covered by first-copy edges as a bitmask.
    """
    out = np.zeros(n_draws, np.uint64)
    rejects = np.zeros(n_draws, np.int32)
    ok = np.zeros(n_draws, np.uint8)
    half = n_v // 2
    for d in prange(n_draws):
        state = _seed_state(seed, d + 1)
        partner_edge = np.full(n_v, -1, np.int64)
        for attempt in range(budget):
            partner_edge[:] = -1
            size, state = _matching_steps(eu, ev, w, partner_edge, 0, steps, state)
            if 2 * size == n_v:
                mask = U64(0)
                for u in range(half):
                    e = partner_edge[u]
                    if e != -1 and copy1_mask[e] == 1:
                        mask |= U64(1) << U64(u)
                out[d] = mask
                rejects[d] = attempt
                ok[d] = 1
                break
    return out, rejects, ok


@njit(cache=True, inline="always")
def _pm_steps(eu, ev, w, hw, partner_edge, hole_l, hole_r, steps, state):
    """Lazy walk over perfect and near-perfect bipartite matchings.

    ``eu``/``ev`` hold the left/right endpoint of each edge; ``hw`` is a
    dense (n_v, n_v) table of hole weights.  Near-perfect states carry the
    extra factor hw[hole_l, hole_r] in the target weight.
    """
    n_e = eu.shape[0]
    for _ in range(steps):
        state ^= state >> U64(12)
        state ^= state << U64(25)
        state ^= state >> U64(27)
        u01 = float((state * U64(0x2545F4914F6CDD1D)) >> U64(11)) * _INV53
        if u01 < 0.5:
            continue
        e = int((u01 - 0.5) * 2.0 * n_e)
        u = eu[e]
        v = ev[e]
        if hole_l == -1:
            # Perfect state: only removals are proposable.
            if partner_edge[u] != e:
                continue
            ratio = hw[u, v] / w[e]
            if ratio < 1.0:
                state ^= state >> U64(12)
                state ^= state << U64(25)
                state ^= state >> U64(27)
                u2 = float((state * U64(0x2545F4914F6CDD1D)) >> U64(11)) * _INV53
                if u2 >= ratio:
                    continue
            partner_edge[u] = -1
            partner_edge[v] = -1
            hole_l = u
            hole_r = v
        elif u == hole_l and v == hole_r:
            ratio = w[e] / hw[hole_l, hole_r]
            if ratio < 1.0:
                state ^= state >> U64(12)
                state ^= state << U64(25)
                state ^= state >> U64(27)
                u2 = float((state * U64(0x2545F4914F6CDD1D)) >> U64(11)) * _INV53
                if u2 >= ratio:
                    continue
            partner_edge[u] = e
            partner_edge[v] = e
            hole_l = -1
            hole_r = -1
        elif u == hole_l:
            # Slide: v is matched; its left endpoint inherits the hole.
            pe = partner_edge[v]
            x = eu[pe]
            ratio = w[e] * hw[x, hole_r] / (w[pe] * hw[hole_l, hole_r])
            if ratio < 1.0:
                state ^= state >> U64(12)
                state ^= state << U64(25)
                state ^= state >> U64(27)
                u2 = float((state * U64(0x2545F4914F6CDD1D)) >> U64(11)) * _INV53
                if u2 >= ratio:
                    continue
            partner_edge[x] = -1
            partner_edge[u] = e
            partner_edge[v] = e
            hole_l = x
        elif v == hole_r:
            pe = partner_edge[u]
            y = ev[pe]
            ratio = w[e] * hw[hole_l, y] / (w[pe] * hw[hole_l, hole_r])
            if ratio < 1.0:
                state ^= state >> U64(12)
                state ^= state << U64(25)
                state ^= state >> U64(27)
                u2 = float((state * U64(0x2545F4914F6CDD1D)) >> U64(11)) * _INV53
                if u2 >= ratio:
                    continue
            partner_edge[y] = -1
            partner_edge[u] = e
            partner_edge[v] = e
            hole_r = y
        # else: both endpoints matched away from the holes -> hold
    return hole_l, hole_r, state


@njit(cache=True)
def pm_run(eu, ev, w, hw, partner_edge, hole_l, hole_r, steps, seed):
    """Advance a perfect-matching chain in place; returns the new holes."""
    state = _seed_state(seed, 0)
    hole_l, hole_r, _ = _pm_steps(eu, ev, w, hw, partner_edge, hole_l, hole_r, steps, state)
    return hole_l, hole_r


@njit(cache=True, parallel=True)
def bs_batch(eu, ev, w, hw, partner0, n_cols, group_of, n_groups, steps_burn, steps_retry, budget, n_draws, seed):
    """Independent occupancy draws from the gadget's perfect-matching chain.

    Each draw starts from the supplied perfect matching, runs a burn-in
    period, then keeps extending by retry periods (up to ``budget``
    periods in total) until the state is perfect again; the matched
    first-copy row counts are the outcome.
    """
    n_v = partner0.shape[0]
    z = np.zeros((n_draws, n_groups), np.int32)
    attempts = np.zeros(n_draws, np.int32)
    ok = np.zeros(n_draws, np.uint8)
    for d in prange(n_draws):
        state = _seed_state(seed, d + 1)
        partner_edge = partner0.copy()
        hole_l = np.int64(-1)
        hole_r = np.int64(-1)
        for attempt in range(budget):
            period = steps_burn if attempt == 0 else steps_retry
            hole_l, hole_r, state = _pm_steps(
                eu, ev, w, hw, partner_edge, hole_l, hole_r, period, state
            )
            if hole_l == -1:
                for vv in range(n_v):
                    grp = group_of[vv]
                    if grp >= 0:
                        e = partner_edge[vv]
                        if e != -1 and eu[e] < n_cols:
                            z[d, grp] += 1
                attempts[d] = attempt
                ok[d] = 1
                break
    return z, attempts, ok


@njit(cache=True)
def pm_visit_counts(eu, ev, w, hw, partner_edge, hole_l, hole_r, steps, seed):
    """Run the chain counting time spent per hole class and in perfect states.

    Used by the annealing schedule.  Returns (counts, perfect_count,
    hole_l, hole_r) where counts[u, v] is the number of steps spent with
    holes (u, v); the partner array is advanced in place.
    """
    n_v = partner_edge.shape[0]
    counts = np.zeros((n_v, n_v), np.int64)
    perfect = np.int64(0)
    state = _seed_state(seed, 0)
    for _ in range(steps):
        hole_l, hole_r, state = _pm_steps(eu, ev, w, hw, partner_edge, hole_l, hole_r, 1, state)
        if hole_l == -1:
            perfect += 1
        else:
            counts[hole_l, hole_r] += 1
    return counts, perfect, hole_l, hole_r
