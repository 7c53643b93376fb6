"""Exception types shared across the package."""

__all__ = [
    "AnnealDiverged",
    "DimensionError",
    "NoPerfectMatching",
    "NotPerfect",
    "NotSymmetric",
    "RejectionBudgetExceeded",
    "RetryBudgetExceeded",
    "SizeLimit",
    "ZeroNormalizer",
]


class SizeLimit(ValueError):
    """Input exceeds the configured cap for an exact/brute-force routine."""


class DimensionError(ValueError):
    """Matrix or graph dimensions are incompatible with the construction."""


class NotSymmetric(ValueError):
    """Matrix expected to be symmetric is not (beyond tolerance)."""


class NotPerfect(ValueError):
    """Operation requires a perfect matching but got one with unmatched vertices."""


class ZeroNormalizer(ValueError):
    """Every outcome has weight zero, so the target distribution is undefined."""


class NoPerfectMatching(ValueError):
    """The graph admits no perfect matching."""


class RetryBudgetExceeded(RuntimeError):
    """The perfect-matching chain failed to land in a perfect state within budget."""


class RejectionBudgetExceeded(RuntimeError):
    """The rejection loop exhausted its budget without seeing a perfect matching."""


class AnnealDiverged(RuntimeError):
    """A running hole-weight estimate left its configured safety bounds."""
