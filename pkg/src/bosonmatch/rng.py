"""Seed derivation for reproducible, order-independent replica streams."""

from __future__ import annotations

__all__ = ["mix64", "derive_seed"]

_MASK = (1 << 64) - 1


def mix64(x: int) -> int:
    """Bijective 64-bit mixing function (splitmix-style finalizer)."""
    z = (x + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_seed(seed: int, index: int) -> int:
    """Per-replica stream seed; distinct indices give decorrelated streams.

    The base seed is mixed before the index is folded in, so that
    sequential seeds with small indices cannot produce colliding streams
    (seed ^ 1 equals seed + 1 for every even seed).
    """
    return mix64(mix64(seed & _MASK) ^ (index & _MASK))
