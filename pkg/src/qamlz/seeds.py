"""Deterministic derivation of child seeds from a master seed.

Every stochastic component of the package (solvers, flips, resampling,
sweep cells) gets its own child seed via :func:`spawn`, so results are
bit-identical across runs and independent of execution order.
"""

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(x: int) -> int:
    """SplitMix64 finalizer: avalanche a 64-bit integer."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * _MIX1) & _MASK64
    x = ((x ^ (x >> 27)) * _MIX2) & _MASK64
    return x ^ (x >> 31)


def spawn(seed: int, *path: int) -> int:
    """Derive a child seed from ``seed`` and a path of integers.

    The same (seed, path) pair always yields the same 64-bit child,
    independent of platform, process, or call order; distinct paths give
    statistically independent streams.
    """
    state = mix64(seed ^ _GOLDEN)
    for part in path:
        state = mix64((state + _GOLDEN) ^ mix64(part))
    return state
