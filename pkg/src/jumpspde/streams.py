"""Per-path random streams.

Path ``i`` of a run seeded with ``master_seed`` draws from a Philox
generator keyed by ``mix64(master_seed ^ (i + 1) * 0x9E3779B97F4A7C15)``,
so every path's noise is fixed by ``(master_seed, i)`` alone.
"""
import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def mix64(x: int) -> int:
    """SplitMix64 finalizer."""
    x &= MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & MASK64
    x ^= x >> 31
    return x


def stream_key(master_seed: int, path_index: int) -> int:
    if not 0 <= master_seed <= MASK64:
        raise ValueError(f"master seed must be a 64-bit unsigned integer, got {master_seed}")
    if path_index < 0:
        raise ValueError(f"path index must be non-negative, got {path_index}")
    return mix64(master_seed ^ (((path_index + 1) * GOLDEN_GAMMA) & MASK64))


def path_stream(master_seed: int, path_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=stream_key(master_seed, path_index)))
