"""Deterministic random streams.

All randomness in the package flows through counter-based Philox
generators keyed by (seed, path).  Streams for distinct paths are
independent and order-free, so work split across any number of threads
reduces to identical results as long as each chunk derives its stream
from the same path.
"""

import numpy as np

_MASK64 = (1 << 64) - 1


def _mix64(z):
    """splitmix64 finalizer; good avalanche for stream separation."""
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def substream(seed, *path):
    """Generator for the stream identified by (seed, *path).

    path entries must be integers (replicate index, cell id, chunk
    start, ...).  The same (seed, path) always yields the same stream.
    """
    acc = _mix64(int(seed) & _MASK64)
    for part in path:
        acc = _mix64(acc ^ _mix64(int(part) & _MASK64))
    key = ((int(seed) & _MASK64) << 64) | acc
    return np.random.Generator(np.random.Philox(key=key))


def fold(seed, *path):
    """Derived integer seed for the stream identified by (seed, *path).

    Used where an API takes a plain seed (the bootstrap critical-value
    functions) but the caller needs per-replicate independence.
    """
    acc = _mix64(int(seed) & _MASK64)
    for part in path:
        acc = _mix64(acc ^ _mix64(int(part) & _MASK64))
    return int(acc)
