"""Deterministic derivation of independent random streams from one run seed.

Each consumer of randomness (dataset synthesis, partitioning, model init,
every client's batch stream, ...) gets its own numpy Generator keyed by a
purpose label, so adding or removing one consumer never shifts the draws seen
by the others. The label is hashed with FNV-1a (Python's builtin ``hash`` is
salted per process and would break reproducibility), XOR-ed into the seed,
and finalised with the SplitMix64 mixer.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def _fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(seed: int, label: str) -> int:
    """Mix a run seed with a purpose label into a fresh 64-bit seed."""
    return _splitmix64((seed ^ _fnv1a64(label.encode("utf-8"))) & _MASK64)


def derive_rng(seed: int, label: str) -> np.random.Generator:
    """Seeded Generator for one named consumer of randomness."""
    return np.random.default_rng(derive_seed(seed, label))
