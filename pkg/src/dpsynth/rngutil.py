"""Seeded random streams.

All randomness in this package flows through numpy's PCG64 bit generator,
whose output stream for a given seed is fixed by numpy's stream-compatibility
policy. Child streams are derived from a root seed plus a path of string
labels, hashed with sha256, so independent pipeline stages never share or
reorder draws.
"""
from __future__ import annotations

import hashlib

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    """A PCG64 generator seeded with ``seed``."""
    return np.random.Generator(np.random.PCG64(int(seed)))


def subseed(seed: int, *labels: object) -> int:
    """Derive a stable 64-bit child seed from a root seed and label path."""
    h = hashlib.sha256(str(int(seed)).encode("utf-8"))
    for label in labels:
        h.update(b"/")
        h.update(str(label).encode("utf-8"))
    return int.from_bytes(h.digest()[:8], "big")


def sub_rng(seed: int, *labels: object) -> np.random.Generator:
    """A generator on the child stream named by ``labels``."""
    return make_rng(subseed(seed, *labels))
