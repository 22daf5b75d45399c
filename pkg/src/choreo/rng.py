"""Seeded random streams, splittable per component.

Every stochastic entry point in the package takes either an explicit
``numpy.random.Generator`` or a seed. A single run seed is split into
independent per-component streams with :func:`split_rng`, so adding or
removing one consumer (e.g. an augmentation) never shifts another
consumer's stream.
"""

from __future__ import annotations

import hashlib

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def split_rng(seed: int, label: str) -> np.random.Generator:
    """Derive a generator from (seed, label), stable across platforms."""
    digest = hashlib.sha256(label.encode("utf-8")).digest()[:8]
    key = int.from_bytes(digest, "little")
    return np.random.default_rng(np.random.SeedSequence([int(seed), key]))


def as_rng(rng_or_seed) -> np.random.Generator:
    """Accept a Generator or an integer seed."""
    if isinstance(rng_or_seed, np.random.Generator):
        return rng_or_seed
    return make_rng(int(rng_or_seed))
