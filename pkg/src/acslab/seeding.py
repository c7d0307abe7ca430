"""Deterministic RNG derivation.

Every stochastic routine in the package takes either an integer seed or a
pre-built Generator. Independent streams (per scenario, per path) are derived
from a master seed plus integer salts, so runs are reproducible regardless of
execution order.
"""

from __future__ import annotations

import numpy as np


def derive_rng(seed, *salts) -> np.random.Generator:
    """Build a Generator from a master seed and integer salts.

    The same (seed, salts) tuple always yields an identical stream.
    """
    entropy = [int(seed)] + [int(s) for s in salts]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def as_rng(seed_or_rng, *salts) -> np.random.Generator:
    """Accept an int seed, a (seed, salt, ...) tuple, or a Generator.

    Salts are applied only when a seed is given; a Generator is passed
    through untouched so callers can share one stream deliberately.
    """
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    if isinstance(seed_or_rng, (tuple, list)):
        return derive_rng(*seed_or_rng, *salts)
    return derive_rng(seed_or_rng, *salts)
