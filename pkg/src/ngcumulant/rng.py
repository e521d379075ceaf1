"""Seeded random streams.

Every stochastic routine takes ``seed``: an int, a ``SeedSequence``, an
existing ``Generator`` (used as is), or None for OS entropy.  Independent
sub-streams come from :func:`spawn`, so parallel work stays reproducible no
matter how it is scheduled.
"""

from __future__ import annotations

import numpy as np


def make_rng(seed=None) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def spawn(seed, count):
    """``count`` independent generators derived from ``seed``."""
    if isinstance(seed, np.random.Generator):
        return seed.spawn(count)
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [np.random.default_rng(child) for child in ss.spawn(count)]
