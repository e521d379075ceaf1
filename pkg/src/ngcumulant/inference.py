"""Significance tests for non-Gaussianity and bootstrap signal-to-noise."""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt
from typing import Optional

import numpy as np

from .cumulants import (
    KStatistics,
    accumulate,
    falling,
    k_stat,
    k_statistics,
    var_k4,
)
from .errors import DegenerateSampleError, InputError, InsufficientSampleError
from .models import DistModel
from .rng import make_rng


def gaussian_null_sigma(k2, n):
    """Standard deviation of k4 for N Gaussian draws of variance k2."""
    if n < 4:
        raise InsufficientSampleError(n, 4, "the Gaussian-null sigma")
    if not k2 > 0:
        raise DegenerateSampleError(f"Gaussian-null sigma needs k2 > 0, got {k2}")
    return sqrt(24 * n * n * (n + 1) * k2**4 / falling(n, 3))


@dataclass(frozen=True)
class TestResult:
    __test__ = False  # not a pytest class

    k4: float
    null_sigma: float
    alt_sigma: Optional[float]
    z_null: float
    threshold: float
    verdict: bool
    n: int

    @property
    def z_alt(self):
        return None if self.alt_sigma is None else abs(self.k4) / self.alt_sigma

    def to_dict(self):
        return {
            "k4": self.k4,
            "sigma_null": self.null_sigma,
            "sigma_alt": self.alt_sigma,
            "z": self.z_null,
            "z_alt": self.z_alt,
            "verdict": self.verdict,
            "verdict_basis": "gaussian-null sigma",
            "threshold_sigma": self.threshold,
            "n": self.n,
        }


def detect_non_gaussian(sample, alt_model: Optional[DistModel] = None, threshold=3.0) -> TestResult:
    """Test a sample for non-Gaussianity through its k4.

    The verdict compares |k4| with the k4 spread expected for Gaussian data of
    the same k2.  If ``alt_model`` is given, the k4 spread under that model is
    reported as well (``alt_sigma``); it does not enter the verdict.
    """
    ps = accumulate(sample)
    if ps.n < 5:
        raise InsufficientSampleError(ps.n, 5, "a non-Gaussianity test")
    k2 = k_stat(ps, 2)
    if not k2 > 0:
        raise DegenerateSampleError("sample has zero spread")
    k4 = k_stat(ps, 4)
    null_sigma = gaussian_null_sigma(k2, ps.n)
    alt_sigma = None
    if alt_model is not None:
        v = var_k4(alt_model.cumulants(), ps.n)
        alt_sigma = sqrt(v) if v > 0 else None
    z = abs(k4) / null_sigma
    return TestResult(k4, null_sigma, alt_sigma, z, float(threshold), bool(z >= threshold), ps.n)


def theoretical_snr(model: DistModel, n):
    """S = kappa_4^2 / var(k4) for N draws from ``model``."""
    c = model.cumulants()
    if c[4] == 0:
        return 0.0 if np.ndim(n) == 0 else np.zeros(np.shape(n))
    return c[4] ** 2 / var_k4(c, n)


def monte_carlo_kstats(model: DistModel, n, reps, seed=None, block=None) -> KStatistics:
    """k1..k4 of ``reps`` independent samples of size ``n`` drawn from ``model``."""
    rng = make_rng(seed)
    block = block or max(1, (1 << 21) // n)
    parts = []
    for lo in range(0, reps, block):
        rows = min(block, reps - lo)
        parts.append(k_statistics(model.draw((rows, n), rng)))
    return KStatistics(*(np.concatenate(col) for col in zip(*parts)))


@dataclass(frozen=True)
class BootstrapResult:
    realizations: int
    subsample_size: int
    k4_values: np.ndarray
    s_n: float
    method: str = "independent"

    @property
    def mean(self):
        return float(self.k4_values.mean())

    @property
    def variance(self):
        return float(self.k4_values.var(ddof=1))


def bootstrap_snr(dataset, r=33, n_sub=20, seed=None, disjoint=False) -> BootstrapResult:
    """Empirical S_N = <k4>^2 / var(k4) over ``r`` subsamples of size ``n_sub``.

    Each realization draws ``n_sub`` distinct points; realizations are drawn
    independently, so a point can appear in several of them.  With
    ``disjoint=True`` the realizations are instead disjoint blocks of one
    random permutation, which needs ``r * n_sub`` points.
    """
    x = np.asarray(dataset, dtype=float).ravel()
    if r < 2:
        raise InputError("need at least 2 realizations")
    if n_sub < 5:
        raise InputError("subsample size must be >= 5")
    if n_sub > x.size:
        raise InputError(f"subsample size {n_sub} exceeds dataset size {x.size}")
    rng = make_rng(seed)
    if disjoint:
        if r * n_sub > x.size:
            raise InputError(f"{r} disjoint blocks of {n_sub} need {r * n_sub} points, have {x.size}")
        idx = rng.permutation(x.size)[: r * n_sub].reshape(r, n_sub)
    else:
        idx = np.stack([rng.choice(x.size, n_sub, replace=False) for _ in range(r)])
    k4 = k_statistics(x[idx]).k4
    var = k4.var(ddof=1)
    if not var > 0:
        raise DegenerateSampleError("all realizations gave the same k4; S_N is undefined")
    return BootstrapResult(r, n_sub, k4, float(k4.mean() ** 2 / var), "disjoint" if disjoint else "independent")
