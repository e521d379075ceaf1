"""Splitting a fixed probe budget between preparations and probes per preparation.

A budget of ``total_probes`` pulses buys N_M = floor(total / N_R) metapulses
of N_R pulses each.  Shot-noise-limited readout gives sigma_R^2 = c / N_R.
Measuring the Fock mixture (1-p)|0><0| + p|1><1| this way, the
signal-to-noise S = kappa_4^2 / var(k4) first rises with N_R (less readout
noise) and then falls (fewer samples).

For large N_M, with q(p) = 1 + 8p - 12p^2 + 48p^3 - 24p^4:

* sigma_R << sigma_0:  S_L = 6 N p^4 / q(p)
* sigma_R >> sigma_0:  S_H = 6 N p^4 sigma_0^8 / sigma_R^8

and the branches cross at sigma_R^8 = sigma_0^8 q(p).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .cumulants import var_k4, var_k4_leading
from .errors import InputError, InsufficientSampleError
from .models import FockMixture

CROSSING_CONDITION = "S_L = S_H"


def optimum_polynomial(p):
    """q(p) = 1 + 8p - 12p^2 + 48p^3 - 24p^4."""
    return 1 + 8 * p - 12 * p**2 + 48 * p**3 - 24 * p**4


@dataclass(frozen=True)
class Budget:
    total_probes: int = 100_000
    noise_coefficient: float = 20.0
    p: float = 1.0
    sigma0: float = 1.0

    def __post_init__(self):
        if int(self.total_probes) != self.total_probes or self.total_probes < 1:
            raise InputError("total_probes must be a positive integer")
        if not self.noise_coefficient > 0:
            raise InputError("noise_coefficient must be > 0")
        FockMixture(p=self.p, sigma0=self.sigma0)  # validates p, sigma0

    def n_m(self, n_r):
        return self.total_probes // np.asarray(n_r)

    def readout_var(self, n_r):
        return self.noise_coefficient / np.asarray(n_r, dtype=float)

    def model_at(self, n_r) -> FockMixture:
        return FockMixture(p=self.p, sigma0=self.sigma0, readout_var=float(self.readout_var(n_r)))


def _fock_kappas(p, sigma0, readout_var):
    s2 = sigma0**2
    return {
        2: (2 * p + 1) * s2 + readout_var,
        3: 0.0,
        4: -12 * p**2 * s2**2,
        5: 0.0,
        6: 240 * p**3 * s2**3,
        8: -10080 * p**4 * s2**4,
    }


def snr_at(budget: Budget, n_r, leading_order=False):
    """S at ``n_r`` probes per metapulse (scalar or array of n_r).

    ``leading_order=True`` uses the 1/N term of var(k4) instead of the exact
    finite-N expression.
    """
    n_r = np.asarray(n_r)
    if np.any(n_r < 1) or np.any(n_r > budget.total_probes):
        raise InputError(f"n_r must lie in 1..{budget.total_probes}")
    n = budget.n_m(n_r)
    if np.any(n < 4):
        raise InsufficientSampleError(int(np.min(n)), 4, "S (metapulses in the budget)")
    kap = _fock_kappas(budget.p, budget.sigma0, budget.readout_var(n_r))
    var = var_k4_leading(kap, n) if leading_order else var_k4(kap, n)
    s = kap[4] ** 2 / var
    return float(s) if np.ndim(s) == 0 else s


def asymptotic_optimum(p, sigma0=1.0, c=20.0):
    """(sigma_R*, N_R*) where the low- and high-noise branches of S cross."""
    if not 0 < p <= 1:
        raise InputError("asymptotic optimum needs 0 < p <= 1 (p = 0 has no non-Gaussian signal)")
    if not (sigma0 > 0 and c > 0):
        raise InputError("sigma0 and c must be > 0")
    sigma_r = sigma0 * optimum_polynomial(p) ** 0.125
    return sigma_r, c / sigma_r**2


def asymptotic_branches(p, sigma0, sigma_r, n):
    """Leading-order S for sigma_R << sigma_0 (S_L) and sigma_R >> sigma_0 (S_H)."""
    s_low = 6 * n * p**4 / optimum_polynomial(p)
    with np.errstate(divide="ignore"):
        s_high = 6 * n * p**4 * sigma0**8 / np.power(float(sigma_r), 8)
    return s_low, float(s_high)


@dataclass(frozen=True)
class BudgetResult:
    budget: Budget
    n_r: np.ndarray
    n_m: np.ndarray
    sigma_r: np.ndarray
    s: np.ndarray
    s_leading: np.ndarray
    optimal_nr: int
    optimal_s: float
    asymptotic_sigma_r: float
    asymptotic_nr: float
    unimodal: bool = field(default=True)

    @property
    def curve(self):
        return list(zip(self.n_r.tolist(), self.s.tolist()))

    def summary(self):
        return {
            "total_probes": self.budget.total_probes,
            "noise_coefficient": self.budget.noise_coefficient,
            "p": self.budget.p,
            "sigma0": self.budget.sigma0,
            "optimal_nr": self.optimal_nr,
            "optimal_nm": int(self.budget.total_probes // self.optimal_nr),
            "optimal_s": self.optimal_s,
            "asymptotic_sigma_r": self.asymptotic_sigma_r,
            "asymptotic_nr": self.asymptotic_nr,
            "crossing_condition": CROSSING_CONDITION,
            "unimodal": self.unimodal,
        }


def _is_unimodal(s, peak, rtol=1e-3):
    rise = np.all(s[1 : peak + 1] >= s[:peak] * (1 - rtol))
    fall = np.all(s[peak + 1 :] <= s[peak:-1] * (1 + rtol))
    return bool(rise and fall)


def optimize(budget: Budget) -> BudgetResult:
    """Exhaustive scan of every N_R leaving at least 4 metapulses."""
    n_r = np.arange(1, budget.total_probes // 4 + 1)
    if n_r.size == 0:
        raise InsufficientSampleError(budget.total_probes, 4, "a budget scan")
    s = snr_at(budget, n_r)
    s_lead = snr_at(budget, n_r, leading_order=True)
    peak = int(np.argmax(s))
    unimodal = _is_unimodal(s, peak) if budget.p > 0 else True
    if not unimodal:
        warnings.warn("S(N_R) is not unimodal over the scanned range", RuntimeWarning, stacklevel=2)
    if budget.p > 0:
        sig_star, nr_star = asymptotic_optimum(budget.p, budget.sigma0, budget.noise_coefficient)
    else:
        sig_star, nr_star = float("nan"), float("nan")
    return BudgetResult(
        budget,
        n_r,
        budget.n_m(n_r),
        np.sqrt(budget.readout_var(n_r)),
        s,
        s_lead,
        int(n_r[peak]),
        float(s[peak]),
        float(sig_star),
        float(nr_star),
        unimodal,
    )
