"""Power sums, k-statistics, moment/cumulant conversion and estimator variances.

Everything here works on centred power sums.  Raw sums of uncentred data
cancel catastrophically once the mean is large compared with the spread, so
:func:`accumulate` always subtracts an offset first.  k2, k3 and k4 are exactly
shift invariant, so only k1 needs the offset added back.

Cumulants of order 5 to 8 estimated from data are plug-in values (central
sample moments pushed through the moment recursion).  They carry an O(1/N)
bias and exist to feed the variance formulas, not as estimators in their own
right.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Literal, NamedTuple, Optional

import numpy as np

from .errors import (
    DegenerateSampleError,
    InputError,
    InsufficientSampleError,
    NonFiniteInputError,
)

MAX_ORDER = 8

Provenance = Literal["model-exact", "sample-plugin"]
VarianceMethod = Literal["analytic-model", "plugin", "none"]

# minimum sample size for k_1..k_4 (falling factorial in the denominator)
_KSTAT_MIN_N = {1: 1, 2: 2, 3: 3, 4: 4}


def falling(n, m):
    """N(N-1)...(N-m), i.e. m+1 factors.  Works elementwise on arrays."""
    n = np.asarray(n, dtype=float)
    out = np.ones_like(n)
    for j in range(m + 1):
        out = out * (n - j)
    return out if out.ndim else float(out)


def _check_finite(x):
    bad = np.flatnonzero(~np.isfinite(x))
    if bad.size:
        raise NonFiniteInputError(int(bad[0]), float(x[bad[0]]))


# ---------------------------------------------------------------------------
# Power sums


@dataclass(frozen=True, eq=False)
class PowerSums:
    """Count and power sums S_r = sum (x_i - offset)^r for r = 1..8."""

    n: int = 0
    s: np.ndarray = field(default_factory=lambda: np.zeros(MAX_ORDER))
    offset: float = 0.0

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        if s.shape != (MAX_ORDER,):
            raise InputError(f"power sums must have {MAX_ORDER} entries")
        object.__setattr__(self, "s", s)

    @classmethod
    def empty(cls, offset=0.0):
        return cls(0, np.zeros(MAX_ORDER), float(offset))

    def power(self, r):
        """S_r, with S_0 = n."""
        if r == 0:
            return float(self.n)
        return float(self.s[r - 1])

    def __add__(self, other):
        return merge(self, other)

    def __eq__(self, other):
        if not isinstance(other, PowerSums):
            return NotImplemented
        return (
            self.n == other.n
            and self.offset == other.offset
            and np.array_equal(self.s, other.s)
        )

    def __repr__(self):
        return f"PowerSums(n={self.n}, offset={self.offset!r}, s={self.s.tolist()!r})"


def accumulate(sample, offset=None) -> PowerSums:
    """Accumulate power sums of ``sample`` about ``offset``.

    With ``offset=None`` the sample mean is used (two-pass batch mode), or 0
    for an empty sample.  Pass an explicit offset when the result is going to
    be merged with sums from other chunks.
    """
    x = np.asarray(sample, dtype=float).ravel()
    _check_finite(x)
    if offset is None:
        offset = float(x.mean()) if x.size else 0.0
    d = x - offset
    s = np.empty(MAX_ORDER)
    p = d.copy()
    for r in range(MAX_ORDER):
        s[r] = p.sum()
        p *= d
    return PowerSums(int(x.size), s, float(offset))


def merge(a: PowerSums, b: PowerSums) -> PowerSums:
    if a.offset != b.offset:
        raise InputError(
            f"cannot merge power sums with different offsets ({a.offset} vs {b.offset})"
        )
    return PowerSums(a.n + b.n, a.s + b.s, a.offset)


# ---------------------------------------------------------------------------
# k-statistics


def kstats_from_sums(n, s1, s2, s3, s4):
    """k2, k3, k4 from the count and power sums S_1..S_4 (arrays broadcast)."""
    n = np.asarray(n, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        k2 = (n * s2 - s1**2) / falling(n, 1)
        k3 = (2 * s1**3 - 3 * n * s1 * s2 + n**2 * s3) / falling(n, 2)
        k4 = (
            -6 * s1**4
            + 12 * n * s1**2 * s2
            - 3 * n * (n - 1) * s2**2
            - 4 * n * (n + 1) * s1 * s3
            + n**2 * (n + 1) * s4
        ) / falling(n, 3)
    return k2, k3, k4


def k_stat(ps: PowerSums, order: int) -> float:
    """Fisher's unbiased estimator k_order (order 1..4) from power sums."""
    if order not in _KSTAT_MIN_N:
        raise InputError(f"k-statistics are available for orders 1-4, not {order}")
    need = _KSTAT_MIN_N[order]
    if ps.n < need:
        raise InsufficientSampleError(ps.n, need, f"k{order}")
    n = ps.n
    s1 = ps.power(1)
    if order == 1:
        return s1 / n + ps.offset
    ks = kstats_from_sums(n, s1, ps.power(2), ps.power(3), ps.power(4))
    return float(ks[order - 2])


class KStatistics(NamedTuple):
    k1: np.ndarray
    k2: np.ndarray
    k3: np.ndarray
    k4: np.ndarray


def k_statistics(x, axis=-1, chunk=1 << 21) -> KStatistics:
    """k1..k4 of many samples at once, reducing along ``axis``.

    Each sample is centred on its own mean before the power sums are taken.
    Large 2-D inputs are processed in row blocks of about ``chunk`` elements.
    """
    x = np.moveaxis(np.asarray(x, dtype=float), axis, -1)
    n = x.shape[-1]
    if n < 4:
        raise InsufficientSampleError(n, 4, "k_statistics")
    lead = x.shape[:-1]
    flat = x.reshape(-1, n)
    out = np.empty((4, flat.shape[0]))
    step = max(1, chunk // n)
    for lo in range(0, flat.shape[0], step):
        block = flat[lo : lo + step]
        mean = block.mean(axis=1, keepdims=True)
        d = block - mean
        d2 = d * d
        s1 = d.sum(axis=1)
        s2 = d2.sum(axis=1)
        s3 = (d2 * d).sum(axis=1)
        s4 = (d2 * d2).sum(axis=1)
        k2, k3, k4 = kstats_from_sums(n, s1, s2, s3, s4)
        out[0, lo : lo + step] = mean[:, 0] + s1 / n
        out[1, lo : lo + step] = k2
        out[2, lo : lo + step] = k3
        out[3, lo : lo + step] = k4
    return KStatistics(*(row.reshape(lead) for row in out))


# ---------------------------------------------------------------------------
# Moments and cumulants


def _orders_array(values, name):
    a = np.asarray(values, dtype=float)
    if a.shape != (MAX_ORDER,):
        raise InputError(f"{name} must hold orders 1..{MAX_ORDER}")
    return a


@dataclass(frozen=True, eq=False)
class MomentSet:
    """Moments mu_1..mu_8.  Index with the order: ``m[4]`` is mu_4."""

    mu: np.ndarray
    central: bool = False

    def __post_init__(self):
        object.__setattr__(self, "mu", _orders_array(self.mu, "mu"))

    def __getitem__(self, k):
        if k == 0:
            return 1.0
        return float(self.mu[k - 1])


@dataclass(frozen=True, eq=False)
class CumulantSet:
    """Cumulants kappa_1..kappa_8.  Index with the order: ``c[4]`` is kappa_4.

    Orders that were not estimated are NaN.
    """

    kappa: np.ndarray
    provenance: Provenance = "model-exact"

    def __post_init__(self):
        object.__setattr__(self, "kappa", _orders_array(self.kappa, "kappa"))

    @classmethod
    def from_orders(cls, provenance: Provenance = "model-exact", **orders):
        """``CumulantSet.from_orders(k2=1.0, k4=-2.0)``; missing orders are 0."""
        kappa = np.zeros(MAX_ORDER)
        for key, val in orders.items():
            kappa[int(key.lstrip("k")) - 1] = val
        return cls(kappa, provenance)

    @classmethod
    def zeros(cls):
        return cls(np.zeros(MAX_ORDER))

    def __getitem__(self, n):
        return float(self.kappa[n - 1])

    def __add__(self, other):
        return convolve(self, other)

    def scaled(self, c):
        """Cumulants of c*X."""
        return CumulantSet(self.kappa * c ** np.arange(1, MAX_ORDER + 1), self.provenance)

    def as_dict(self):
        return {f"k{n}": self[n] for n in range(1, MAX_ORDER + 1)}


def convolve(a: CumulantSet, b: CumulantSet) -> CumulantSet:
    """Cumulants of X + Y for independent X, Y: cumulants add."""
    prov = "model-exact" if a.provenance == b.provenance == "model-exact" else "sample-plugin"
    return CumulantSet(a.kappa + b.kappa, prov)


def moments_to_cumulants(m: MomentSet, provenance: Provenance = "model-exact") -> CumulantSet:
    mu = np.concatenate([[1.0], m.mu])
    _check_finite(mu)
    kappa = np.zeros(MAX_ORDER + 1)
    for n in range(1, MAX_ORDER + 1):
        acc = mu[n]
        for k in range(1, n):
            acc -= comb(n - 1, k - 1) * mu[n - k] * kappa[k]
        kappa[n] = acc
    return CumulantSet(kappa[1:], provenance)


def cumulants_to_moments(c: CumulantSet) -> MomentSet:
    """Raw moments from cumulants (the same recursion solved for mu_n)."""
    kappa = np.concatenate([[0.0], c.kappa])
    _check_finite(kappa)
    mu = np.zeros(MAX_ORDER + 1)
    mu[0] = 1.0
    for n in range(1, MAX_ORDER + 1):
        acc = kappa[n]
        for k in range(1, n):
            acc += comb(n - 1, k - 1) * mu[n - k] * kappa[k]
        mu[n] = acc
    return MomentSet(mu[1:], central=bool(kappa[1] == 0.0))


def central_moments(ps: PowerSums, max_order=MAX_ORDER) -> np.ndarray:
    """Biased central sample moments m_1..m_max_order (m_1 = 0)."""
    if ps.n == 0:
        raise InsufficientSampleError(0, 1, "central moments")
    n = ps.n
    raw = np.array([ps.power(r) / n for r in range(max_order + 1)])
    d = raw[1]
    out = np.zeros(max_order)
    for r in range(1, max_order + 1):
        out[r - 1] = sum(comb(r, j) * raw[j] * (-d) ** (r - j) for j in range(r + 1))
    out[0] = 0.0
    return out


def sample_cumulants(ps: PowerSums, max_order: int = MAX_ORDER) -> CumulantSet:
    """k1..k4 (unbiased) plus plug-in estimates of kappa_5..kappa_max_order."""
    if not 1 <= max_order <= MAX_ORDER:
        raise InputError(f"max_order must be in 1..{MAX_ORDER}")
    if ps.n < max_order:
        raise InsufficientSampleError(ps.n, max_order, f"cumulants through order {max_order}")
    kappa = np.full(MAX_ORDER, np.nan)
    for order in range(1, min(max_order, 4) + 1):
        kappa[order - 1] = k_stat(ps, order)
    if max_order > 4:
        m = central_moments(ps)
        plug = moments_to_cumulants(MomentSet(m, central=True)).kappa
        kappa[4:max_order] = plug[4:max_order]
    return CumulantSet(kappa, "sample-plugin")


# ---------------------------------------------------------------------------
# Variances of k3 and k4


def var_k2(c: CumulantSet, n):
    """Exact finite-N variance of k2: kappa_4/N + 2 kappa_2^2/(N-1)."""
    if np.any(np.asarray(n) < 2):
        raise InsufficientSampleError(int(np.min(n)), 2, "var(k2)")
    n = np.asarray(n, dtype=float)
    out = c[4] / n + 2 * c[2] ** 2 / (n - 1)
    return out if np.ndim(out) else float(out)


def var_k3(c: CumulantSet, n):
    """Exact finite-N variance of k3 for a distribution with cumulants ``c``."""
    if np.any(np.asarray(n) < 3):
        raise InsufficientSampleError(int(np.min(n)), 3, "var(k3)")
    n = np.asarray(n, dtype=float)
    k2, k3, k4, k6 = c[2], c[3], c[4], c[6]
    out = (
        k6 / n
        + 9 * n * (k2 * k4 + k3**2) / falling(n, 1)
        + 6 * n**2 * k2**3 / falling(n, 2)
    )
    return out if np.ndim(out) else float(out)


def var_k4(c: CumulantSet, n):
    """Exact finite-N variance of k4 for a distribution with cumulants ``c``.

    ``c`` can be anything indexable by cumulant order, e.g. a dict of arrays
    when evaluating many distributions at once.
    """
    if np.any(np.asarray(n) < 4):
        raise InsufficientSampleError(int(np.min(n)), 4, "var(k4)")
    n = np.asarray(n, dtype=float)
    k2, k3, k4, k5, k6, k8 = c[2], c[3], c[4], c[5], c[6], c[8]
    out = (
        k8 / n
        + 2 * n * (8 * k6 * k2 + 24 * k5 * k3 + 17 * k4**2) / falling(n, 1)
        + 72 * n**2 * (k4 * k2**2 + 2 * k3**2 * k2) / falling(n, 2)
        + 24 * n**2 * (n + 1) * k2**4 / falling(n, 3)
    )
    return out if np.ndim(out) else float(out)


def var_k4_leading(c: CumulantSet, n):
    """Leading 1/N term of var(k4)."""
    k2, k3, k4, k5, k6, k8 = c[2], c[3], c[4], c[5], c[6], c[8]
    num = (
        k8
        + 16 * k6 * k2
        + 48 * k5 * k3
        + 34 * k4**2
        + 72 * k4 * k2**2
        + 144 * k3**2 * k2
        + 24 * k2**4
    )
    return num / np.asarray(n, dtype=float)


# ---------------------------------------------------------------------------
# Estimates with error bars


@dataclass(frozen=True)
class Estimate:
    value: float
    variance: Optional[float]
    n: int
    order: int
    variance_method: VarianceMethod
    degenerate: bool = False

    @property
    def sigma(self):
        return None if self.variance is None else float(np.sqrt(self.variance))


def estimate_with_error(sample, order: int = 4, offset=None) -> Estimate:
    """k3 or k4 with a plug-in variance from the sample's own cumulants.

    ``sample`` may be an array of readings or a :class:`PowerSums`.  A negative
    plug-in variance (possible at small N) is reported as ``variance=None``
    with ``degenerate=True``; the caller should fall back to a Gaussian-null
    variance.
    """
    if order not in (3, 4):
        raise InputError("estimate_with_error supports orders 3 and 4")
    ps = sample if isinstance(sample, PowerSums) else accumulate(sample, offset)
    if ps.n < MAX_ORDER:
        raise InsufficientSampleError(ps.n, MAX_ORDER, "a plug-in error bar")
    c = sample_cumulants(ps)
    if not c[2] > 0:
        raise DegenerateSampleError("sample has zero spread; plug-in variance is degenerate")
    value = c[order]
    var = var_k3(c, ps.n) if order == 3 else var_k4(c, ps.n)
    if var < 0:
        return Estimate(value, None, ps.n, order, "none", degenerate=True)
    return Estimate(value, float(var), ps.n, order, "plugin")
