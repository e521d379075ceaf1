"""Analytic distribution models with exact cumulants, densities and samplers.

Three families, each with optional additive Gaussian readout noise of
variance ``readout_var``:

* :class:`Gaussian`
* :class:`DisplacedMixture`: equal mixture of two Gaussians of width
  ``sigma_m`` centred at +/- ``alpha_m``.
* :class:`FockMixture`: the quadrature marginal of
  (1-p)|0><0| + p|1><1|, with vacuum width ``sigma0``.

Readout noise is Gaussian, so it only ever changes kappa_2.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields, replace
from math import pi, sqrt

import numpy as np

from .cumulants import CumulantSet, falling
from .errors import InputError
from .rng import make_rng


@dataclass(frozen=True, kw_only=True)
class DistModel:
    readout_var: float = 0.0

    variant = "base"

    def __post_init__(self):
        if not self.readout_var >= 0:
            raise InputError("readout_var must be >= 0")

    def _signal_cumulants(self) -> np.ndarray:
        raise NotImplementedError

    def cumulants(self) -> CumulantSet:
        kappa = self._signal_cumulants()
        kappa[1] += self.readout_var
        return CumulantSet(kappa, "model-exact")

    def pdf(self, x):
        raise NotImplementedError

    def _draw_signal(self, rng, size):
        raise NotImplementedError

    def draw(self, size, seed=None):
        """i.i.d. draws; ``size`` may be an int or a shape tuple."""
        rng = make_rng(seed)
        x = self._draw_signal(rng, size)
        if self.readout_var > 0:
            x = x + sqrt(self.readout_var) * rng.standard_normal(size)
        return x

    def scaled(self, c):
        """The model of c*X."""
        raise NotImplementedError

    def unit_variance(self):
        """Rescaled so that kappa_2 = 1."""
        return self.scaled(1.0 / sqrt(self.cumulants()[2]))

    def with_readout(self, readout_var):
        return replace(self, readout_var=float(readout_var))

    def params(self):
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "readout_var"}

    def to_dict(self):
        return {"variant": self.variant, "params": self.params(), "readout_var": self.readout_var}

    def to_json(self):
        return json.dumps(self.to_dict())


def _noise_free_only(model):
    if model.readout_var > 0:
        raise InputError(
            f"pdf with readout noise is not available for {model.variant}; "
            "use cumulants or draws instead"
        )


@dataclass(frozen=True, kw_only=True)
class Gaussian(DistModel):
    mean: float = 0.0
    var: float = 1.0

    variant = "gaussian"

    def __post_init__(self):
        super().__post_init__()
        if not self.var >= 0:
            raise InputError("Gaussian variance must be >= 0")

    def _signal_cumulants(self):
        k = np.zeros(8)
        k[0] = self.mean
        k[1] = self.var
        return k

    def pdf(self, x):
        v = self.var + self.readout_var
        x = np.asarray(x, dtype=float)
        return np.exp(-((x - self.mean) ** 2) / (2 * v)) / sqrt(2 * pi * v)

    def _draw_signal(self, rng, size):
        return self.mean + sqrt(self.var) * rng.standard_normal(size)

    def scaled(self, c):
        return Gaussian(readout_var=self.readout_var * c * c, mean=self.mean * c, var=self.var * c * c)


@dataclass(frozen=True, kw_only=True)
class DisplacedMixture(DistModel):
    alpha_m: float = 1.0
    sigma_m: float = 0.0

    variant = "displaced_mixture"

    def __post_init__(self):
        super().__post_init__()
        if not (self.alpha_m >= 0 and self.sigma_m >= 0):
            raise InputError("alpha_m and sigma_m must be >= 0")

    def _signal_cumulants(self):
        a = self.alpha_m
        k = np.zeros(8)
        k[1] = a**2 + self.sigma_m**2
        k[3] = -2 * a**4
        k[5] = 16 * a**6
        k[7] = -272 * a**8
        return k

    def pdf(self, x):
        _noise_free_only(self)
        x = np.asarray(x, dtype=float)
        s = self.sigma_m
        if s == 0:
            raise InputError("displaced mixture with sigma_m = 0 has no density")
        norm = 1.0 / (s * sqrt(2 * pi))
        return 0.5 * norm * (
            np.exp(-((x - self.alpha_m) ** 2) / (2 * s * s))
            + np.exp(-((x + self.alpha_m) ** 2) / (2 * s * s))
        )

    def _draw_signal(self, rng, size):
        sign = np.where(rng.random(size) < 0.5, 1.0, -1.0)
        return sign * self.alpha_m + self.sigma_m * rng.standard_normal(size)

    def scaled(self, c):
        c = abs(c)
        return DisplacedMixture(
            readout_var=self.readout_var * c * c, alpha_m=self.alpha_m * c, sigma_m=self.sigma_m * c
        )


@dataclass(frozen=True, kw_only=True)
class FockMixture(DistModel):
    p: float = 1.0
    sigma0: float = 1.0

    variant = "fock_mixture"

    def __post_init__(self):
        super().__post_init__()
        if not 0 <= self.p <= 1:
            raise InputError("p must lie in [0, 1]")
        if not self.sigma0 > 0:
            raise InputError("sigma0 must be > 0")

    def _signal_cumulants(self):
        p, s = self.p, self.sigma0
        k = np.zeros(8)
        k[1] = (2 * p + 1) * s**2
        k[3] = -12 * p**2 * s**4
        k[5] = 240 * p**3 * s**6
        k[7] = -10080 * p**4 * s**8
        return k

    def pdf(self, x):
        _noise_free_only(self)
        x = np.asarray(x, dtype=float)
        u = x * x / self.sigma0**2
        return np.exp(-u / 2) * (self.p * u + 1 - self.p) / (sqrt(2 * pi) * self.sigma0)

    def _draw_signal(self, rng, size):
        # n=1 component: density ~ x^2 exp(-x^2/2), i.e. a signed chi with 3 dof
        shape = (size,) if np.isscalar(size) else tuple(size)
        vacuum = rng.standard_normal(shape)
        radius = np.sqrt(np.square(rng.standard_normal(shape + (3,))).sum(axis=-1))
        sign = np.where(rng.random(shape) < 0.5, 1.0, -1.0)
        excited = rng.random(shape) < self.p
        return self.sigma0 * np.where(excited, sign * radius, vacuum)

    def scaled(self, c):
        c = abs(c)
        return FockMixture(readout_var=self.readout_var * c * c, p=self.p, sigma0=self.sigma0 * c)


VARIANTS = {cls.variant: cls for cls in (Gaussian, DisplacedMixture, FockMixture)}


def model_from_dict(d) -> DistModel:
    try:
        cls = VARIANTS[d["variant"]]
    except KeyError:
        raise InputError(f"unknown model variant {d.get('variant')!r}; expected one of {sorted(VARIANTS)}")
    params = dict(d.get("params", {}))
    allowed = {f.name for f in fields(cls)} - {"readout_var"}
    unknown = set(params) - allowed
    if unknown:
        raise InputError(f"unknown parameters for {cls.variant}: {sorted(unknown)}")
    return cls(readout_var=float(d.get("readout_var", 0.0)), **{k: float(v) for k, v in params.items()})


def model_from_json(text) -> DistModel:
    try:
        return model_from_dict(json.loads(text))
    except (json.JSONDecodeError, TypeError) as exc:
        raise InputError(f"invalid model JSON: {exc}") from exc


# Module-level spellings of the model methods.


def exact_cumulants(model: DistModel) -> CumulantSet:
    return model.cumulants()


def pdf(model: DistModel, x):
    return model.pdf(x)


def draw(model: DistModel, size, seed=None):
    return model.draw(size, seed)


def var_k4_mixture_closed_form(alpha_m, sigma_m, n):
    """Published closed form for var(k4) of the displaced mixture.

    This is *not* what the general var(k4) expression gives for the mixture
    cumulants: it drops the kappa_8/N and 16 kappa_6 kappa_2 N/N_(1) terms.
    Kept for comparison; use ``var_k4(DisplacedMixture(...).cumulants(), n)``
    for actual error bars.
    """
    if np.any(np.asarray(n) < 4):
        raise InputError("n must be >= 4")
    n = np.asarray(n, dtype=float)
    a4 = alpha_m**4
    k2 = alpha_m**2 + sigma_m**2
    out = (
        136 * n * a4 * a4 / falling(n, 1)
        - 144 * n**2 * a4 * k2**2 / falling(n, 2)
        + 24 * n**2 * (n + 1) * k2**4 / falling(n, 3)
    )
    return out if np.ndim(out) else float(out)


def mixture_closed_form_gap(alpha_m, sigma_m, n):
    """Terms the published closed form omits: kappa_8/N + 16 kappa_6 kappa_2 N/N_(1)."""
    c = DisplacedMixture(alpha_m=alpha_m, sigma_m=sigma_m).cumulants()
    n = float(n)
    return c[8] / n + 16 * c[6] * c[2] * n / falling(n, 1)


def wigner_negative(p) -> bool:
    """Whether the Fock mixture with excitation probability p has a negative Wigner function."""
    if not 0 <= p <= 1:
        raise InputError("p must lie in [0, 1]")
    return p > 0.5
