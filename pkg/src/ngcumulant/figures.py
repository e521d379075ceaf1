"""Data behind the reproduction figures, as (columns, rows) tables.

fig1  k4 versus sample size for Fock mixtures with +/- sqrt(var k4) bands
fig3  simulated-experiment k4 versus displacement for several N_R, with residuals
fig4  bootstrap S_N versus readout noise, against theory
fig5  S versus N_R for a fixed probe budget
gap   closed-form mixture var(k4) against the general formula
"""

from __future__ import annotations

from dataclasses import replace
from math import sqrt

import numpy as np

from .budget import Budget, asymptotic_branches, optimize
from .cumulants import accumulate, k_stat, kstats_from_sums, var_k4
from .inference import bootstrap_snr, theoretical_snr
from .models import DisplacedMixture, FockMixture, mixture_closed_form_gap, var_k4_mixture_closed_form
from .qnd import MeasurementConfig, build_ng_dataset, simulate_preparations
from .rng import spawn

FIG1_PS = (0.0, 1 / 3, 1 / 2, 2 / 3)
FIG3_ALPHA_PRIMES = (0.5, 1.0, 1.5, 2.0, 2.5, 3.0)
FIG_NRS = (1, 4, 16, 64)
FIG4_ALPHA_PRIMES = (1.0, 2.0, 3.0)
FIG4_NRS = (1, 2, 4, 8, 16, 32, 64)


def fig1(seed, n_max=1000, realizations=10, ps=FIG1_PS, points=40):
    """k4 trajectories of growing samples from unit-variance Fock mixtures."""
    grid = np.unique(np.geomspace(10, n_max, points).astype(int))
    cols = ["p", "realization", "n", "k4", "kappa4", "band_lo", "band_hi"]
    rows = []
    streams = spawn(seed, len(ps))
    for p, rng in zip(ps, streams):
        model = FockMixture(p=p).unit_variance()
        c = model.cumulants()
        half = np.sqrt(var_k4(c, grid))
        for r in range(realizations):
            x = model.draw(n_max, rng)
            cums = [np.cumsum(x**k)[grid - 1] for k in (1, 2, 3, 4)]
            k4 = kstats_from_sums(grid, *cums)[2]
            for n, v, h in zip(grid, k4, half):
                rows.append([p, r, int(n), float(v), c[4], c[4] - h, c[4] + h])
    return cols, rows


def _ng_point(cfg, alpha, preparations, rng):
    plus = simulate_preparations(cfg, alpha, preparations, rng)
    minus = simulate_preparations(cfg, -alpha, preparations, rng)
    sample = build_ng_dataset(plus, minus, cfg.n_r, rng)
    model = DisplacedMixture(alpha_m=cfg.metapulse_alpha(alpha), sigma_m=sqrt(cfg.metapulse_var))
    return sample, model


def fig3(seed, cfg=None, alpha_primes=FIG3_ALPHA_PRIMES, n_rs=FIG_NRS, preparations=100, repeats=5):
    """k4 of simulated metapulse datasets; alpha' = alpha_M / (N_R sigma_A).

    ``k4_norm`` and friends divide by (N_R sigma_A)^4.
    """
    cfg = cfg or MeasurementConfig()
    sigma_a = sqrt(cfg.sigma_a2)
    cols = [
        "n_r", "alpha_prime", "alpha_spins", "repeat", "k4", "kappa4", "sigma_k4",
        "residual", "k4_norm", "kappa4_norm", "sigma_k4_norm",
    ]
    rows = []
    streams = spawn(seed, len(n_rs))
    for n_r, rng in zip(n_rs, streams):
        c = replace(cfg, n_r=n_r, pulses=max(cfg.pulses, n_r))
        norm = (n_r * sigma_a) ** 4
        for ap in alpha_primes:
            alpha = ap * sigma_a / c.g
            for rep in range(repeats):
                sample, model = _ng_point(c, alpha, preparations, rng)
                k4 = k_stat(accumulate(sample), 4)
                kappa4 = model.cumulants()[4]
                sig = sqrt(var_k4(model.cumulants(), sample.size))
                rows.append([
                    n_r, ap, alpha, rep, k4, kappa4, sig,
                    (kappa4 - k4) / sig, k4 / norm, kappa4 / norm, sig / norm,
                ])
    return cols, rows


def fig4(seed, cfg=None, alpha_primes=FIG4_ALPHA_PRIMES, n_rs=FIG4_NRS, preparations=100,
         realizations=33, subsample=20):
    """Bootstrap S_N of simulated datasets versus relative readout noise.

    ``readout_rel`` is sigma_R^2 / (N_R sigma_A)^2, the readout variance in
    units of the metapulse atomic variance.
    """
    cfg = cfg or MeasurementConfig()
    sigma_a = sqrt(cfg.sigma_a2)
    cols = ["alpha_prime", "n_r", "readout_rel", "s_n", "s_theory"]
    rows = []
    streams = spawn(seed, len(alpha_primes) * len(n_rs))
    it = iter(streams)
    for ap in alpha_primes:
        for n_r in n_rs:
            rng = next(it)
            c = replace(cfg, n_r=n_r, pulses=max(cfg.pulses, n_r))
            alpha = ap * sigma_a / c.g
            sample, model = _ng_point(c, alpha, preparations, rng)
            boot = bootstrap_snr(sample, realizations, subsample, rng)
            rel = c.readout_var / (n_r * sigma_a * c.n_a_rel) ** 2
            rows.append([ap, n_r, rel, boot.s_n, float(theoretical_snr(model, subsample))])
    return cols, rows


def fig5(total_probes=100_000, noise_coefficient=20.0, ps=(0.5, 1.0), sigma0=1.0, n_r_max=1000):
    """S(N_R) for a fixed budget, exact and leading-order, with both asymptotic branches."""
    cols = ["p", "n_r", "n_m", "sigma_r", "s", "s_leading", "s_low", "s_high"]
    rows = []
    for p in ps:
        res = optimize(Budget(total_probes, noise_coefficient, p, sigma0))
        keep = res.n_r <= n_r_max
        for n_r, n_m, sr, s, sl in zip(
            res.n_r[keep], res.n_m[keep], res.sigma_r[keep], res.s[keep], res.s_leading[keep]
        ):
            lo, hi = asymptotic_branches(p, sigma0, sr, n_m)
            rows.append([p, int(n_r), int(n_m), float(sr), float(s), float(sl), lo, hi])
    return cols, rows


def closed_form_gap(alpha_ms=(0.5, 1.0, 2.0), sigma_ms=(0.0, 0.5, 1.0), ns=(20, 100, 1000)):
    """General var(k4) for the displaced mixture against the published closed form."""
    cols = [
        "alpha_m", "sigma_m", "n", "var_general", "var_closed_form", "difference",
        "omitted_terms", "relative_mismatch",
    ]
    rows = []
    for a in alpha_ms:
        for s in sigma_ms:
            for n in ns:
                full = var_k4(DisplacedMixture(alpha_m=a, sigma_m=s).cumulants(), n)
                closed = var_k4_mixture_closed_form(a, s, n)
                gap = mixture_closed_form_gap(a, s, n)
                diff = full - closed
                mismatch = abs(diff - gap) / max(abs(gap), 1e-300) if gap else abs(diff)
                rows.append([a, s, n, full, closed, diff, gap, mismatch])
    return cols, rows


FIGURES = {"fig1": fig1, "fig3": fig3, "fig4": fig4, "fig5": fig5}
