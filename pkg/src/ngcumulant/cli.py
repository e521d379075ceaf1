"""Command-line interface.

Subcommands::

    estimate   k2, k3, k4 of a sample file with plug-in error bars
    test       non-Gaussianity test of a sample file
    bootstrap  bootstrap S_N of a sample file
    simulate   simulate QND preparation records (or a metapulse dataset)
    optimize   probe-budget scan
    reproduce  figure data (fig1, fig3, fig4, fig5)
    audit      closed-form mixture var(k4) against the general formula

Exit codes: 0 success, 2 input error, 3 degenerate statistics.
Every output starts with the run parameters (CSV ``#`` line or JSON ``run``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, figures
from .budget import Budget, optimize
from .cumulants import (
    accumulate,
    estimate_with_error,
    k_stat,
    sample_cumulants,
    var_k2,
)
from .errors import DegenerateSampleError, InputError
from .fileio import atomic_write_text, read_sample
from .inference import bootstrap_snr, detect_non_gaussian
from .models import model_from_json
from .qnd import (
    MeasurementConfig,
    build_ng_dataset,
    records_to_csv,
    records_to_json,
    simulate_baseline,
    simulate_preparations,
)
from .rng import spawn

SEED_ENV = "NGCUMULANT_SEED"
EXIT_INPUT = 2
EXIT_DEGENERATE = 3


def _json_arg(value):
    """Inline JSON or a path to a JSON file."""
    if value is None:
        return None
    text = value.strip()
    if not text.startswith("{"):
        try:
            text = Path(value).read_text()
        except OSError as exc:
            raise InputError(f"cannot read {value}: {exc}") from exc
    return text


def _resolve_seed(args):
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return 0


def _run_spec(args):
    spec = {k: v for k, v in vars(args).items() if k != "func"}
    spec["version"] = __version__
    return spec


def _header_line(spec):
    return f"ngcumulant {__version__} run={json.dumps(spec, sort_keys=True)}"


def _table_csv(spec, cols, rows):
    buf = io.StringIO()
    buf.write(f"# {_header_line(spec)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _json_doc(spec, payload):
    doc = {"ngcumulant": __version__, "run": spec}
    doc.update(payload)
    return json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o)}")


def _emit(args, text):
    out = getattr(args, "out", None)
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        atomic_write_text(out, text)


def _emit_table(args, spec, cols, rows):
    if args.format == "json":
        _emit(args, _json_doc(spec, {"columns": cols, "rows": rows}))
    else:
        _emit(args, _table_csv(spec, cols, rows))


# ---------------------------------------------------------------------------
# Subcommands


def cmd_estimate(args):
    x = read_sample(args.input)
    if x.size < 4:
        raise InputError(f"{args.input}: need at least 4 readings, got {x.size}")
    ps = accumulate(x)
    k2 = k_stat(ps, 2)
    if not k2 > 0:
        raise DegenerateSampleError("sample has zero spread")
    stats = {"k2": k2, "k3": k_stat(ps, 3), "k4": k_stat(ps, 4)}
    sigmas = {"k2": None, "k3": None, "k4": None}
    notes = []
    if x.size >= 8:
        c = sample_cumulants(ps)
        v2 = var_k2(c, ps.n)
        sigmas["k2"] = float(np.sqrt(v2)) if v2 > 0 else None
        for order in (3, 4):
            est = estimate_with_error(ps, order)
            sigmas[f"k{order}"] = est.sigma
            if est.degenerate:
                notes.append(f"plug-in var(k{order}) negative; no error bar")
    else:
        notes.append("fewer than 8 readings; no error bars")
    spec = _run_spec(args)
    if args.format == "json":
        payload = {"n": ps.n, "estimates": {k: {"value": v, "sigma": sigmas[k]} for k, v in stats.items()},
                   "variance_method": "plugin", "notes": notes}
        _emit(args, _json_doc(spec, payload))
    else:
        rows = [[k, v, "" if sigmas[k] is None else sigmas[k], ps.n] for k, v in stats.items()]
        _emit(args, _table_csv(spec, ["statistic", "value", "sigma", "n"], rows))


def cmd_test(args):
    x = read_sample(args.input)
    alt = model_from_json(_json_arg(args.model)) if args.model else None
    res = detect_non_gaussian(x, alt, args.threshold_sigma)
    spec = _run_spec(args)
    if args.format == "csv":
        d = res.to_dict()
        _emit(args, _table_csv(spec, list(d), [["" if v is None else v for v in d.values()]]))
    else:
        _emit(args, _json_doc(spec, res.to_dict()))


def cmd_bootstrap(args):
    x = read_sample(args.input)
    seed = _resolve_seed(args)
    res = bootstrap_snr(x, args.realizations, args.subsample, seed, disjoint=args.disjoint)
    spec = _run_spec(args) | {"seed": seed}
    payload = {
        "realizations": res.realizations,
        "subsample_size": res.subsample_size,
        "method": res.method,
        "mean_k4": res.mean,
        "var_k4": res.variance,
        "s_n": res.s_n,
    }
    if args.format == "csv":
        _emit(args, _table_csv(spec, list(payload), [list(payload.values())]))
    else:
        _emit(args, _json_doc(spec, payload | {"k4_values": res.k4_values}))


def cmd_simulate(args):
    seed = _resolve_seed(args)
    cfg = MeasurementConfig.from_json(_json_arg(args.config)) if args.config else MeasurementConfig()
    if args.nr is not None:
        cfg = MeasurementConfig.from_dict(cfg.to_dict() | {"n_r": args.nr})
    spec = _run_spec(args) | {"seed": seed, "config": cfg.to_dict()}
    s_base, s_plus, s_minus, s_mix = spawn(seed, 4)
    plus = simulate_preparations(cfg, args.alpha, args.count, s_plus)
    minus = simulate_preparations(cfg, -args.alpha, args.count, s_minus)
    if args.metapulses:
        sample = build_ng_dataset(plus, minus, cfg.n_r, s_mix)
        if args.format == "json":
            _emit(args, _json_doc(spec, {"metapulses": sample}))
        else:
            _emit(args, _table_csv(spec, ["M"], [[v] for v in sample]))
        return
    records = []
    if args.baseline:
        records += simulate_baseline(cfg, args.baseline, s_base)
    records += plus + minus
    if args.format == "json":
        _emit(args, records_to_json(records, {"ngcumulant": __version__, "run": spec}))
    else:
        _emit(args, records_to_csv(records, [_header_line(spec)]))


def cmd_optimize(args):
    budget = Budget(int(args.budget), args.noise_coefficient, args.p, args.sigma0)
    res = optimize(budget)
    spec = _run_spec(args)
    if args.format == "json":
        _emit(args, _json_doc(spec, res.summary()))
    else:
        cols = ["n_r", "n_m", "sigma_r", "s", "s_leading"]
        rows = [list(r) for r in zip(res.n_r.tolist(), res.n_m.tolist(), res.sigma_r.tolist(),
                                     res.s.tolist(), res.s_leading.tolist())]
        _emit(args, _table_csv(spec, cols, rows))


_PLOT_SCRIPT = '''"""Plot {fig} data written by `ngcumulant reproduce {fig}`."""
import sys

import matplotlib.pyplot as plt
import pandas as pd

df = pd.read_csv(sys.argv[1] if len(sys.argv) > 1 else "{data}", comment="#")
{body}
plt.show()
'''

_PLOT_BODIES = {
    "fig1": 'for (p, r), g in df.groupby(["p", "realization"]):\n'
            '    plt.semilogx(g.n, g.k4, lw=0.5)\n'
            'for p, g in df[df.realization == 0].groupby("p"):\n'
            '    plt.fill_between(g.n, g.band_lo, g.band_hi, alpha=0.2)\n'
            'plt.xlabel("N"); plt.ylabel("k4")',
    "fig3": 'fig, (a, b) = plt.subplots(2, sharex=True)\n'
            'for n_r, g in df.groupby("n_r"):\n'
            '    a.plot(g.alpha_prime, -g.k4_norm, "o", label=f"N_R={n_r}")\n'
            '    b.plot(g.alpha_prime, g.residual, "o")\n'
            'a.legend(); b.set_xlabel("alpha\'")',
    "fig4": 'for ap, g in df.groupby("alpha_prime"):\n'
            '    plt.loglog(g.readout_rel, g.s_n, "o")\n'
            '    plt.loglog(g.readout_rel, g.s_theory, "-")\n'
            'plt.xlabel("relative readout noise"); plt.ylabel("S")',
    "fig5": 'for p, g in df.groupby("p"):\n'
            '    plt.semilogx(g.n_r, g.s, label=f"p={p}")\n'
            'plt.legend(); plt.xlabel("N_R"); plt.ylabel("S")',
}


def cmd_reproduce(args):
    seed = _resolve_seed(args)
    spec = _run_spec(args) | {"seed": seed}
    fig = args.figure
    if fig == "fig5":
        cols, rows = figures.fig5(int(args.budget), args.noise_coefficient)
    elif fig == "fig4":
        cols, rows = figures.fig4(seed, realizations=args.realizations, subsample=args.subsample)
    else:
        cols, rows = figures.FIGURES[fig](seed)
    _emit_table(args, spec, cols, rows)
    if args.plot_script:
        if args.out in (None, "-"):
            raise InputError("--plot-script needs --out")
        out = Path(args.out)
        script = _PLOT_SCRIPT.format(fig=fig, data=out.name, body=_PLOT_BODIES[fig])
        atomic_write_text(out.with_suffix(".plot.py"), script)


def cmd_audit(args):
    cols, rows = figures.closed_form_gap()
    _emit_table(args, _run_spec(args), cols, rows)


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="ngcumulant", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"ngcumulant {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt="csv", seeded=False):
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default=fmt)
        if seeded:
            sp.add_argument("--seed", type=int, help=f"random seed (default: ${SEED_ENV} or 0)")

    sp = sub.add_parser("estimate", help="k-statistics with plug-in error bars")
    sp.add_argument("input")
    common(sp)
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("test", help="non-Gaussianity test")
    sp.add_argument("input")
    sp.add_argument("--model", help="alternative model JSON (inline or path)")
    sp.add_argument("--threshold-sigma", type=float, default=3.0)
    common(sp, fmt="json")
    sp.set_defaults(func=cmd_test)

    sp = sub.add_parser("bootstrap", help="bootstrap S_N of a sample")
    sp.add_argument("input")
    sp.add_argument("--realizations", type=int, default=33)
    sp.add_argument("--subsample", type=int, default=20)
    sp.add_argument("--disjoint", action="store_true", help="disjoint blocks instead of independent draws")
    common(sp, fmt="json", seeded=True)
    sp.set_defaults(func=cmd_bootstrap)

    sp = sub.add_parser("simulate", help="simulate QND preparation records")
    sp.add_argument("--config", help="MeasurementConfig JSON (inline or path)")
    sp.add_argument("--alpha", type=float, default=1000.0, help="displacement in spins (default 1000)")
    sp.add_argument("--count", type=int, default=100, help="preparations per displacement sign")
    sp.add_argument("--baseline", type=int, default=0, help="baseline records to prepend")
    sp.add_argument("--nr", type=int, help="readings per metapulse (overrides config)")
    sp.add_argument("--metapulses", action="store_true", help="write the mixed metapulse sample instead")
    common(sp, seeded=True)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("optimize", help="probe-budget scan")
    sp.add_argument("--budget", type=float, default=1e5, help="total probe pulses N_M * N_R")
    sp.add_argument("--noise-coefficient", type=float, default=20.0, help="c in sigma_R^2 = c / N_R")
    sp.add_argument("--p", type=float, default=1.0)
    sp.add_argument("--sigma0", type=float, default=1.0)
    common(sp, fmt="json")
    sp.set_defaults(func=cmd_optimize)

    sp = sub.add_parser("reproduce", help="figure data")
    sp.add_argument("figure", choices=sorted(figures.FIGURES))
    sp.add_argument("--budget", type=float, default=1e5)
    sp.add_argument("--noise-coefficient", type=float, default=20.0)
    sp.add_argument("--realizations", type=int, default=33)
    sp.add_argument("--subsample", type=int, default=20)
    sp.add_argument("--plot-script", action="store_true", help="also write a matplotlib sidecar")
    common(sp, seeded=True)
    sp.set_defaults(func=cmd_reproduce)

    sp = sub.add_parser("audit", help="closed-form mixture var(k4) report")
    common(sp)
    sp.set_defaults(func=cmd_audit)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except DegenerateSampleError as exc:
        print(f"ngcumulant: degenerate statistics: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except InputError as exc:
        print(f"ngcumulant: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return 0


if __name__ == "__main__":
    sys.exit(main())
