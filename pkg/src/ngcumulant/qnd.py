"""Simulation of the Faraday-rotation QND readout chain, and record files.

Reading model
-------------
A probe pulse of N_L photons leaves the atoms with Stokes component
S_y(out) = S_y(in) + G N_L F_z / 2.  The shot noise of the input is
var(S_y(in)) = N_L / 4, so the reading m = 2 S_y(out) / N_L is

    m = G F_z + xi,    var(xi) = 1 / N_L.

Readings are therefore in rotation (radian) units.  A metapulse sums N_R
readings of one preparation:

    M = N_R G F_z + sum(xi),   var(M) = sigma_A^2 N_A'^2 N_R^2 + N_R / N_L,

with N_A' = N_A / N_A^MAX.  ``sigma_a2`` is the atomic variance in reading
units at N_A' = 1; the simulated F_z spread is chosen to reproduce it, so the
atomic term scales as N_A'^2 rather than as the projection-noise 2 N_A / 3.
The default ``sigma_a2`` gives the readout-to-atomic ratio 84.7 at N_R = 1.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import asdict, dataclass
from math import sqrt
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import InputError
from .fileio import atomic_write_text
from .rng import make_rng

READOUT_TO_ATOMIC_RATIO = 84.7
PULSES_PER_PREPARATION = 100

_DM_LABEL = re.compile(r"^DM\[([^\]]+)\]$")
_PLAIN_LABELS = ("baseline", "atom-number")


def thermal_variance(n_a):
    """var(F_z) of the unpolarised F=1 thermal state: 2 N_A / 3 spins^2."""
    if n_a < 0:
        raise InputError("atom number must be >= 0")
    return 2.0 * n_a / 3.0


@dataclass(frozen=True, kw_only=True)
class MeasurementConfig:
    g: float = 6e-8
    n_l: float = 3.7e6
    n_a: float = 1e6
    n_a_max: float = 1e6
    sigma_a2: Optional[float] = None
    n_r: int = 1
    pulses: int = PULSES_PER_PREPARATION
    residual_rotation: float = 0.0

    def __post_init__(self):
        if not self.n_l > 0:
            raise InputError("n_l must be > 0")
        if not (self.n_a_max > 0 and 0 < self.n_a <= self.n_a_max):
            raise InputError("need 0 < n_a <= n_a_max")
        if int(self.n_r) != self.n_r or self.n_r < 1:
            raise InputError("n_r must be an integer >= 1")
        if int(self.pulses) != self.pulses or self.pulses < 1:
            raise InputError("pulses must be an integer >= 1")
        if self.sigma_a2 is None:
            object.__setattr__(self, "sigma_a2", 1.0 / (READOUT_TO_ATOMIC_RATIO * self.n_l))
        elif not self.sigma_a2 >= 0:
            raise InputError("sigma_a2 must be >= 0")

    @classmethod
    def thermal(cls, **kw):
        """Config whose atomic noise is pure thermal-state projection noise at N_A^MAX."""
        g = kw.get("g", cls.g)
        n_a_max = kw.get("n_a_max", cls.n_a_max)
        kw.setdefault("sigma_a2", g * g * thermal_variance(n_a_max))
        return cls(**kw)

    @property
    def n_a_rel(self):
        return self.n_a / self.n_a_max

    @property
    def pulse_readout_var(self):
        return 1.0 / self.n_l

    @property
    def readout_var(self):
        """sigma_R^2 = N_R / N_L."""
        return self.n_r / self.n_l

    @property
    def atomic_var(self):
        return self.sigma_a2 * self.n_a_rel**2 * self.n_r**2

    @property
    def metapulse_var(self):
        """sigma_M^2 = sigma_A^2 N_A'^2 N_R^2 + N_R / N_L."""
        return self.atomic_var + self.readout_var

    @property
    def fz_var(self):
        """Spread of F_z (spins^2) that yields ``sigma_a2 * N_A'^2`` in reading units."""
        return self.sigma_a2 * self.n_a_rel**2 / self.g**2

    def metapulse_alpha(self, alpha):
        """Half-separation alpha_M = N_R G alpha of metapulses for displacements +/- alpha."""
        return self.n_r * self.g * alpha

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise InputError(f"unknown measurement config keys: {sorted(unknown)}")
        d = dict(d)
        for key in ("n_r", "pulses"):
            if key in d:
                d[key] = int(d[key])
        return cls(**d)

    @classmethod
    def from_json(cls, text):
        try:
            return cls.from_dict(json.loads(text))
        except (json.JSONDecodeError, TypeError) as exc:
            raise InputError(f"invalid measurement config JSON: {exc}") from exc


def dm_label(alpha):
    return f"DM[{alpha:.17g}]"


def parse_label(label):
    """Return ('baseline' | 'atom-number' | 'DM', displacement or None)."""
    if label in _PLAIN_LABELS:
        return label, None
    m = _DM_LABEL.match(label)
    if m:
        try:
            return "DM", float(m.group(1))
        except ValueError:
            pass
    raise InputError(f"unknown preparation label {label!r}")


@dataclass(eq=False)
class PreparationRecord:
    label: str
    readings: np.ndarray
    true_fz: Optional[float] = None
    seed: Optional[int] = None

    def __post_init__(self):
        parse_label(self.label)
        self.readings = np.asarray(self.readings, dtype=float)

    @property
    def kind(self):
        return parse_label(self.label)[0]

    @property
    def displacement(self):
        return parse_label(self.label)[1]

    def __eq__(self, other):
        if not isinstance(other, PreparationRecord):
            return NotImplemented
        return (
            self.label == other.label
            and self.true_fz == other.true_fz
            and self.seed == other.seed
            and np.array_equal(self.readings, other.readings)
        )


def simulate_preparation(cfg: MeasurementConfig, alpha, seed, label=None) -> PreparationRecord:
    """Prepare a displaced thermal state and probe it ``cfg.pulses`` times."""
    rng = make_rng(seed)
    fz = alpha + sqrt(cfg.fz_var) * rng.standard_normal()
    noise = sqrt(cfg.pulse_readout_var) * rng.standard_normal(cfg.pulses)
    readings = cfg.g * fz + noise + cfg.residual_rotation
    return PreparationRecord(
        label or dm_label(alpha),
        readings,
        float(fz),
        seed if isinstance(seed, (int, np.integer)) else None,
    )


def simulate_preparations(cfg: MeasurementConfig, alpha, count, seed, label=None):
    """``count`` independent preparations drawn from one seeded stream.

    Faster than repeated :func:`simulate_preparation`; the records carry no
    individual seed.
    """
    rng = make_rng(seed)
    fz = alpha + sqrt(cfg.fz_var) * rng.standard_normal(count)
    noise = sqrt(cfg.pulse_readout_var) * rng.standard_normal((count, cfg.pulses))
    readings = cfg.g * fz[:, None] + noise + cfg.residual_rotation
    label = label or dm_label(alpha)
    return [PreparationRecord(label, readings[i], float(fz[i])) for i in range(count)]


def simulate_baseline(cfg: MeasurementConfig, count, seed):
    """Undisplaced thermal-state probes measuring the residual rotation."""
    return simulate_preparations(cfg, 0.0, count, seed, label="baseline")


def compose_metapulse(readings, n_r, start=0) -> float:
    """Sum of ``n_r`` consecutive readings beginning at ``start``."""
    readings = np.asarray(readings, dtype=float)
    if n_r < 1 or start < 0 or start + n_r > readings.size:
        raise InputError(
            f"metapulse window [{start}, {start + n_r}) outside 0..{readings.size}"
        )
    return float(readings[start : start + n_r].sum())


def metapulses(record: PreparationRecord, n_r):
    """All disjoint consecutive metapulses of one record."""
    k = record.readings.size // n_r
    if k == 0:
        raise InputError(f"record has {record.readings.size} readings, fewer than n_r={n_r}")
    return record.readings[: k * n_r].reshape(k, n_r).sum(axis=1)


def build_ng_dataset(plus, minus, n_r, seed, size=None, p_plus=0.5) -> np.ndarray:
    """Metapulse sample of the two-component mixture.

    Each metapulse comes from a single preparation, taken in order from the
    pool picked by a coin flip (probability ``p_plus`` for ``plus``); no
    preparation is used twice.  ``size`` defaults to the smaller pool, which
    can never exhaust either pool.
    """
    if not plus or not minus:
        raise InputError("both preparation pools must be non-empty")
    if size is None:
        size = min(len(plus), len(minus))
    rng = make_rng(seed)
    use_plus = rng.random(size) < p_plus
    n_plus = int(use_plus.sum())
    n_minus = size - n_plus
    if n_plus > len(plus) or n_minus > len(minus):
        raise InputError(
            f"pool exhausted: need {n_plus} plus / {n_minus} minus preparations, "
            f"have {len(plus)} / {len(minus)}"
        )

    def window_sums(pool, count):
        if count == 0:
            return np.empty(0)
        rows = np.stack([r.readings for r in pool[:count]])
        if rows.shape[1] < n_r:
            raise InputError(f"records have {rows.shape[1]} readings, fewer than n_r={n_r}")
        return rows[:, :n_r].sum(axis=1)

    out = np.empty(size)
    out[use_plus] = window_sums(plus, n_plus)
    out[~use_plus] = window_sums(minus, n_minus)
    return out


# ---------------------------------------------------------------------------
# Record files


def _fmt(x):
    return f"{x:.17g}"


def records_to_csv(records, comments=()):
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    width = max((r.readings.size for r in records), default=0)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["label", "true_fz", "seed"] + [f"m_{i}" for i in range(1, width + 1)])
    for r in records:
        w.writerow(
            [
                r.label,
                "" if r.true_fz is None else _fmt(r.true_fz),
                "" if r.seed is None else str(int(r.seed)),
            ]
            + [_fmt(v) for v in r.readings]
        )
    return buf.getvalue()


def records_to_json(records, extra=None):
    payload = dict(extra or {})
    payload["records"] = [
        {
            "label": r.label,
            "true_fz": r.true_fz,
            "seed": None if r.seed is None else int(r.seed),
            "readings": r.readings.tolist(),
        }
        for r in records
    ]
    return json.dumps(payload, indent=1)


def export(records, path, format="csv", comments=()):
    if format == "csv":
        text = records_to_csv(records, comments)
    elif format == "json":
        text = records_to_json(records, {"comments": list(comments)} if comments else None)
    else:
        raise InputError(f"unknown record format {format!r}")
    atomic_write_text(path, text)


def _parse_float(cell, lineno, what):
    try:
        v = float(cell)
    except ValueError:
        raise InputError(f"line {lineno}: malformed {what}: {cell!r}") from None
    if not np.isfinite(v):
        raise InputError(f"line {lineno}: non-finite {what}: {cell!r}")
    return v


def _parse_csv(text):
    records = []
    header_seen = False
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), 1):
        if not row or not any(c.strip() for c in row) or row[0].lstrip().startswith("#"):
            continue
        if not header_seen:
            if [c.strip() for c in row[:3]] != ["label", "true_fz", "seed"]:
                raise InputError(f"line {lineno}: expected header 'label,true_fz,seed,m_1,...'")
            header_seen = True
            continue
        if len(row) < 3:
            raise InputError(f"line {lineno}: expected at least label, true_fz, seed columns")
        label = row[0].strip()
        try:
            parse_label(label)
        except InputError as exc:
            raise InputError(f"line {lineno}: {exc}") from None
        fz = row[1].strip()
        true_fz = _parse_float(fz, lineno, "true_fz") if fz else None
        sd = row[2].strip()
        try:
            seed = int(sd) if sd else None
        except ValueError:
            raise InputError(f"line {lineno}: malformed seed: {sd!r}") from None
        cells = [c.strip() for c in row[3:]]
        while cells and cells[-1] == "":
            cells.pop()
        readings = [_parse_float(c, lineno, f"reading m_{i}") for i, c in enumerate(cells, 1)]
        if not readings:
            raise InputError(f"line {lineno}: record has no readings")
        records.append(PreparationRecord(label, np.array(readings), true_fz, seed))
    if not header_seen:
        raise InputError("no header row found")
    return records


def _parse_json(text):
    try:
        payload = json.loads(text)
        rows = payload["records"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise InputError(f"invalid record JSON: {exc}") from exc
    records = []
    for i, row in enumerate(rows):
        try:
            readings = np.asarray(row["readings"], dtype=float)
            rec = PreparationRecord(row["label"], readings, row.get("true_fz"), row.get("seed"))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"record {i}: {exc}") from exc
        if not np.all(np.isfinite(readings)) or readings.size == 0:
            raise InputError(f"record {i}: readings must be finite and non-empty")
        records.append(rec)
    return records


def subtract_baselines(records):
    """Shift displaced records by the mean of the baseline block preceding them.

    A block starts with one or more consecutive ``baseline`` records; their
    pooled reading mean is subtracted from every ``DM[...]`` record until the
    next baseline.  DM records before any baseline, and ``atom-number``
    records, are left as they are.
    """
    out = []
    pending = []
    b = None
    for r in records:
        kind = r.kind
        if kind == "baseline":
            pending.append(r.readings)
            out.append(r)
            continue
        if pending:
            b = float(np.concatenate(pending).mean())
            pending = []
        if kind == "DM" and b is not None:
            r = PreparationRecord(r.label, r.readings - b, r.true_fz, r.seed)
        out.append(r)
    return out


def ingest(path, format="csv", subtract_baseline=True):
    """Read preparation records written by :func:`export` or by an acquisition system."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if format == "csv":
        records = _parse_csv(text)
    elif format == "json":
        records = _parse_json(text)
    else:
        raise InputError(f"unknown record format {format!r}")
    return subtract_baselines(records) if subtract_baseline else records
