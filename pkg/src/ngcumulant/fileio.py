"""Small file helpers: atomic writes and one-column sample files."""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import InputError


def atomic_write_text(path, text):
    """Write ``text`` to ``path`` via a temp file in the same directory plus rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_sample(path) -> np.ndarray:
    """Read readings from a text file: one value per line, or the first CSV column.

    Blank lines and ``#`` comments are skipped; a non-numeric first row is
    treated as a header.
    """
    values = []
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    seen_data = False
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        cell = line.split(",")[0].strip()
        try:
            v = float(cell)
        except ValueError:
            if not seen_data and not values:
                seen_data = True
                continue
            raise InputError(f"{path}: line {lineno}: not a number: {cell!r}") from None
        if not np.isfinite(v):
            raise InputError(f"{path}: line {lineno}: non-finite value {cell!r}")
        seen_data = True
        values.append(v)
    return np.asarray(values, dtype=float)
