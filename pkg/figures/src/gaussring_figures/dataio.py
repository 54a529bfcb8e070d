"""Readers for the gaussring CLI export formats.

Everything here consumes only the documented data files (manifest.json plus
CSV exports); no physics is recomputed.  Loaders validate the manifest
schema version before touching any data.
"""

from __future__ import annotations

import csv
import glob
import json
import os

import numpy as np

#: manifest versions this package knows how to read
SUPPORTED_VERSIONS = ("0.1",)


class SchemaError(ValueError):
    """Raised when an export directory is missing, empty or incompatible."""


def load_manifest(directory: str) -> dict:
    """Read and version-check ``manifest.json`` in an export directory."""
    path = os.path.join(directory, "manifest.json")
    try:
        with open(path) as fh:
            manifest = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read export manifest {path}: {exc}") from exc
    version = str(manifest.get("version", ""))
    if not any(version.startswith(v) for v in SUPPORTED_VERSIONS):
        raise SchemaError(
            f"unsupported export version {version!r} in {path}; "
            f"supported: {', '.join(SUPPORTED_VERSIONS)}"
        )
    return manifest


def _read_rows(path: str) -> list[dict]:
    try:
        with open(path, newline="") as fh:
            return list(csv.DictReader(fh))
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc


def load_complex_grid(path: str, x_col: str, y_col: str
                      ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Load a (x, y, re, im) long-format CSV into axes and a complex matrix."""
    rows = _read_rows(path)
    if not rows:
        raise SchemaError(f"empty export file {path}")
    x = np.array([float(r[x_col]) for r in rows])
    y = np.array([float(r[y_col]) for r in rows])
    z = np.array([float(r["re"]) + 1j * float(r["im"]) for r in rows])
    xs = np.unique(x)
    ys = np.unique(y)
    if xs.size * ys.size != z.size:
        raise SchemaError(f"{path} is not a complete {x_col} x {y_col} grid")
    grid = np.empty((xs.size, ys.size), dtype=complex)
    xi = np.searchsorted(xs, x)
    yi = np.searchsorted(ys, y)
    grid[xi, yi] = z
    return xs, ys, grid


def load_jsa(path: str):
    return load_complex_grid(path, "k", "k_prime")


def load_jta(path: str):
    return load_complex_grid(path, "t_signal", "t_idler")


def load_field(path: str) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Load a (k, mode, re, im) spectral-field CSV as {mode: (k, values)}."""
    rows = _read_rows(path)
    if not rows:
        raise SchemaError(f"empty export file {path}")
    out: dict[str, tuple[list, list]] = {}
    for r in rows:
        ks, vs = out.setdefault(r["mode"], ([], []))
        ks.append(float(r["k"]))
        vs.append(float(r["re"]) + 1j * float(r["im"]))
    return {m: (np.array(ks), np.array(vs)) for m, (ks, vs) in out.items()}


def load_table(path: str) -> list[dict]:
    """Load a metrics/sweep/ensemble CSV as a list of row dicts."""
    rows = _read_rows(path)
    if not rows:
        raise SchemaError(f"empty export file {path}")
    return rows


def find_pairs(directory: str, stem: str) -> dict[str, str]:
    """Map export tags to files matching ``{stem}_{tag}.csv``."""
    pattern = os.path.join(directory, f"{stem}_*.csv")
    out = {}
    for path in sorted(glob.glob(pattern)):
        name = os.path.basename(path)
        if name.endswith(".manifest.json"):
            continue
        tag = name[len(stem) + 1:-len(".csv")]
        out[tag] = path
    return out


def column(rows: list[dict], name: str, allow_missing: bool = False
           ) -> np.ndarray:
    """Numeric column from CSV rows; blank cells become NaN."""
    if name not in rows[0]:
        if allow_missing:
            return np.full(len(rows), np.nan)
        raise SchemaError(f"export rows lack required column {name!r}")
    return np.array([float(r[name]) if r[name] not in ("", None) else np.nan
                     for r in rows])
