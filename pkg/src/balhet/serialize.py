"""Deterministic CSV artifacts with versioned headers.

Every file starts with ``#``-prefixed metadata lines (schema version,
tool version, config hash, then sorted key/value pairs) followed by a
column header.  Floats are rendered with a fixed 12-digit exponent
format and files are written atomically (temp file, then rename), so a
given configuration and seed always produce byte-identical output.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile

import numpy as np

from . import __version__
from .spectral import SpectralDensity

SPECTRAL_SCHEMA = "spectral-density csv v1"
TABLE_SCHEMA = "table csv v1"

_FLOAT_FORMAT = "{:.12e}"


def config_hash(config: dict) -> str:
    """Stable short hash of a JSON-serializable configuration mapping."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"),
                           default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _meta_lines(schema: str, meta: dict) -> list[str]:
    lines = [f"# {schema}", f"# tool: balhet {__version__}"]
    for key in sorted(meta):
        lines.append(f"# {key}: {meta[key]}")
    return lines


def write_spectral_csv(path: str, sd: SpectralDensity, extra_meta: dict | None = None) -> None:
    """Serialize a spectral density as ``omega,chi_normalized[,sigma]``."""
    meta = {"normalization": sd.normalization}
    meta.update({k: v for k, v in sd.config_snapshot.items()})
    if extra_meta:
        meta.update(extra_meta)
    if "config_hash" not in meta:
        meta["config_hash"] = config_hash(dict(sd.config_snapshot))
    lines = _meta_lines(SPECTRAL_SCHEMA, meta)
    if sd.sigma is None:
        lines.append("omega,chi_normalized")
        for w, chi in zip(sd.omega_grid, sd.chi_normalized):
            lines.append(f"{_FLOAT_FORMAT.format(w)},{_FLOAT_FORMAT.format(chi)}")
    else:
        lines.append("omega,chi_normalized,sigma")
        for w, chi, s in zip(sd.omega_grid, sd.chi_normalized, sd.sigma):
            lines.append(",".join(_FLOAT_FORMAT.format(v) for v in (w, chi, s)))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_table_csv(path: str, columns: dict, meta: dict | None = None) -> None:
    """Serialize named float columns of equal length with metadata header."""
    names = list(columns)
    arrays = [np.asarray(columns[name], dtype=float) for name in names]
    length = len(arrays[0])
    if any(len(a) != length for a in arrays):
        raise ValueError("all columns must have the same length")
    lines = _meta_lines(TABLE_SCHEMA, meta or {})
    lines.append(",".join(names))
    for i in range(length):
        lines.append(",".join(_FLOAT_FORMAT.format(a[i]) for a in arrays))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_json(path: str, payload: dict) -> None:
    """Serialize a JSON summary deterministically (sorted keys)."""
    _atomic_write(path, json.dumps(payload, sort_keys=True, indent=2,
                                   default=str) + "\n")


def read_csv(path: str):
    """Read back a package CSV: returns (meta dict, column dict of arrays)."""
    meta = {}
    rows = []
    names = None
    with open(path, "r") as handle:
        for line in handle:
            line = line.rstrip("\n")
            if line.startswith("#"):
                stripped = line[1:].strip()
                if ":" in stripped:
                    key, value = stripped.split(":", 1)
                    meta[key.strip()] = value.strip()
                else:
                    meta.setdefault("schema", stripped)
                continue
            if names is None:
                names = line.split(",")
                continue
            rows.append([float(v) for v in line.split(",")])
    data = np.asarray(rows, dtype=float)
    columns = {name: data[:, i] for i, name in enumerate(names or [])}
    return meta, columns
