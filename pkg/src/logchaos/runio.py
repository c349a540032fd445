"""Atomic, reproducible run outputs: CSV files, manifests, field dumps.

Everything is written to a temp file in the target directory and moved
into place with os.replace, so a crashed run never leaves a partial
file.  Floats are serialized with repr (shortest round-trip form), which
makes byte-identical outputs the natural consequence of bit-identical
numbers.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .fields import FieldEnsemble


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _atomic_write_bytes(path: Path, payload: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    _atomic_write_bytes(Path(path), text.encode("utf-8"))


def write_csv(path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_manifest(path, entries: dict) -> None:
    lines = [f"{key} = {fmt(value)}" for key, value in entries.items()]
    atomic_write_text(path, "\n".join(lines) + "\n")


def version_string() -> str:
    return f"logchaos-v{__version__}"


def write_field_dump(directory, ens: FieldEnsemble, extra: dict | None = None) -> None:
    """field.bin (flat little-endian float64, replica-major then
    scale-major then point-major) plus manifest.txt describing it."""
    directory = Path(directory)
    payload = np.ascontiguousarray(ens.values, dtype="<f8").tobytes()
    _atomic_write_bytes(directory / "field.bin", payload)
    entries = {
        "kind": "field-dump",
        "version": version_string(),
        "dtype": "<f8",
        "order": "replica-major,scale-major,point-major",
        "d": ens.grid.d,
        "n": ens.grid.n,
        "length": ens.grid.length,
        "margin": ens.grid.margin,
        "n_replicas": ens.n_replicas,
        "n_scales": len(ens.ladder),
        "scales": ";".join(fmt(e) for e in ens.ladder.scales),
        "profile": ens.seed.profile,
        "scheme": ens.scheme,
        "rng_seed": ens.rng_seed,
        "fallbacks": ";".join(ens.notes) if ens.notes else "none",
    }
    if extra:
        entries.update(extra)
    write_manifest(directory / "manifest.txt", entries)


def write_array_dump(directory, values: np.ndarray, entries: dict) -> None:
    """Generic flat dump for non-ladder fields (KL views and the like)."""
    directory = Path(directory)
    payload = np.ascontiguousarray(values, dtype="<f8").tobytes()
    _atomic_write_bytes(directory / "field.bin", payload)
    base = {
        "kind": "field-dump",
        "version": version_string(),
        "dtype": "<f8",
        "order": "replica-major,scale-major,point-major",
    }
    base.update(entries)
    write_manifest(directory / "manifest.txt", base)
