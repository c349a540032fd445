"""Readers for the simulator's published output files.

Three formats exist: `key = value` manifests, plain CSV with a fixed
header, and flat little-endian float64 dumps described by a manifest.
Every reader validates the full file before returning anything, and
nothing in this package recomputes statistics: figures are views of
the stored columns.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class SchemaError(Exception):
    """An input file does not match its published schema."""


CONVERGENCE_COLUMNS = ("epsilon", "n_replicas", "l2_error", "l2_se", "corr",
                       "counter_mode", "counter_se_max")
THICKPOINT_COLUMNS = ("epsilon_n", "n_replicas", "rel_l2_error", "se")
GN_COLUMNS = ("N", "g_N")


def read_manifest(path: str | Path) -> dict[str, str]:
    path = Path(path)
    if not path.is_file():
        raise SchemaError(f"manifest not found: {path}")
    entries: dict[str, str] = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        if " = " not in line:
            raise SchemaError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split(" = ", 1)
        entries[key] = value
    if not entries:
        raise SchemaError(f"{path}: manifest is empty")
    return entries


@dataclass(frozen=True)
class Table:
    """One validated CSV file: header plus raw string cells."""

    path: Path
    header: tuple[str, ...]
    cells: tuple[tuple[str, ...], ...]

    def floats(self, name: str) -> np.ndarray:
        j = self.header.index(name)
        out = np.empty(len(self.cells))
        for i, row in enumerate(self.cells):
            try:
                out[i] = float(row[j])
            except ValueError as exc:
                raise SchemaError(
                    f"{self.path}: row {i + 1}, column {name!r}: "
                    f"{row[j]!r} is not a number"
                ) from exc
        return out

    def strings(self, name: str) -> tuple[str, ...]:
        j = self.header.index(name)
        return tuple(row[j] for row in self.cells)


def read_table(path: str | Path, columns: tuple[str, ...]) -> Table:
    path = Path(path)
    if not path.is_file():
        raise SchemaError(f"csv not found: {path}")
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{path}: file is empty")
    header = tuple(rows[0])
    if header != columns:
        raise SchemaError(
            f"{path}: header {list(header)} does not match the expected "
            f"columns {list(columns)}"
        )
    cells = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not cell.strip() for cell in row):
            raise SchemaError(f"{path}: line {lineno} is an empty row")
        if len(row) != len(columns):
            raise SchemaError(
                f"{path}: line {lineno} has {len(row)} fields, "
                f"expected {len(columns)}"
            )
        if any(not cell.strip() for cell in row):
            raise SchemaError(f"{path}: line {lineno} has an empty field")
        cells.append(tuple(row))
    if not cells:
        raise SchemaError(f"{path}: no data rows")
    return Table(path=path, header=header, cells=tuple(cells))


@dataclass(frozen=True)
class FieldDump:
    """A binary field dump reshaped per its manifest."""

    directory: Path
    manifest: dict[str, str]
    values: np.ndarray  # (n_replicas, n_scales, n, ...) float64

    @property
    def d(self) -> int:
        return int(self.manifest["d"])

    @property
    def n(self) -> int:
        return int(self.manifest["n"])

    @property
    def length(self) -> float:
        return float(self.manifest["length"])

    def axis(self) -> np.ndarray:
        # cell centers, matching the simulator's grid convention
        return (np.arange(self.n) + 0.5) * (self.length / self.n)


def _manifest_int(manifest: dict[str, str], path: Path, key: str) -> int:
    if key not in manifest:
        raise SchemaError(f"{path}: manifest is missing {key!r}")
    try:
        return int(manifest[key])
    except ValueError as exc:
        raise SchemaError(
            f"{path}: manifest {key} = {manifest[key]!r} is not an integer"
        ) from exc


def load_field_dump(directory: str | Path) -> FieldDump:
    directory = Path(directory)
    manifest_path = directory / "manifest.txt"
    manifest = read_manifest(manifest_path)
    if manifest.get("dtype") != "<f8":
        raise SchemaError(
            f"{manifest_path}: dtype {manifest.get('dtype')!r} is not '<f8'"
        )
    d = _manifest_int(manifest, manifest_path, "d")
    if d not in (1, 2):
        raise SchemaError(f"{manifest_path}: d = {d} is not 1 or 2")
    n = _manifest_int(manifest, manifest_path, "n")
    n_replicas = _manifest_int(manifest, manifest_path, "n_replicas")
    n_scales = _manifest_int(manifest, manifest_path, "n_scales")
    if "length" not in manifest:
        raise SchemaError(f"{manifest_path}: manifest is missing 'length'")
    bin_path = directory / "field.bin"
    if not bin_path.is_file():
        raise SchemaError(f"field dump not found: {bin_path}")
    payload = bin_path.read_bytes()
    want = n_replicas * n_scales * n**d * 8
    if len(payload) != want:
        raise SchemaError(
            f"{bin_path}: {len(payload)} bytes, manifest implies {want}"
        )
    values = np.frombuffer(payload, dtype="<f8").reshape(
        (n_replicas, n_scales) + (n,) * d)
    return FieldDump(directory=directory, manifest=manifest, values=values)
