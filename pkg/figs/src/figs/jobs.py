"""Figure jobs: what to render, from which inputs, to which file."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .schemas import SchemaError

KINDS = ("gff-views", "convergence", "thick-points", "gn-sequence")

IMAGE_SUFFIXES = (".png", ".svg")

# style keys each kind accepts, with defaults applied at render time
_STYLE_KEYS = {
    "gff-views": {"dpi", "title", "cmap", "replica"},
    "convergence": {"dpi", "title", "band"},
    "thick-points": {"dpi", "title", "band"},
    "gn-sequence": {"dpi", "title", "logy"},
}


@dataclass(frozen=True)
class FigureJob:
    """One figure: kind, input path(s), output image path, styling.

    gff-views takes a dump directory; the CSV kinds take one CSV file.
    """

    kind: str
    inputs: tuple[Path, ...]
    out_path: Path
    style: Mapping[str, object] = field(default_factory=dict)

    def validated(self) -> "FigureJob":
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; "
                             f"expected one of {KINDS}")
        if len(self.inputs) != 1:
            raise ValueError(f"{self.kind} takes exactly one input path")
        src = self.inputs[0]
        if self.kind == "gff-views":
            if not src.is_dir():
                raise SchemaError(f"dump directory not found: {src}")
        elif not src.is_file():
            raise SchemaError(f"input file not found: {src}")
        if self.out_path.suffix not in IMAGE_SUFFIXES:
            raise ValueError(
                f"output {self.out_path.name!r} must end in one of "
                f"{IMAGE_SUFFIXES}"
            )
        unknown = set(self.style) - _STYLE_KEYS[self.kind]
        if unknown:
            raise ValueError(
                f"{self.kind} does not accept style keys {sorted(unknown)}"
            )
        dpi = self.style.get("dpi", 150)
        if not (isinstance(dpi, int) and dpi > 0):
            raise ValueError("style dpi must be a positive integer")
        return self
