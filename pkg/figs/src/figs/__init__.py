"""Figure rendering for logchaos output files."""

from .jobs import KINDS, FigureJob
from .render import build_figure, render
from .schemas import (CONVERGENCE_COLUMNS, GN_COLUMNS, THICKPOINT_COLUMNS,
                      FieldDump, SchemaError, Table, load_field_dump,
                      read_manifest, read_table)

__version__ = "0.1.0"

__all__ = [
    "CONVERGENCE_COLUMNS",
    "FieldDump",
    "FigureJob",
    "GN_COLUMNS",
    "KINDS",
    "SchemaError",
    "THICKPOINT_COLUMNS",
    "Table",
    "build_figure",
    "load_field_dump",
    "read_manifest",
    "read_table",
    "render",
]
