"""Publication-style figures from andersonlab experiment outputs."""

from .figures import FIGURE_KINDS, FigureRequest, build_figure, render
from .readers import EmptyDataError, SchemaError, Table, read_summary, read_table

__version__ = "0.1.0"

__all__ = [
    "FIGURE_KINDS",
    "EmptyDataError",
    "FigureRequest",
    "SchemaError",
    "Table",
    "build_figure",
    "read_summary",
    "read_table",
    "render",
]
