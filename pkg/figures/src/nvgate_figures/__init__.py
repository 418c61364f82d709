"""Figure renderer for nvgate CSV outputs."""

from .render import FigureDataError, load_table, render, render_all
from .specs import SPECS, FigureSpec, all_specs

__all__ = [
    "FigureDataError",
    "FigureSpec",
    "SPECS",
    "all_specs",
    "load_table",
    "render",
    "render_all",
]

__version__ = "0.1.0"
