"""Figure renderers for household-energy simulation outputs."""
from .bands import band_steps, flag_bands
from .errors import DataError, FiguresError, SchemaError
from .render import FIGURE_IDS, FigureSpec, render

__version__ = "0.1.0"

__all__ = [
    "band_steps",
    "flag_bands",
    "DataError",
    "FiguresError",
    "SchemaError",
    "FIGURE_IDS",
    "FigureSpec",
    "render",
    "__version__",
]
