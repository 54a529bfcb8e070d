"""Offline figure generation from gaussring CLI data exports."""

from gaussring_figures.dataio import SchemaError
from gaussring_figures.render import FigureSpec, render

__version__ = "0.1.0"

__all__ = ["FigureSpec", "SchemaError", "render", "__version__"]
