"""Render publication-style figures from ghzq CSV result files."""

from ghzq_figures.io import FigureDataError, ResultTable, read_result
from ghzq_figures.plots import FIGURE_KINDS, FigureJob, RenderReport, render

__version__ = "0.1.0"

__all__ = [
    "FIGURE_KINDS",
    "FigureDataError",
    "FigureJob",
    "RenderReport",
    "ResultTable",
    "read_result",
    "render",
    "__version__",
]
