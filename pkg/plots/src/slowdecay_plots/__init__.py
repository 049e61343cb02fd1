"""Publication-style figures for slowdecay run CSVs."""

from .csvdata import PlotDataError, read_csv
from .render import FigureKind, PlotSpec, RenderInfo, render

__version__ = "0.1.0"
