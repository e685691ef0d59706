"""Figure rendering for rydcavity CSV artifacts."""

from .render import KINDS, MissingColumn, PlotSpec, RenderError, render

__version__ = "0.1.0"
