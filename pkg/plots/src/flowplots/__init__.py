"""Curve plots with error bars for experiment summary CSVs."""

from .render import CurveSpec, PlotError, render

__all__ = ["CurveSpec", "PlotError", "render"]

__version__ = "0.1.0"
