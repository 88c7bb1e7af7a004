"""Render qfridge CSV output into publication-style figures.

This package consumes the CSV files written by the ``qfridge`` command line
and never recomputes any physics: the CSV is the single source of numerical
truth.
"""
__version__ = "1.0.0"

from .reader import CsvTable, SchemaError, read_csv      # noqa: F401
from .render import FigureSpec, render                   # noqa: F401
