"""Render experiment CSVs from the avint harness into publication-style figures."""

from .render import FIGURE_IDS, FigureSpec, render

__all__ = ["FIGURE_IDS", "FigureSpec", "render"]
