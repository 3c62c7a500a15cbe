"""Finite-scale coarse geometry of finitely generated groups and graphs."""

__version__ = "0.1.0"
