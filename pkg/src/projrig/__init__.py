"""Projective rigidity of point-line configurations."""

__version__ = "0.1.0"
