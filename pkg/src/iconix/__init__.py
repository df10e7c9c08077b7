"""Iconix: one concept in, a style-consistent dual-axis icon grid out."""

__version__ = "0.1.0"
