"""Qualitative analysis of unbounded dynamics in 3D polynomial vector fields."""

__version__ = "0.1.0"
