"""Numerical laboratory for the almost Mathieu operator at the critical
coupling line between singular continuous and pure point behavior."""

__version__ = "0.1.0"
