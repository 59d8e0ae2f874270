"""Exact Lie-Trotter splitting experiments for linear hyperbolic systems."""

__version__ = "0.1.0"
