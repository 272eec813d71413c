"""Ideal hyperbolic structures on triangulated 3-manifolds with boundary."""

__version__ = "0.1.0"
