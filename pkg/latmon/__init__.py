"""Lattice sums, monotonicity certificates and attractor-dimension bounds."""

__version__ = "0.1.0"
