"""Biconservative hypersurfaces with diagonalizable shape operator in Minkowski 4-space."""

__version__ = "0.1.0"
