"""Warped discrete Fourier operators for piecewise smooth periodic maps."""

__version__ = "0.1.0"
