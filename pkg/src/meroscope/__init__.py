"""Meromorphic extendibility and interpolation rigidity on the unit circle."""

__version__ = "0.1.0"
