"""Equivariant psd lifts and sum-of-squares certificates for regular polygons."""

__version__ = "0.1.0"
