"""Numerics for connections with the unfolding pole divisor z^m - eps^m."""

__version__ = "0.1.0"
