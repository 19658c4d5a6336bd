"""Spectrum of three identical particles in a one-dimensional box with harmonic pair coupling."""

__version__ = "0.1.0"
