"""Gaussian-process active palpation with energy-aware acquisition."""

__version__ = "0.1.0"
