"""Flux identification for coupled 2x2 conservation laws from Riemann observations."""

__version__ = "0.1.0"
