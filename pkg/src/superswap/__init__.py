"""Entanglement swapping through superradiant collective decay."""

__version__ = "0.1.0"
