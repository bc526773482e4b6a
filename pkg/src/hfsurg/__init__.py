"""Heegaard Floer homology of surgeries on two-bridge links."""

__version__ = "0.1.0"
