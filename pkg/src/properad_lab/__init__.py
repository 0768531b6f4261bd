"""Properadic Koszul hierarchy and twisting, in exact arithmetic."""

__version__ = "0.1.0"
