"""Atom-in-cavity simulator with quantized atomic motion."""

__version__ = "0.1.0"
