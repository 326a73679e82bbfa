"""Exact symbolic calculus for large-N matrix vertex algebras."""

__version__ = "0.1.0"
