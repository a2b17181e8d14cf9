"""Multi-dimensional bug report analytics engine."""

__version__ = "0.1.0"
