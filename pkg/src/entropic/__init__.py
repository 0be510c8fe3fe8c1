"""Entropy minimization and maximization engines."""

__version__ = "0.1.0"
