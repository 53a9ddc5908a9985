"""Numerical tools for the hierarchical spatial four-body problem."""

__version__ = "0.1.0"
