"""Exponential sums and Dirichlet series over Z[w], w a primitive eighth root of unity."""

__version__ = "0.1.0"
