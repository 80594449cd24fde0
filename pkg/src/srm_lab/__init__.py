"""Structural risk minimization for bounded regression with covering-number penalties."""

__version__ = "0.1.0"
