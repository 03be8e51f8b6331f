"""Numerical laboratory for Lyapunov-type inequalities of Pucci extremal operators."""

__version__ = "0.1.0"
