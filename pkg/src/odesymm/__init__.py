"""Lie point and dynamic symmetries of ODE systems via the abnormal control invariance condition."""

__version__ = "0.1.0"
