"""Exact construction of restricted value functions and efficient frontiers
of multiobjective mixed-integer linear programs."""

__version__ = "0.1.0"
