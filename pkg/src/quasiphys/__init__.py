"""Quasi-sets, particle-mechanics axiom checkers and finite quantum measurement."""

__version__ = "0.1.0"
