"""Coherent-state verification of 2-out-of-4 SAT: simulation and analysis."""

__version__ = "0.1.0"
