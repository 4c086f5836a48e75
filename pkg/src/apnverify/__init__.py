"""Stability and validity checking for homogeneous equations over algebraic Petri nets."""

__version__ = "0.1.0"
