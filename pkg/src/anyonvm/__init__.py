"""Fusion-tree simulator and protocol interpreter for SU(2)_4 anyons."""

__version__ = "0.1.0"
