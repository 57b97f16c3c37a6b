"""Exact Potts partition functions and zero loci on diamond hierarchical graphs."""

__version__ = "0.1.0"
