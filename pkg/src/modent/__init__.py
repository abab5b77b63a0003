"""Entropy of vectors relative to standard subspaces of the U(1)-current net."""

__version__ = "0.1.0"
