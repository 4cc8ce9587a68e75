"""Odd Khovanov homology, its Steenrod squares, and refined s-invariants."""

__version__ = "0.1.0"
