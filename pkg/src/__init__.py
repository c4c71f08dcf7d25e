"""
curvecross - Intersection Numbers of Curves on Surfaces

Canonical forms, intersection numbers, minimal immersions and simplicity
tests for closed curves on combinatorial surfaces.
"""

__version__ = "0.1.0"
