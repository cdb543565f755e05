"""
puzzleforge

Desk-scale numerics for the quadratic family x**2 + a and the Hénon family: puzzle pieces,
regular covers, strong-regularity itineraries, binding-based parameter selection, invariant
measures and box/piece combinatorics, driven from a reproducible sweep CLI.
"""

__version__ = "0.3.1"
