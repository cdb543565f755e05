"""
Numerical core: the quadratic family (intervals, scalar, puzzle, regular_cover,
strong_regularity, binding, measures) and the Hénon family (henon, boxes).
"""
