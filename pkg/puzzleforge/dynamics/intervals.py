"""
Closed real intervals, the common currency of puzzle pieces, covers and parameter windows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Sequence


@dataclass(frozen=True, order=True)
class RealInterval:
    """
    Closed interval [lo, hi] with lo <= hi.
    """
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise ValueError("interval endpoints must not be NaN")
        if self.lo > self.hi:
            raise ValueError(f"interval endpoints out of order: [{self.lo}, {self.hi}]")

    @classmethod
    def hull(cls, points: Iterable[float]) -> "RealInterval":
        values = list(points)
        return cls(min(values), max(values))

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= x <= self.hi + tol

    def contains_interior(self, x: float, tol: float = 0.0) -> bool:
        return self.lo + tol < x < self.hi - tol

    def contains_interval(self, other: "RealInterval", tol: float = 0.0) -> bool:
        return self.lo - tol <= other.lo and other.hi <= self.hi + tol

    def overlaps(self, other: "RealInterval") -> bool:
        return self.lo < other.hi and other.lo < self.hi

    def widened(self, amount: float) -> "RealInterval":
        return RealInterval(self.lo - amount, self.hi + amount)

    def to_list(self) -> List[float]:
        return [self.lo, self.hi]


def dedup_sorted(values: Sequence[float], tol: float) -> List[float]:
    """
    Sort and merge values closer than tol, keeping the first of each cluster.
    """
    merged: List[float] = []
    for v in sorted(values):
        if merged and v - merged[-1] <= tol:
            continue
        merged.append(v)
    return merged


def tile(boundary: Sequence[float]) -> List[RealInterval]:
    """Consecutive closed intervals between sorted boundary points."""
    return [RealInterval(lo, hi) for lo, hi in zip(boundary[:-1], boundary[1:])]


def merge_adjacent(intervals: Iterable[RealInterval], tol: float) -> List[RealInterval]:
    """
    Merge intervals that touch or overlap within tol into maximal intervals.
    """
    merged: List[RealInterval] = []
    for iv in sorted(intervals):
        if merged and iv.lo <= merged[-1].hi + tol:
            last = merged[-1]
            merged[-1] = RealInterval(last.lo, max(last.hi, iv.hi))
        else:
            merged.append(iv)
    return merged
