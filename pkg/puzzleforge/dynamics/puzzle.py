"""
puzzle.py

Puzzle pieces of the quadratic family: the closures of the components of [-beta, beta] minus
P_a^{-n}({alpha, -alpha}), their nesting and image relations, and a caller-owned cache of levels.

Preimages are produced by recursive inverse branches x = +-sqrt(y - a) confined to a window,
never by polynomial root finding.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from puzzleforge.constants import EPS_DEDUP
from puzzleforge.dynamics.intervals import RealInterval, dedup_sorted, tile
from puzzleforge.dynamics.scalar import (
    ScalarMapParam,
    fixed_points,
    image_interval,
    inverse_branch,
)
from puzzleforge.errors import Unrelated
from puzzleforge.utils.logging import contextual_log


@dataclass(frozen=True)
class PuzzlePiece:
    """
    A closed interval of the order-n puzzle. From puzzle_level, index is the left-to-right position
    in the whole level. Pieces built while refining a parent window (the regular cover) carry
    their position among that parent's children instead.
    """
    interval: RealInterval
    order: int
    index: int

    @property
    def lo(self) -> float:
        return self.interval.lo

    @property
    def hi(self) -> float:
        return self.interval.hi


@dataclass(frozen=True)
class PuzzleLevel:
    order: int
    pieces: Tuple[PuzzlePiece, ...]
    cut_points: Tuple[float, ...]

    @property
    def total_length(self) -> float:
        return sum(piece.interval.length for piece in self.pieces)


def preimages_within(
    p: ScalarMapParam,
    window: RealInterval,
    targets: Sequence[float],
    depth: int,
) -> List[float]:
    """
    All x in window with P_a^depth(x) in targets, sorted and deduplicated at EPS_DEDUP.

    The recursion pulls back the preimages found inside the image hull of the window, so a
    narrow window only ever visits the branches that can reach it.
    """
    if depth == 0:
        return dedup_sorted([t for t in targets if window.contains(t, EPS_DEDUP)], EPS_DEDUP)
    image = image_interval(p, window)
    found: List[float] = []
    for y in preimages_within(p, image, targets, depth - 1):
        for sign in (-1.0, 1.0):
            x = inverse_branch(p, y, sign)
            if x is not None and window.contains(x, EPS_DEDUP):
                found.append(x)
    return dedup_sorted(found, EPS_DEDUP)


def preimage_set(p: ScalarMapParam, n: int) -> List[float]:
    """
    P_a^{-n}({alpha, -alpha}) inside [-beta, beta], sorted. Requires a <= -3/4 for the usual
    ordering of alpha and -alpha.
    """
    if n < 0:
        raise ValueError("order must be >= 0")
    fp = fixed_points(p)
    window = RealInterval(-fp.beta, fp.beta)
    return preimages_within(p, window, (fp.alpha, -fp.alpha), n)


def puzzle_level(p: ScalarMapParam, n: int) -> PuzzleLevel:
    """
    The puzzle pieces of order n tiling [-beta, beta], indexed left to right.
    """
    fp = fixed_points(p)
    cuts = preimage_set(p, n)
    interior = [c for c in cuts if -fp.beta + EPS_DEDUP < c < fp.beta - EPS_DEDUP]
    boundary = [-fp.beta] + interior + [fp.beta]
    pieces = tuple(
        PuzzlePiece(interval=iv, order=n, index=i) for i, iv in enumerate(tile(boundary))
    )
    contextual_log('debug', f"🧩 [Puzzle] order {n}: {len(pieces)} pieces", operation="puzzle_level", params={"a": p.a, "order": n})
    return PuzzleLevel(order=n, pieces=pieces, cut_points=tuple(cuts))


def locate_piece(level: PuzzleLevel, x: float) -> PuzzlePiece:
    """The leftmost piece of level containing x."""
    los = [piece.lo for piece in level.pieces]
    i = max(bisect.bisect_right(los, x) - 1, 0)
    if i > 0 and level.pieces[i - 1].interval.contains(x):
        i -= 1
    piece = level.pieces[i]
    if not piece.interval.contains(x, EPS_DEDUP):
        raise Unrelated(f"{x!r} lies outside the order-{level.order} tiling")
    return piece


def _unique_container(level: PuzzleLevel, target: RealInterval, what: str) -> PuzzlePiece:
    containers = [
        piece for piece in level.pieces
        if piece.interval.contains_interval(target, EPS_DEDUP)
    ]
    if len(containers) != 1:
        raise Unrelated(
            f"{what} [{target.lo!r}, {target.hi!r}] lies in {len(containers)} pieces of order {level.order}"
        )
    return containers[0]


def _check_orders(level_n: PuzzleLevel, level_n_minus_1: PuzzleLevel, piece: PuzzlePiece) -> None:
    if piece.order != level_n.order or level_n.order != level_n_minus_1.order + 1:
        raise Unrelated(
            f"orders do not chain: piece {piece.order}, levels {level_n.order} and {level_n_minus_1.order}"
        )


def parent_piece(level_n: PuzzleLevel, level_n_minus_1: PuzzleLevel, piece: PuzzlePiece) -> PuzzlePiece:
    """The unique order-(n-1) piece containing an order-n piece."""
    _check_orders(level_n, level_n_minus_1, piece)
    return _unique_container(level_n_minus_1, piece.interval, "piece")


def image_piece(
    p: ScalarMapParam,
    level_n: PuzzleLevel,
    level_n_minus_1: PuzzleLevel,
    piece: PuzzlePiece,
) -> PuzzlePiece:
    """The unique order-(n-1) piece containing P_a(piece)."""
    _check_orders(level_n, level_n_minus_1, piece)
    return _unique_container(level_n_minus_1, image_interval(p, piece.interval), "image")


def critical_nest(p: ScalarMapParam, n: int, cache: Optional["PuzzleCache"] = None) -> List[PuzzlePiece]:
    """The pieces containing the critical point 0 at orders 0..n."""
    levels = [cache.level(p, k) if cache is not None else puzzle_level(p, k) for k in range(n + 1)]
    return [locate_piece(level, 0.0) for level in levels]


class PuzzleCache:
    """
    Memo of puzzle levels keyed by (a, order). Owned by one caller; not shared across workers.
    """

    def __init__(self) -> None:
        self._levels: Dict[Tuple[float, int], PuzzleLevel] = {}
        self.hits = 0
        self.misses = 0

    def level(self, p: ScalarMapParam, n: int) -> PuzzleLevel:
        key = (p.a, n)
        cached = self._levels.get(key)
        if cached is not None:
            self.hits += 1
            return cached
        self.misses += 1
        level = puzzle_level(p, n)
        self._levels[key] = level
        return level

    def clear(self) -> None:
        self._levels.clear()

    def __len__(self) -> int:
        return len(self._levels)


def brute_force_roots(p: ScalarMapParam, n: int, grid: int = 1_000_000) -> List[float]:
    """
    Root-scan oracle for P_a^n(x) = +-alpha on [-beta, beta]: sign changes on a uniform grid,
    each polished with brentq. Independent of the inverse-branch recursion.
    """
    fp = fixed_points(p)
    xs = np.linspace(-fp.beta, fp.beta, grid)
    ys = xs.copy()
    for _ in range(n):
        ys = ys * ys + p.a

    def iterate(x: float) -> float:
        for _ in range(n):
            x = x * x + p.a
        return x

    roots: List[float] = []
    for target in (fp.alpha, -fp.alpha):
        g = ys - target
        roots.extend(xs[g == 0.0].tolist())
        for i in np.flatnonzero(g[:-1] * g[1:] < 0.0):
            roots.append(brentq(lambda x: iterate(x) - target, xs[i], xs[i + 1], xtol=1e-15))
    return dedup_sorted(roots, EPS_DEDUP)
