"""
regular_cover.py

Regular intervals of the quadratic family: puzzle pieces sent diffeomorphically onto
A = [alpha, -alpha] by P_a^n with an inverse branch extending over an enlargement of A.
Enumerates the maximal ones inside A order by order, measures what stays uncovered and
extracts the simple intervals (order below the critical return time) around the central gap.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from puzzleforge.constants import DEFAULT_KAPPA, DEFAULT_MAX_PIECES, DEFAULT_MAX_STEPS, EPS_DEDUP
from puzzleforge.dynamics.intervals import RealInterval, merge_adjacent, tile
from puzzleforge.dynamics.puzzle import PuzzlePiece, preimages_within
from puzzleforge.dynamics.scalar import (
    ReturnConvention,
    ScalarMapParam,
    critical_return_time,
    fixed_points,
    pull_back_interval,
)
from puzzleforge.errors import GapNotCentral, ResourceLimit, ReturnTimeNotFound
from puzzleforge.utils.logging import contextual_log


class NotRegularReason(str, Enum):
    IMAGE = "image"
    CRITICAL_INTERIOR = "critical_interior"
    EXTENSION = "extension"
    OUTSIDE_DOMAIN = "outside_domain"


@dataclass(frozen=True)
class NotRegular:
    reason: NotRegularReason
    detail: str = ""


@dataclass(frozen=True)
class RegularInterval:
    """
    A puzzle piece of order n mapped by P_a^n monotonically onto A, together with the side of 0
    of each intermediate image (the branch certificate).
    """
    piece: PuzzlePiece
    order: int
    is_simple: bool
    branch_certificate: Tuple[int, ...]

    @property
    def interval(self) -> RealInterval:
        return self.piece.interval

    @property
    def lo(self) -> float:
        return self.piece.interval.lo

    @property
    def hi(self) -> float:
        return self.piece.interval.hi

    def to_row(self) -> List:
        return [self.lo, self.hi, self.order, self.is_simple]


@dataclass(frozen=True)
class CoverReport:
    """
    Result of enumerate_regular. uncovered_measure[i] belongs to orders[i].
    """
    order_cap: int
    kappa: float
    orders: Tuple[int, ...]
    uncovered_measure: Tuple[float, ...]
    fitted_rate: Optional[float]
    regular_intervals: Tuple[RegularInterval, ...]
    uncovered_pieces: Tuple[RealInterval, ...]
    core: RealInterval
    return_time: Optional[int]
    monte_carlo: Optional[Dict[str, float]] = None
    _los: Tuple[float, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_los", tuple(iv.lo for iv in self.regular_intervals))

    def interval_containing(self, x: float) -> Optional[RegularInterval]:
        """The leftmost regular interval containing x, if any."""
        i = bisect.bisect_right(self._los, x) - 1
        if i < 0:
            return None
        if i > 0 and self.regular_intervals[i - 1].interval.contains(x):
            i -= 1
        candidate = self.regular_intervals[i]
        return candidate if candidate.interval.contains(x) else None

    def uncovered_containing(self, x: float) -> Optional[RealInterval]:
        for piece in self.uncovered_pieces:
            if piece.contains(x):
                return piece
        return None

    def to_dict(self) -> Dict:
        return {
            "orders": list(self.orders),
            "uncovered": list(self.uncovered_measure),
            "rate": self.fitted_rate,
            "intervals": [ri.to_row() for ri in self.regular_intervals],
            "order_cap": self.order_cap,
            "kappa": self.kappa,
            "core": self.core.to_list(),
            "return_time": self.return_time,
            "uncovered_pieces": [iv.to_list() for iv in self.uncovered_pieces],
            "monte_carlo": self.monte_carlo,
        }


def extended_core(core: RealInterval, kappa: float) -> RealInterval:
    """A enlarged by kappa * |A| / 2 on each side."""
    return core.widened(kappa * core.length / 2.0)


def forward_signs(p: ScalarMapParam, interval: RealInterval, order: int) -> Union[Tuple[int, ...], NotRegular]:
    """
    Side of 0 of P_a^k(interval) for k < order, or NotRegular if 0 is interior to one of them.
    Images are interval hulls of the endpoint images, which is exact while no image contains 0.
    """
    lo, hi = interval.lo, interval.hi
    signs: List[int] = []
    for k in range(order):
        if lo + EPS_DEDUP < 0.0 < hi - EPS_DEDUP:
            return NotRegular(
                NotRegularReason.CRITICAL_INTERIOR,
                f"0 is interior to the image of order {k}: [{lo!r}, {hi!r}]",
            )
        signs.append(1 if lo + hi > 0.0 else -1)
        y_lo, y_hi = lo * lo + p.a, hi * hi + p.a
        lo, hi = min(y_lo, y_hi), max(y_lo, y_hi)
    return tuple(signs)


def is_regular(
    p: ScalarMapParam,
    piece: PuzzlePiece,
    kappa: float = DEFAULT_KAPPA,
) -> Union[RegularInterval, NotRegular]:
    """
    Decide whether a puzzle piece of order n >= 1 is a regular interval of order n.

    Checks, in order: no intermediate image contains 0 in its interior (monotonicity); the
    inverse branch pulled back from A reproduces the piece (the image is exactly A); the same
    branch pulled back from the kappa-enlargement of A never reaches the critical value
    (extension). The backward chains are contracting, so the image test stays accurate for
    deep pieces where forward endpoint images would not.
    Args:
        p: parameter.
        piece: candidate piece; its order is the iterate tested.
        kappa: relative enlargement of A for the extension test.
    Returns:
        RegularInterval (is_simple unset) or NotRegular with the failing condition.
    """
    n = piece.order
    if n < 1:
        raise ValueError("regularity is tested for pieces of order >= 1")
    fp = fixed_points(p)
    core = fp.core
    if not RealInterval(-fp.beta, fp.beta).contains_interval(piece.interval, EPS_DEDUP):
        return NotRegular(NotRegularReason.OUTSIDE_DOMAIN, f"[{piece.lo!r}, {piece.hi!r}] leaves [-beta, beta]")
    signs = forward_signs(p, piece.interval, n)
    if isinstance(signs, NotRegular):
        return signs
    pulled = pull_back_interval(p, core, signs, strict=False)
    tol = EPS_DEDUP * max(1.0, abs(piece.lo), abs(piece.hi))
    if pulled is None or abs(pulled.lo - piece.lo) > tol or abs(pulled.hi - piece.hi) > tol:
        forward = piece.interval
        for _ in range(n):
            y_lo, y_hi = forward.lo ** 2 + p.a, forward.hi ** 2 + p.a
            forward = RealInterval(min(y_lo, y_hi), max(y_lo, y_hi))
        return NotRegular(
            NotRegularReason.IMAGE,
            f"P^{n} maps the piece to [{forward.lo!r}, {forward.hi!r}], not A",
        )
    if pull_back_interval(p, extended_core(core, kappa), signs, strict=True) is None:
        return NotRegular(
            NotRegularReason.EXTENSION,
            f"inverse branch does not extend over the {kappa!r}-enlargement of A",
        )
    return RegularInterval(piece=piece, order=n, is_simple=False, branch_certificate=signs)


def _refine(
    p: ScalarMapParam,
    window: RealInterval,
    targets: Sequence[float],
    order: int,
) -> List[RealInterval]:
    """Order-`order` puzzle pieces tiling an order-(order-1) piece."""
    cuts = preimages_within(p, window, targets, order)
    inner = [c for c in cuts if window.lo + EPS_DEDUP < c < window.hi - EPS_DEDUP]
    return tile([window.lo] + inner + [window.hi])


def _fit_rate(orders: Sequence[int], uncovered: Sequence[float]) -> Optional[float]:
    start = len(orders) // 2
    points = [(n, math.log(u)) for n, u in zip(orders[start:], uncovered[start:]) if u > 0.0]
    if len(points) < 2:
        return None
    xs, ys = zip(*points)
    slope, _ = np.polyfit(np.asarray(xs, dtype=float), np.asarray(ys), 1)
    return float(-slope)


def enumerate_regular(
    p: ScalarMapParam,
    order_cap: int,
    kappa: float = DEFAULT_KAPPA,
    max_pieces: int = DEFAULT_MAX_PIECES,
) -> CoverReport:
    """
    All maximal regular intervals of order <= order_cap inside A.

    Starting from A as the single uncovered order-0 piece, every still-uncovered piece is
    split into its order-n children and each child is tested for regularity. Children that
    pass are maximal, since their parent was not regular; the rest stay uncovered.
    Intervals of order below the critical-point return time M are marked simple.
    Each regular piece keeps its index among the children of the window it was refined from.
    Raises:
        ResourceLimit: if more than max_pieces pieces remain uncovered at some order.
    """
    if order_cap < 1:
        raise ValueError("order_cap must be >= 1")
    fp = fixed_points(p)
    core = fp.core
    targets = (fp.alpha, -fp.alpha)
    return_time = critical_return_time(p, DEFAULT_MAX_STEPS, ReturnConvention.CRITICAL_POINT)
    uncovered: List[RealInterval] = [core]
    regular: List[RegularInterval] = []
    covered = 0.0
    orders: List[int] = []
    measures: List[float] = []
    for n in range(1, order_cap + 1):
        next_uncovered: List[RealInterval] = []
        for window in uncovered:
            for index, child in enumerate(_refine(p, window, targets, n)):
                result = is_regular(p, PuzzlePiece(child, n, index), kappa)
                if isinstance(result, RegularInterval):
                    simple = return_time is not None and n < return_time
                    regular.append(replace(result, is_simple=simple))
                    covered += child.length
                else:
                    next_uncovered.append(child)
        uncovered = next_uncovered
        if len(uncovered) > max_pieces:
            raise ResourceLimit(
                f"{len(uncovered)} uncovered pieces at order {n} exceed the budget of {max_pieces}"
            )
        orders.append(n)
        measures.append(max(0.0, core.length - covered))
        contextual_log('debug', f"🧩 [Cover] order {n}: {len(regular)} regular, {len(uncovered)} uncovered", operation="enumerate_regular", params={"a": p.a, "order": n})
    regular.sort(key=lambda ri: (ri.lo, ri.hi))
    return CoverReport(
        order_cap=order_cap,
        kappa=kappa,
        orders=tuple(orders),
        uncovered_measure=tuple(measures),
        fitted_rate=_fit_rate(orders, measures),
        regular_intervals=tuple(regular),
        uncovered_pieces=tuple(sorted(uncovered)),
        core=core,
        return_time=return_time,
    )


def locate_regular(
    p: ScalarMapParam,
    x: float,
    order_cap: int,
    kappa: float = DEFAULT_KAPPA,
) -> Tuple[Optional[RegularInterval], RealInterval]:
    """
    The maximal regular interval containing x, found by refining only the pieces that contain
    x. Agrees with enumerate_regular(p, order_cap, kappa).interval_containing(x) without
    building the whole cover. When no regular interval of order <= order_cap contains x, the
    uncovered order_cap piece containing x is returned alongside None.
    """
    fp = fixed_points(p)
    targets = (fp.alpha, -fp.alpha)
    window = fp.core
    if not window.contains(x):
        raise ValueError(f"{x!r} lies outside A = [{window.lo!r}, {window.hi!r}]")
    return_time = critical_return_time(p, DEFAULT_MAX_STEPS, ReturnConvention.CRITICAL_POINT)
    for n in range(1, order_cap + 1):
        children = _refine(p, window, targets, n)
        index = next((i for i, child in enumerate(children) if child.contains(x)), len(children) - 1)
        child = children[index]
        result = is_regular(p, PuzzlePiece(child, n, index), kappa)
        if isinstance(result, RegularInterval):
            return replace(result, is_simple=return_time is not None and n < return_time), child
        window = child
    return None, window


def monte_carlo_uncovered(report: CoverReport, samples: int = 1_000_000, rng_seed: int = 0) -> Dict[str, float]:
    """
    Monte-Carlo estimate of the uncovered measure: uniform points in A tested for membership
    in the report's regular intervals.
    """
    rng = np.random.default_rng(rng_seed)
    xs = rng.uniform(report.core.lo, report.core.hi, size=samples)
    los = np.array([ri.lo for ri in report.regular_intervals])
    his = np.array([ri.hi for ri in report.regular_intervals])
    if len(los) == 0:
        fraction = 1.0
    else:
        idx = np.searchsorted(los, xs, side="right") - 1
        inside = (idx >= 0) & (xs <= his[np.clip(idx, 0, None)])
        fraction = 1.0 - float(np.mean(inside))
    estimate = fraction * report.core.length
    stderr = report.core.length * math.sqrt(max(fraction * (1.0 - fraction), 0.0) / samples)
    return {"estimate": estimate, "stderr": stderr, "samples": samples, "seed": rng_seed}


def distortion_ratio(p: ScalarMapParam, interval: RealInterval, order: int, samples: int = 257) -> float:
    """
    sup |DP^n| / inf |DP^n| over a uniform sample of the interval.
    """
    xs = np.linspace(interval.lo, interval.hi, samples)
    logs = np.zeros_like(xs)
    with np.errstate(divide="ignore"):
        for _ in range(order):
            logs += np.log(np.abs(2.0 * xs))
            xs = xs * xs + p.a
    return float(np.exp(np.max(logs) - np.min(logs)))


def simple_intervals(
    p: ScalarMapParam,
    kappa: float = DEFAULT_KAPPA,
) -> Tuple[List[RegularInterval], RealInterval]:
    """
    The regular intervals of order < M covering A minus a central gap around 0.
    Raises:
        ReturnTimeNotFound: if the critical point never returns to A.
        GapNotCentral: if the uncovered set is not a single interval containing 0.
    """
    return_time = critical_return_time(p, DEFAULT_MAX_STEPS, ReturnConvention.CRITICAL_POINT)
    if return_time is None:
        raise ReturnTimeNotFound(f"critical point of a={p.a!r} does not return to A")
    core = fixed_points(p).core
    if return_time - 1 < 1:
        return [], core
    report = enumerate_regular(p, return_time - 1, kappa)
    gaps = merge_adjacent(report.uncovered_pieces, EPS_DEDUP)
    if len(gaps) != 1 or not gaps[0].contains(0.0):
        raise GapNotCentral(
            f"uncovered set at order {return_time - 1} is {[g.to_list() for g in gaps]}"
        )
    return list(report.regular_intervals), gaps[0]
