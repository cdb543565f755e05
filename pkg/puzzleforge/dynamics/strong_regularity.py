"""
strong_regularity.py

Critical-value itineraries through regular intervals and the tests built on them: every return
of the critical orbit to A must land in a regular interval, and the non-simple returns must carry
a small share of the total time. Parameters are classified one by one, and parameter windows are
split into parapuzzle pieces on which a prefix of the itinerary is constant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Hashable, List, Optional, Sequence, Tuple, Union

from puzzleforge.constants import (
    DEFAULT_DEPTH,
    DEFAULT_KAPPA,
    DEFAULT_MAX_STEPS,
    DEFAULT_ORDER_CAP,
    DEFAULT_THETA,
    EPS_PARAM,
)
from puzzleforge.dynamics.intervals import RealInterval
from puzzleforge.dynamics.regular_cover import CoverReport, RegularInterval, locate_regular
from puzzleforge.dynamics.scalar import (
    ReturnConvention,
    ScalarMapParam,
    critical_return_time,
    fixed_points,
)
from puzzleforge.errors import ResourceLimit
from puzzleforge.sweep import run_pool
from puzzleforge.utils.logging import contextual_log


class BlockedReason(str, Enum):
    CENTRAL_GAP = "central_gap"
    UNCOVERED = "uncovered"
    OUTSIDE_A = "outside_a"


@dataclass(frozen=True)
class Blocked:
    reason: BlockedReason
    point: float
    time: int


class Verdict(str, Enum):
    STRONGLY_REGULAR_CANDIDATE = "strongly_regular_candidate"
    EXCLUDED = "excluded"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class ItineraryEntry:
    interval: RegularInterval
    order: int


@dataclass(frozen=True)
class Itinerary:
    """
    Returns of the critical value to A, starting at time M. cumulative_orders[j] is the time at
    which entries[j] is visited; point is P_a^time(a) for the next, not yet recorded, return.
    """
    return_time: int
    entries: Tuple[ItineraryEntry, ...]
    cumulative_orders: Tuple[int, ...]
    nonsimple_order_sum: Tuple[int, ...]
    time: int
    point: float

    @classmethod
    def start(cls, p: ScalarMapParam, return_time: int) -> "Itinerary":
        x = p.a
        for _ in range(return_time):
            x = x * x + p.a
        return cls(return_time, (), (), (), return_time, x)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def orders(self) -> Tuple[int, ...]:
        return tuple(entry.order for entry in self.entries)

    def symbols(self, depth: Optional[int] = None) -> Tuple[Tuple[int, Tuple[int, ...]], ...]:
        """(order, branch certificate) per entry: the combinatorial content of the itinerary."""
        entries = self.entries if depth is None else self.entries[:depth]
        return tuple((e.order, e.interval.branch_certificate) for e in entries)

    def appended(self, p: ScalarMapParam, interval: RegularInterval) -> "Itinerary":
        x = self.point
        for _ in range(interval.order):
            x = x * x + p.a
        nonsimple = (self.nonsimple_order_sum[-1] if self.nonsimple_order_sum else 0)
        if not interval.is_simple:
            nonsimple += interval.order
        return Itinerary(
            return_time=self.return_time,
            entries=self.entries + (ItineraryEntry(interval, interval.order),),
            cumulative_orders=self.cumulative_orders + (self.time,),
            nonsimple_order_sum=self.nonsimple_order_sum + (nonsimple,),
            time=self.time + interval.order,
            point=x,
        )


@dataclass(frozen=True)
class DiamondCheck:
    passed: bool
    margin: float
    failed_at: Optional[int] = None


@dataclass(frozen=True)
class ClassificationResult:
    a: float
    verdict: Verdict
    depth_reached: int
    diamond_margin: float
    return_time: Optional[int] = None
    reason: Optional[str] = None
    step: Optional[int] = None

    def to_row(self) -> Dict:
        return {
            "a": self.a,
            "verdict": self.verdict.value,
            "depth": self.depth_reached,
            "margin": self.diamond_margin,
            "M": self.return_time,
            "reason": self.reason or "",
            "step": self.step if self.step is not None else "",
        }


@dataclass(frozen=True)
class ParapuzzleWindow:
    param_interval: RealInterval
    shared_prefix: Tuple
    determined: bool = True
    children: Tuple["ParapuzzleWindow", ...] = field(default=())

    def to_dict(self) -> Dict:
        return {
            "window": self.param_interval.to_list(),
            "prefix": [[order, list(cert)] for order, cert in self.shared_prefix],
            "determined": self.determined,
            "children": [child.to_dict() for child in self.children],
        }


def _in_central_piece(piece: RealInterval) -> bool:
    return piece.contains(0.0)


def extend_itinerary(
    p: ScalarMapParam,
    it: Itinerary,
    cover: CoverReport,
) -> Union[Itinerary, Blocked]:
    """
    Append the maximal regular interval of the cover containing the current critical-orbit point.
    """
    x = it.point
    if not cover.core.contains(x):
        return Blocked(BlockedReason.OUTSIDE_A, x, it.time)
    interval = cover.interval_containing(x)
    if interval is not None:
        return it.appended(p, interval)
    piece = cover.uncovered_containing(x)
    if piece is not None and _in_central_piece(piece):
        return Blocked(BlockedReason.CENTRAL_GAP, x, it.time)
    return Blocked(BlockedReason.UNCOVERED, x, it.time)


def _extend_local(
    p: ScalarMapParam,
    it: Itinerary,
    core: RealInterval,
    order_cap: int,
    kappa: float,
) -> Union[Itinerary, Blocked]:
    x = it.point
    if not core.contains(x):
        return Blocked(BlockedReason.OUTSIDE_A, x, it.time)
    interval, piece = locate_regular(p, x, order_cap, kappa)
    if interval is not None:
        return it.appended(p, interval)
    if _in_central_piece(piece):
        return Blocked(BlockedReason.CENTRAL_GAP, x, it.time)
    return Blocked(BlockedReason.UNCOVERED, x, it.time)


def critical_itinerary(
    p: ScalarMapParam,
    depth: int = DEFAULT_DEPTH,
    order_cap: int = DEFAULT_ORDER_CAP,
    kappa: float = DEFAULT_KAPPA,
    cover: Optional[CoverReport] = None,
) -> Tuple[Optional[Itinerary], Optional[Blocked]]:
    """
    Build the itinerary up to depth entries. Without a cover, each return is resolved by local
    refinement around the point, which agrees with a full cover of the same order_cap.
    Returns (None, None) when the critical point never returns to A.
    """
    return_time = critical_return_time(p, DEFAULT_MAX_STEPS, ReturnConvention.CRITICAL_VALUE)
    if return_time is None:
        return None, None
    core = fixed_points(p).core
    it = Itinerary.start(p, return_time)
    for _ in range(depth):
        step = extend_itinerary(p, it, cover) if cover is not None else _extend_local(p, it, core, order_cap, kappa)
        if isinstance(step, Blocked):
            return it, step
        it = step
    return it, None


def _diamond_ratios(orders: Sequence[int], nonsimple_sums: Sequence[int]) -> List[float]:
    ratios = []
    total = 0
    for n, nonsimple in zip(orders, nonsimple_sums):
        total += n
        ratios.append(nonsimple / total)
    return ratios


def check_diamond(it: Itinerary, theta: float = DEFAULT_THETA) -> DiamondCheck:
    """
    Pass iff, for every prefix, the orders of non-simple entries sum to at most theta times all
    orders so far. margin is the largest prefix ratio; failed_at is the 1-based entry index.
    """
    if len(it) == 0:
        raise ValueError("check_diamond needs a nonempty itinerary")
    ratios = _diamond_ratios(it.orders, it.nonsimple_order_sum)
    failed_at = next((j + 1 for j, r in enumerate(ratios) if r > theta), None)
    return DiamondCheck(passed=failed_at is None, margin=max(ratios), failed_at=failed_at)


def classify_parameter(
    p: ScalarMapParam,
    depth: int = DEFAULT_DEPTH,
    theta: float = DEFAULT_THETA,
    order_cap: int = DEFAULT_ORDER_CAP,
    kappa: float = DEFAULT_KAPPA,
) -> ClassificationResult:
    """
    Follow the critical itinerary for up to depth returns.

    Excluded when a return falls into the central piece (a deep return) or the non-simple share
    exceeds theta; Undetermined when the orbit lands in uncovered dust beyond order_cap, leaves
    A through rounding, or never returns; otherwise a strongly regular candidate.
    """
    return_time = critical_return_time(p, DEFAULT_MAX_STEPS, ReturnConvention.CRITICAL_VALUE)
    if return_time is None or depth == 0:
        return ClassificationResult(p.a, Verdict.UNDETERMINED, 0, 0.0, return_time, "no_return" if return_time is None else None)
    core = fixed_points(p).core
    it = Itinerary.start(p, return_time)
    margin = 0.0
    total = 0
    for step in range(1, depth + 1):
        nxt = _extend_local(p, it, core, order_cap, kappa)
        if isinstance(nxt, Blocked):
            verdict = Verdict.EXCLUDED if nxt.reason == BlockedReason.CENTRAL_GAP else Verdict.UNDETERMINED
            return ClassificationResult(p.a, verdict, len(it), margin, return_time, nxt.reason.value, step)
        it = nxt
        total += it.entries[-1].order
        margin = max(margin, it.nonsimple_order_sum[-1] / total)
        if margin > theta:
            return ClassificationResult(p.a, Verdict.EXCLUDED, len(it), margin, return_time, "diamond", step)
    return ClassificationResult(p.a, Verdict.STRONGLY_REGULAR_CANDIDATE, len(it), margin, return_time)


def _classify_task(args: Tuple[float, int, float, int, float]) -> ClassificationResult:
    a, depth, theta, order_cap, kappa = args
    return classify_parameter(ScalarMapParam(a), depth, theta, order_cap, kappa)


def classify_grid(
    params: Sequence[float],
    depth: int = DEFAULT_DEPTH,
    theta: float = DEFAULT_THETA,
    order_cap: int = DEFAULT_ORDER_CAP,
    kappa: float = DEFAULT_KAPPA,
    workers: int = 1,
) -> List[ClassificationResult]:
    """Classify many parameters; rows come back sorted by a."""
    tasks = [(float(a), depth, theta, order_cap, kappa) for a in sorted(params)]
    return run_pool(_classify_task, tasks, workers)


def itinerary_signature(
    p: ScalarMapParam,
    prefix_depth: int,
    order_cap: int = DEFAULT_ORDER_CAP,
    kappa: float = DEFAULT_KAPPA,
) -> Optional[Hashable]:
    """
    The combinatorial prefix used to compare parameters: return time, the first prefix_depth
    symbols and, if the itinerary stops earlier, the reason it stopped. None when undecidable.
    """
    it, blocked = critical_itinerary(p, prefix_depth, order_cap, kappa)
    if it is None:
        return None
    marker = None
    if blocked is not None:
        if blocked.reason != BlockedReason.CENTRAL_GAP:
            return None
        marker = (blocked.reason.value, len(it))
    return (it.return_time, it.symbols(prefix_depth), marker)


def parapuzzle_decompose(
    window: RealInterval,
    prefix_depth: int,
    order_cap: int = DEFAULT_ORDER_CAP,
    kappa: float = DEFAULT_KAPPA,
    eps_param: float = EPS_PARAM,
    max_evaluations: int = 100_000,
) -> List[ParapuzzleWindow]:
    """
    Split a parameter window into maximal pieces on which the first prefix_depth itinerary
    symbols agree, by adaptive bisection. A piece is accepted when its endpoints and midpoint
    share a signature; pieces narrower than eps_param without agreement are returned as
    undetermined slivers. The result tiles the window.
    Raises:
        ResourceLimit: if more than max_evaluations signatures would be computed.
    """
    if prefix_depth == 0:
        return [ParapuzzleWindow(window, ())]
    memo: Dict[float, Optional[Hashable]] = {}

    def signature(a: float) -> Optional[Hashable]:
        if a not in memo:
            if len(memo) >= max_evaluations:
                raise ResourceLimit(f"parapuzzle decomposition exceeded {max_evaluations} evaluations")
            memo[a] = itinerary_signature(ScalarMapParam(a), prefix_depth, order_cap, kappa)
        return memo[a]

    accepted: List[Tuple[RealInterval, Optional[Hashable]]] = []
    stack = [window]
    while stack:
        iv = stack.pop()
        mid = iv.midpoint
        s_lo, s_mid, s_hi = signature(iv.lo), signature(mid), signature(iv.hi)
        if s_lo is not None and s_lo == s_mid == s_hi:
            accepted.append((iv, s_lo))
        elif iv.length <= eps_param or not (iv.lo < mid < iv.hi):
            accepted.append((iv, None))
        else:
            # Right half first so the left half is popped next: left-to-right output.
            stack.append(RealInterval(mid, iv.hi))
            stack.append(RealInterval(iv.lo, mid))
    merged: List[Tuple[RealInterval, Optional[Hashable]]] = []
    for iv, sig in accepted:
        if merged and merged[-1][1] == sig:
            last, _ = merged[-1]
            merged[-1] = (RealInterval(last.lo, iv.hi), sig)
        else:
            merged.append((iv, sig))
    contextual_log('debug', f"🧩 [Parapuzzle] depth {prefix_depth}: {len(merged)} windows from {len(memo)} evaluations", operation="parapuzzle_decompose", params={"window": window.to_list(), "prefix_depth": prefix_depth})
    return [
        ParapuzzleWindow(iv, sig[1] if sig is not None else (), determined=sig is not None)
        for iv, sig in merged
    ]


def parapuzzle_tree(
    window: RealInterval,
    max_depth: int,
    order_cap: int = DEFAULT_ORDER_CAP,
    kappa: float = DEFAULT_KAPPA,
    eps_param: float = EPS_PARAM,
) -> ParapuzzleWindow:
    """
    Nested decompositions at prefix depths 0..max_depth; the children of a depth-k window are
    its depth-(k+1) pieces.
    """
    def build(iv: RealInterval, prefix: Tuple, depth: int, determined: bool) -> ParapuzzleWindow:
        if depth >= max_depth or not determined:
            return ParapuzzleWindow(iv, prefix, determined)
        children = tuple(
            build(child.param_interval, child.shared_prefix, depth + 1, child.determined)
            for child in parapuzzle_decompose(iv, depth + 1, order_cap, kappa, eps_param)
        )
        return ParapuzzleWindow(iv, prefix, determined, children)

    return build(window, (), 0, True)


def survivor_fraction_trend(
    epsilons: Sequence[float] = (1e-3, 1e-4, 1e-5),
    samples: int = 1000,
    depth: int = DEFAULT_DEPTH,
    theta: float = DEFAULT_THETA,
    order_cap: int = DEFAULT_ORDER_CAP,
    kappa: float = DEFAULT_KAPPA,
    workers: int = 1,
) -> List[Dict[str, float]]:
    """
    Candidate fraction on [-2 + eps/10, -2 + eps] for each eps, sampled at cell centers.
    Reported, not asserted: the fraction is expected to grow as eps shrinks.
    """
    trend = []
    for eps in epsilons:
        lo, hi = -2.0 + eps / 10.0, -2.0 + eps
        width = (hi - lo) / samples
        grid = [lo + (i + 0.5) * width for i in range(samples)]
        results = classify_grid(grid, depth, theta, order_cap, kappa, workers)
        candidates = sum(r.verdict == Verdict.STRONGLY_REGULAR_CANDIDATE for r in results)
        excluded = sum(r.verdict == Verdict.EXCLUDED for r in results)
        trend.append({
            "epsilon": eps,
            "samples": samples,
            "candidates": candidates,
            "excluded": excluded,
            "undetermined": samples - candidates - excluded,
            "fraction": candidates / samples if samples else math.nan,
        })
    return trend
