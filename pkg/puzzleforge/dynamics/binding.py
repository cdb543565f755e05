"""
binding.py

Binding bookkeeping for the critical orbit of P_a near a = -2. Returns of P_a^N(a) close to 0
shadow the early critical orbit for a binding period; the total bound time must stay a small
fraction of elapsed time, and returns deeper than an exponential cutoff exclude the parameter.
run_selection applies these rules on a sampled parameter window and groups the survivors into
windows sharing one binding schedule.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from puzzleforge.constants import (
    DEFAULT_ALPHA_BA,
    DEFAULT_ALPHA_FRAC,
    DEFAULT_DELTA,
    DEFAULT_ELL_MIN_FRACTION,
    P2_PROXY_NOTE,
)
from puzzleforge.dynamics.intervals import RealInterval
from puzzleforge.dynamics.scalar import ScalarMapParam, fixed_points
from puzzleforge.errors import BindingOverflow, CriticalHit
from puzzleforge.sweep import run_pool
from puzzleforge.utils.logging import contextual_log

CASE_FREE = "a"
CASE_BOUND = "b"
CASE_DEEP = "c"
# Floor on 4 - x**2 in the adapted metric; only reached at a = -2 where beta = 2.
ADAPTED_CLIP = 1e-12


@dataclass(frozen=True)
class BindingKnobs:
    delta: float = DEFAULT_DELTA
    delta_sep: Optional[float] = None
    alpha_frac: float = DEFAULT_ALPHA_FRAC
    alpha_ba: float = DEFAULT_ALPHA_BA
    ell_min: Optional[float] = None
    max_k: int = 100

    @property
    def separation(self) -> float:
        return self.delta_sep if self.delta_sep is not None else self.delta / 2.0

    def curve_floor(self, p: ScalarMapParam) -> float:
        if self.ell_min is not None:
            return self.ell_min
        return DEFAULT_ELL_MIN_FRACTION * fixed_points(p).core.length

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass(frozen=True)
class ReturnRecord:
    N: int
    depth: float
    binding_time: int
    case: str


@dataclass(frozen=True)
class BindingLedger:
    """
    Returns of the critical orbit up to n_max. total_bound_time_before maps each recorded return
    time to the bound time accumulated before it. derivatives[t] is d/da P_a^t(a).
    """
    a: float
    n_max: int
    returns: Tuple[ReturnRecord, ...]
    total_bound_time_before: Dict[int, int]
    excluded_at: Optional[Tuple[int, str]]
    derivatives: Tuple[float, ...] = field(repr=False, compare=False, default=())

    @property
    def survived(self) -> bool:
        return self.excluded_at is None

    @property
    def schedule(self) -> Tuple[Tuple[int, int], ...]:
        """Binding periods as (N, k), the (P2) comparison key."""
        return tuple((r.N, r.binding_time) for r in self.returns if r.case == CASE_BOUND)

    @property
    def free_time(self) -> int:
        """First time >= n_max that is not inside a binding period."""
        end = max((r.N + r.binding_time + 1 for r in self.returns if r.case == CASE_BOUND), default=0)
        return max(self.n_max, end)

    def to_dict(self) -> Dict:
        return {
            "a": self.a,
            "n_max": self.n_max,
            "returns": [asdict(r) for r in self.returns],
            "excluded_at": list(self.excluded_at) if self.excluded_at else None,
        }


@dataclass(frozen=True)
class ExpansionEstimate:
    lambda_estimate: float
    degenerate: bool
    points_used: int
    metric: str


@dataclass(frozen=True)
class ColletEckmannEstimate:
    rate: float
    tail_min: float
    n: int


@dataclass(frozen=True)
class CriticalCurveWindow:
    """
    A run of consecutive sampled cells sharing one binding history up to the free time N.
    merged_cells counts cells of short neighbouring runs absorbed at the end of selection.
    """
    param_interval: RealInterval
    N: int
    endpoint_images: Tuple[float, float]
    history: Tuple[Tuple[int, int], ...]
    curve_length: float
    cells: int
    merged_cells: int = 0

    def to_dict(self) -> Dict:
        return {
            "window": self.param_interval.to_list(),
            "N": self.N,
            "endpoint_images": list(self.endpoint_images),
            "schedule": [list(s) for s in self.history],
            "curve_length": self.curve_length,
            "cells": self.cells,
            "merged_cells": self.merged_cells,
        }


@dataclass(frozen=True)
class SelectionReport:
    window: RealInterval
    n_max: int
    knobs: BindingKnobs
    grid: int
    survivor_measure: float
    sampled_survivor_measure: float
    per_n_survivor_measure: Tuple[float, ...]
    exclusions: Dict[str, int]
    windows: Tuple[CriticalCurveWindow, ...]
    trimmed: Dict[str, float]
    survivors: Tuple[float, ...]
    step_exclusions: Tuple[Tuple[int, str, float], ...] = ()
    notes: Tuple[str, ...] = (P2_PROXY_NOTE,)

    def to_dict(self) -> Dict:
        return {
            "window": self.window.to_list(),
            "n_max": self.n_max,
            "knobs": self.knobs.to_dict(),
            "grid": self.grid,
            "survivor_measure": self.survivor_measure,
            "sampled_survivor_measure": self.sampled_survivor_measure,
            "per_n_survivor_measure": list(self.per_n_survivor_measure),
            "exclusions": dict(sorted(self.exclusions.items())),
            "step_exclusions": [{"N": N, "reason": reason, "measure": m} for N, reason, m in self.step_exclusions],
            "windows": [w.to_dict() for w in self.windows],
            "trimmed": dict(sorted(self.trimmed.items())),
            "notes": list(self.notes),
        }

    def csv_rows(self) -> List[Dict]:
        rows = []
        for w in self.windows:
            rows.append({
                "lo": w.param_interval.lo,
                "hi": w.param_interval.hi,
                "N": w.N,
                "bindings": len(w.history),
                "curve_length": w.curve_length,
                "image_lo": w.endpoint_images[0],
                "image_hi": w.endpoint_images[1],
                "merged_cells": w.merged_cells,
            })
        return rows


def critical_value_orbit(p: ScalarMapParam, n: int) -> Tuple[List[float], List[float]]:
    """x_t = P_a^t(a) for t = 0..n and d_t = d/da x_t (d_0 = 1, d_{t+1} = 2 x_t d_t + 1)."""
    xs = [p.a]
    ds = [1.0]
    x, d = p.a, 1.0
    for _ in range(n):
        x, d = x * x + p.a, 2.0 * x * d + 1.0
        xs.append(x)
        ds.append(d)
    return xs, ds


def _bound_length(xs: Sequence[float], N: int, delta_sep: float, max_k: int) -> int:
    # P_a^i(0) = x_{i-1}
    for i in range(1, max_k + 1):
        if abs(xs[N + i] - xs[i - 1]) > delta_sep:
            return i - 1
    raise BindingOverflow(f"orbit from time {N} still within {delta_sep!r} of the critical orbit after {max_k} steps")


def binding_time(
    p: ScalarMapParam,
    N: int,
    delta_sep: float,
    max_k: int = 100,
    delta: float = DEFAULT_DELTA,
    alpha_ba: float = DEFAULT_ALPHA_BA,
    orbit: Optional[Sequence[float]] = None,
) -> Tuple[int, str]:
    """
    Classify the return at time N and measure its binding period.

    Case a: |x_N| >= delta, no binding. Case c: |x_N| < exp(-alpha_ba * N), k = 0. Case b:
    k is the largest i <= max_k such that |x_{N+j} - P_a^j(0)| <= delta_sep for all j <= i.
    Raises:
        BindingOverflow: if the orbits are still close after max_k steps.
    """
    xs = orbit if orbit is not None else critical_value_orbit(p, N + max_k + 1)[0]
    x = xs[N]
    if abs(x) >= delta:
        return 0, CASE_FREE
    if abs(x) < math.exp(-alpha_ba * N):
        return 0, CASE_DEEP
    return _bound_length(xs, N, delta_sep, max_k), CASE_BOUND


def build_ledger(p: ScalarMapParam, n_max: int, knobs: BindingKnobs = BindingKnobs()) -> BindingLedger:
    """
    Walk the free times 0..n_max: free steps advance by one, bound returns jump past their binding
    period after the (H) check at its end, deep returns and overflows exclude the parameter.
    """
    xs, ds = critical_value_orbit(p, n_max + knobs.max_k + 2)
    returns: List[ReturnRecord] = []
    before: Dict[int, int] = {}
    bound = 0
    excluded: Optional[Tuple[int, str]] = None
    t = 0
    while t <= n_max:
        try:
            k, case = binding_time(p, t, knobs.separation, knobs.max_k, knobs.delta, knobs.alpha_ba, orbit=xs)
        except BindingOverflow:
            returns.append(ReturnRecord(t, abs(xs[t]), knobs.max_k, CASE_BOUND))
            before[t] = bound
            excluded = (t, "binding_overflow")
            break
        if case == CASE_FREE:
            t += 1
            continue
        returns.append(ReturnRecord(t, abs(xs[t]), k, case))
        before[t] = bound
        if case == CASE_DEEP:
            excluded = (t, "case_c")
            break
        if bound + k > knobs.alpha_frac * (t + k):
            excluded = (t, "H")
            break
        bound += k
        t += k + 1
    return BindingLedger(
        a=p.a,
        n_max=n_max,
        returns=tuple(returns),
        total_bound_time_before=before,
        excluded_at=excluded,
        derivatives=tuple(ds),
    )


def bound_time_through(ledger: BindingLedger, N: int) -> int:
    """Number of bound times <= N."""
    return sum(
        min(r.binding_time, max(0, N - r.N))
        for r in ledger.returns
        if r.case == CASE_BOUND
    )


def check_H(ledger: BindingLedger, N: int, alpha_frac: float) -> bool:
    """Pass iff the bound time up to N is at most alpha_frac * N."""
    return bound_time_through(ledger, N) <= alpha_frac * N


def collet_eckmann_estimate(p: ScalarMapParam, n: int) -> ColletEckmannEstimate:
    """
    (1/n) log|DP_a^n(a)| along the critical-value orbit and its minimum over m in [n/2, n].
    Raises:
        CriticalHit: if one of the first n orbit points is exactly 0.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    xs, _ = critical_value_orbit(p, n - 1)
    for t, x in enumerate(xs):
        if x == 0.0:
            raise CriticalHit(f"critical value orbit of a={p.a!r} hits 0 at time {t}")
    logs = [math.log(abs(2.0 * x)) for x in xs]
    partial = list(itertools.accumulate(logs))
    start = math.ceil(n / 2)
    tail = min(partial[m - 1] / m for m in range(max(start, 1), n + 1))
    return ColletEckmannEstimate(rate=math.fsum(logs) / n, tail_min=tail, n=n)


def _density_weight(x: np.ndarray) -> np.ndarray:
    return 1.0 / np.sqrt(np.maximum(4.0 - x * x, ADAPTED_CLIP))


def expansion_outside(
    p: ScalarMapParam,
    delta: float,
    n: int,
    metric: str = "adapted",
    grid: int = 4001,
) -> ExpansionEstimate:
    """
    Per-step expansion of P_a^n over grid points of [-beta, beta] whose first n iterates stay
    outside [-delta, delta], measured in the metric with density 1/sqrt(4 - x**2) (or the flat
    metric). Degenerate when the window swallows A or leaves no points.
    """
    if delta <= 0.0:
        raise ValueError("delta must be > 0")
    if metric not in ("adapted", "flat"):
        raise ValueError(f"unknown metric {metric!r}")
    fp = fixed_points(p)
    if delta >= -fp.alpha:
        return ExpansionEstimate(math.nan, True, 0, metric)
    x0 = np.linspace(-fp.beta, fp.beta, grid)
    x = x0.copy()
    keep = np.ones_like(x0, dtype=bool)
    log_derivative = np.zeros_like(x0)
    with np.errstate(divide="ignore"):
        for _ in range(n):
            keep &= np.abs(x) >= delta
            log_derivative += np.log(np.abs(2.0 * x))
            x = x * x + p.a
    if not keep.any():
        return ExpansionEstimate(math.nan, True, 0, metric)
    if metric == "adapted":
        log_derivative += np.log(_density_weight(x)) - np.log(_density_weight(x0))
    rates = log_derivative[keep] / n
    return ExpansionEstimate(float(np.exp(rates.min())), False, int(keep.sum()), metric)


def _ledger_task(args: Tuple[float, int, BindingKnobs]) -> BindingLedger:
    a, n_max, knobs = args
    return build_ledger(ScalarMapParam(a), n_max, knobs)


def _image_at(a: float, N: int) -> float:
    x = a
    for _ in range(N):
        x = x * x + a
    return x


@dataclass
class CurveRun:
    """Worklist item: consecutive cells first..last whose ledgers agree up to the free time N."""
    first: int
    last: int
    N: int
    history: Tuple[Tuple[int, int], ...] = ()
    absorbed: List[Tuple[int, int]] = field(default_factory=list)

    @property
    def cells(self) -> range:
        return range(self.first, self.last + 1)


def _event_at(ledger: BindingLedger, returns_at: Dict[int, ReturnRecord], N: int) -> Tuple[str, object]:
    if ledger.excluded_at is not None and ledger.excluded_at[0] == N:
        return "excluded", ledger.excluded_at[1]
    record = returns_at.get(N)
    if record is not None:
        return CASE_BOUND, record.binding_time
    return CASE_FREE, 0


def _split_run(
    run: CurveRun,
    ledgers: Sequence[BindingLedger],
    returns_at: Sequence[Dict[int, ReturnRecord]],
    excluded: Counter,
) -> List[CurveRun]:
    """
    One superstep: split the run where the cells' events at N differ, drop excluded cells, and
    advance free pieces to N + 1 and bound pieces past their binding period.
    """
    children: List[Tuple[Tuple[str, object], int, int]] = []
    for i in run.cells:
        kind, value = _event_at(ledgers[i], returns_at[i], run.N)
        if kind == "excluded":
            excluded[(run.N, value)] += 1
            continue
        if children and children[-1][0] == (kind, value) and children[-1][2] == i - 1:
            children[-1] = (children[-1][0], children[-1][1], i)
        else:
            children.append(((kind, value), i, i))
    advanced = []
    for (kind, k), first, last in children:
        if kind == CASE_FREE:
            advanced.append(CurveRun(first, last, run.N + 1, run.history))
        else:
            advanced.append(CurveRun(first, last, run.N + k + 1, run.history + ((run.N, k),)))
    return advanced


def merge_short_runs(
    runs: Sequence[CurveRun],
    lengths: Sequence[float],
    ell_min: float,
) -> Tuple[List[CurveRun], List[CurveRun]]:
    """
    Split sorted runs into hosts (curve length >= ell_min) and trimmed runs. A short run that
    touches a host, on the left by preference, is recorded in that host's absorbed cells instead
    of being trimmed. Returns (hosts, trimmed), both sorted by first cell.
    """
    hosts = [run for run, length in zip(runs, lengths) if length >= ell_min]
    by_first = {run.first: run for run in hosts}
    by_last = {run.last: run for run in hosts}
    trimmed = []
    for run, length in zip(runs, lengths):
        if length >= ell_min:
            continue
        host = by_last.get(run.first - 1)
        if host is None:
            host = by_first.get(run.last + 1)
        if host is None:
            trimmed.append(run)
        else:
            host.absorbed.append((run.first, run.last))
    return hosts, trimmed


def _replays_schedule(a: float, n_max: int, knobs: BindingKnobs, history: Tuple) -> bool:
    ledger = build_ledger(ScalarMapParam(a), n_max, knobs)
    return ledger.survived and ledger.schedule == history


def run_selection(
    window: RealInterval,
    n_max: int,
    knobs: BindingKnobs = BindingKnobs(),
    grid: int = 2048,
    workers: int = 1,
) -> SelectionReport:
    """
    Parameter selection on a deterministic grid of cell centres.

    The window starts as one worklist item at N = 0. Each superstep splits every item at the
    cells' events at its current free time: excluded cells (deep return, overflow, failed H)
    are dropped, free pieces advance one step, bound pieces jump past their binding period.
    Items past n_max are candidate critical-curve windows. A candidate passes (P2) when the
    ledgers replayed at its first, middle and last cell centres survive with its schedule.
    A candidate whose curve length sum |d/da P_a^N(a)| * cell falls below ell_min is merged
    into an adjacent emitted window, or trimmed when it has none.
    """
    if grid < 1:
        raise ValueError("grid must be >= 1")
    cell = window.length / grid
    centers = [window.lo + (i + 0.5) * cell for i in range(grid)]
    ledgers = run_pool(_ledger_task, [(a, n_max, knobs) for a in centers], workers)
    returns_at = [{r.N: r for r in ledger.returns} for ledger in ledgers]

    per_n = []
    for N in range(n_max + 1):
        alive = sum(1 for l in ledgers if l.excluded_at is None or l.excluded_at[0] > N)
        per_n.append(alive * cell)

    excluded: Counter = Counter()
    worklist = [CurveRun(0, grid - 1, 0)]
    finished: List[CurveRun] = []
    supersteps = 0
    while worklist:
        supersteps += 1
        pending: List[CurveRun] = []
        for run in worklist:
            if run.N > n_max:
                finished.append(run)
            else:
                pending.extend(_split_run(run, ledgers, returns_at, excluded))
        worklist = pending
    finished.sort(key=lambda run: run.first)

    trimmed = {"p2_windows": 0, "p2_measure": 0.0, "p3_windows": 0, "p3_measure": 0.0, "merged_windows": 0, "merged_measure": 0.0}
    kept: List[CurveRun] = []
    for run in finished:
        replay_at = (centers[run.first], centers[(run.first + run.last) // 2], centers[run.last])
        if all(_replays_schedule(a, n_max, knobs, run.history) for a in dict.fromkeys(replay_at)):
            kept.append(run)
        else:
            trimmed["p2_windows"] += 1
            trimmed["p2_measure"] += len(run.cells) * cell

    def length_at(cells, N: int) -> float:
        return math.fsum(abs(ledgers[i].derivatives[N]) * cell for i in cells)

    ell_min = knobs.curve_floor(ScalarMapParam(window.midpoint))
    hosts, short = merge_short_runs(kept, [length_at(run.cells, run.N) for run in kept], ell_min)
    for run in short:
        trimmed["p3_windows"] += 1
        trimmed["p3_measure"] += len(run.cells) * cell
    for host in hosts:
        for lo, hi in host.absorbed:
            trimmed["merged_windows"] += 1
            trimmed["merged_measure"] += (hi - lo + 1) * cell

    windows: List[CriticalCurveWindow] = []
    for run in hosts:
        first = min([run.first] + [lo for lo, _ in run.absorbed])
        last = max([run.last] + [hi for _, hi in run.absorbed])
        lo = window.lo + first * cell
        hi = window.lo + (last + 1) * cell
        windows.append(CriticalCurveWindow(
            param_interval=RealInterval(lo, hi),
            N=run.N,
            endpoint_images=(_image_at(lo, run.N), _image_at(hi, run.N)),
            history=run.history,
            curve_length=length_at(range(first, last + 1), run.N),
            cells=len(run.cells),
            merged_cells=(last - first + 1) - len(run.cells),
        ))

    survivors = tuple(l.a for l in ledgers if l.survived)
    step_exclusions = tuple((N, reason, count * cell) for (N, reason), count in sorted(excluded.items()))
    contextual_log('debug', f"🧩 [Selection] {len(survivors)}/{grid} sampled survivors, {len(windows)} windows after {supersteps} supersteps", operation="run_selection", params={"window": window.to_list(), "n_max": n_max})
    return SelectionReport(
        window=window,
        n_max=n_max,
        knobs=knobs,
        grid=grid,
        survivor_measure=math.fsum(w.param_interval.length for w in windows),
        sampled_survivor_measure=len(survivors) * cell,
        per_n_survivor_measure=tuple(per_n),
        exclusions=dict(Counter(l.excluded_at[1] for l in ledgers if l.excluded_at)),
        windows=tuple(windows),
        trimmed=trimmed,
        survivors=survivors,
        step_exclusions=step_exclusions,
    )
