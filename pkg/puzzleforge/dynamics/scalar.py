"""
scalar.py

Evaluation of the quadratic family P_a(x) = x**2 + a: map values, fixed points, the invariant
core, orbits with running log-derivatives and the return time of the critical point to
A = [alpha, -alpha]. All functions are pure and safe to call from any worker.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import mpmath
import numpy as np

from puzzleforge.constants import DEFAULT_MAX_STEPS, EPS_FIX
from puzzleforge.dynamics.intervals import RealInterval
from puzzleforge.errors import NoRealFixedPoints, NotInvariant

A_MIN = -2.0
A_MAX = 0.25
# Radicands in (-SQRT_CLAMP, 0) are rounding noise at the critical value and are clamped to 0.
SQRT_CLAMP = 1e-12


@dataclass(frozen=True)
class ScalarMapParam:
    """
    The parameter a of P_a(x) = x**2 + a, restricted to [-2, 1/4] where real fixed points exist.
    """
    a: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.a):
            raise ValueError(f"parameter must be finite, got {self.a!r}")
        if self.a > A_MAX:
            raise NoRealFixedPoints(f"a={self.a!r} > 1/4: 1 - 4a < 0")
        if self.a < A_MIN:
            raise ValueError(f"a={self.a!r} is below -2; the family escapes to infinity")


@dataclass(frozen=True)
class FixedPointPair:
    alpha: float
    beta: float

    @property
    def core(self) -> RealInterval:
        """A = [alpha, -alpha]; only meaningful when alpha < 0 (a < -3/4)."""
        return RealInterval(self.alpha, -self.alpha)

    @property
    def ordered(self) -> bool:
        return -self.beta < self.alpha < -self.alpha < self.beta


@dataclass(frozen=True)
class OrbitSegment:
    """
    Orbit x_0..x_n of P_a with partial sums of log|2 x_i|.

    log_derivative_partial_sums[k] = sum_{i<=k} log|2 values[i]|, so the entry at k is
    log|DP_a^{k+1}(start)|. Entries after an exact hit of 0 are -inf.
    """
    start: float
    values: Tuple[float, ...]
    log_derivative_partial_sums: Tuple[float, ...]
    zero_hits: Tuple[int, ...]

    @property
    def hit_critical(self) -> bool:
        return bool(self.zero_hits)


class ReturnConvention(str, Enum):
    """Which orbit index counts as the return time: the critical point 0 or the critical value a."""
    CRITICAL_POINT = "critical_point"
    CRITICAL_VALUE = "critical_value"


def eval_map(p: ScalarMapParam, x):
    """P_a(x) = x**2 + a. Accepts floats or numpy arrays."""
    return x * x + p.a


def fixed_points(p: ScalarMapParam) -> FixedPointPair:
    """
    Roots of x**2 - x + a = 0 with alpha <= beta.

    beta is computed from the quadratic formula and alpha = a / beta, which avoids the
    cancellation in (1 - sqrt(1 - 4a)) / 2 near a = 0.
    Raises:
        NoRealFixedPoints: if 1 - 4a < 0.
    """
    disc = 1.0 - 4.0 * p.a
    if disc < 0.0:
        raise NoRealFixedPoints(f"1 - 4a = {disc!r} < 0 for a={p.a!r}")
    beta = 0.5 * (1.0 + math.sqrt(disc))
    alpha = p.a / beta
    return FixedPointPair(alpha=alpha, beta=beta)


def invariant_core(p: ScalarMapParam) -> RealInterval:
    """
    The interval [P_a(0), P_a^2(0)] = [a, a**2 + a], forward invariant for a in [-2, -1].
    Raises:
        NotInvariant: outside [-2, -1], or if the image check fails numerically.
    """
    a = p.a
    if not (A_MIN <= a <= -1.0):
        raise NotInvariant(f"[a, a^2+a] is only invariant for a in [-2, -1], got a={a!r}")
    core = RealInterval(a, a * a + a)
    # 0 lies in the core, so the image is [a, max(P(lo), P(hi))].
    image_hi = max(eval_map(p, core.lo), eval_map(p, core.hi))
    if image_hi > core.hi + EPS_FIX:
        raise NotInvariant(f"P_a(core) reaches {image_hi!r} beyond {core.hi!r}")
    return core


def orbit_with_derivative(p: ScalarMapParam, x0: float, n: int) -> OrbitSegment:
    """
    Iterate n steps from x0, recording the orbit and running log-derivative sums.
    Exact hits of 0 are flagged in zero_hits rather than raised.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    values = [float(x0)]
    x = float(x0)
    for _ in range(n):
        x = x * x + p.a
        values.append(x)
    orbit = np.asarray(values[:-1])
    zero_hits = tuple(int(i) for i in np.flatnonzero(orbit == 0.0))
    with np.errstate(divide="ignore"):
        partial = np.cumsum(np.log(np.abs(2.0 * orbit)))
    return OrbitSegment(
        start=float(x0),
        values=tuple(values),
        log_derivative_partial_sums=tuple(float(s) for s in partial),
        zero_hits=zero_hits,
    )


def critical_orbit(p: ScalarMapParam, n: int) -> OrbitSegment:
    """Orbit of the critical value a, the starting point of all Collet-Eckmann bookkeeping."""
    return orbit_with_derivative(p, p.a, n)


def critical_return_time(
    p: ScalarMapParam,
    max_steps: int = DEFAULT_MAX_STEPS,
    convention: ReturnConvention = ReturnConvention.CRITICAL_POINT,
) -> Optional[int]:
    """
    Smallest M >= 1 with P_a^M(0) in the open interval (alpha, -alpha), or None.

    With the critical-value convention the count starts at a = P_a(0), so the result is one
    less. Landing exactly on alpha or -alpha is not a return.
    """
    fp = fixed_points(p)
    if fp.alpha >= 0.0:
        return None
    lo, hi = fp.alpha, -fp.alpha
    x = 0.0
    for m in range(1, max_steps + 1):
        x = x * x + p.a
        if lo < x < hi:
            return m if convention == ReturnConvention.CRITICAL_POINT else m - 1
    return None


def inverse_branch(p: ScalarMapParam, y: float, sign: float) -> Optional[float]:
    """
    The preimage sign * sqrt(y - a) of y, or None when y lies left of the critical value.
    """
    radicand = y - p.a
    if radicand < 0.0:
        if radicand < -SQRT_CLAMP:
            return None
        radicand = 0.0
    return math.copysign(math.sqrt(radicand), sign)


def image_interval(p: ScalarMapParam, interval: RealInterval) -> RealInterval:
    """Interval hull of P_a(interval): endpoint images, plus the critical value if 0 is inside."""
    y_lo = eval_map(p, interval.lo)
    y_hi = eval_map(p, interval.hi)
    lo, hi = min(y_lo, y_hi), max(y_lo, y_hi)
    if interval.lo < 0.0 < interval.hi:
        lo = p.a
    return RealInterval(lo, hi)


def pull_back_interval(
    p: ScalarMapParam,
    interval: RealInterval,
    signs: Tuple[int, ...],
    strict: bool = True,
) -> Optional[RealInterval]:
    """
    Pull an interval back through the inverse branches selected by signs (signs[k] is the side
    of 0 of the k-th iterate).

    With strict=True every intermediate interval must stay strictly right of the critical
    value, i.e. the branch extends as a diffeomorphism over it. With strict=False an endpoint
    may touch the critical value up to rounding noise. Returns None when the chain breaks.
    """
    lo, hi = interval.lo, interval.hi
    for sign in reversed(signs):
        if strict:
            if lo - p.a <= 0.0:
                return None
            x_lo = math.copysign(math.sqrt(lo - p.a), sign)
            x_hi = math.copysign(math.sqrt(hi - p.a), sign)
        else:
            x_lo = inverse_branch(p, lo, sign)
            x_hi = inverse_branch(p, hi, sign)
            if x_lo is None or x_hi is None:
                return None
        lo, hi = min(x_lo, x_hi), max(x_lo, x_hi)
    return RealInterval(lo, hi)


def chebyshev_coordinate(theta):
    """x = 2 cos(2 pi theta), the semi-conjugacy of the doubling map onto P_{-2}."""
    return 2.0 * np.cos(2.0 * np.pi * np.asarray(theta))


def doubling_angle(theta):
    return np.mod(2.0 * np.asarray(theta), 1.0)


def oracle_orbit(a: float, x0: float, n: int, digits: int = 34) -> List[mpmath.mpf]:
    """
    Extended-precision reference orbit of P_a used only as a test oracle.
    """
    with mpmath.workdps(digits):
        a_mp = mpmath.mpf(a)
        x = mpmath.mpf(x0)
        orbit = [x]
        for _ in range(n):
            x = x * x + a_mp
            orbit.append(x)
    return orbit
