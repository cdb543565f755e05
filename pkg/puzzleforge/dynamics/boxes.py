"""
boxes.py

Boxes and pieces for Hénon-like maps near the degenerate quadratic map, in the normal form

    f(x, y) = (x**2 + a + b y, -b x) + B(x, y, a),

which is the Hénon map of Jacobian b**2 after rescaling y by b, and whose b = 0 member has
exactly vertical stable arcs {alpha} x [-theta, theta] and {-alpha} x [-theta, theta].

A box is the region between two nearly vertical arcs sampled as graphs x = gamma(y) over
y in [-theta, theta]. The base box is bounded by the local stable arc of the fixed point near
alpha and its preimage near -alpha. Pieces are boxes mapped by f**n across the base box with
sampled expansion of nearly horizontal vectors; the star product composes two pieces by pulling
the second back along the first.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from puzzleforge.constants import (
    CURVE_TOL,
    DEFAULT_ARC_NODES,
    DEFAULT_CERT_C,
    DEFAULT_CERT_LAMBDA,
    DEFAULT_CERT_SAMPLES,
    DEFAULT_KAPPA,
    DEFAULT_MAX_STEPS,
    DEFAULT_RNG_SEED,
)
from puzzleforge.dynamics.henon import PlaneParams
from puzzleforge.dynamics.regular_cover import RegularInterval, extended_core, simple_intervals
from puzzleforge.dynamics.scalar import (
    ReturnConvention,
    ScalarMapParam,
    critical_return_time,
    fixed_points,
    pull_back_interval,
)
from puzzleforge.errors import ArcFailure, CountMismatch, NoFixedPoints, PullbackFailure, ReturnTimeNotFound
from puzzleforge.utils.logging import contextual_log

ARC_TOL = 1e-13
ARC_MAX_ITER = 500
MAX_ARC_SLOPE = 1.0
BRACKET_WIDEN = 1e-3
NORMAL_FORM = "(x**2 + a + b*y, -b*x)"


@dataclass(frozen=True, eq=False)
class PlaneBox:
    """Region between two graphs x = left(y) <= x = right(y) over y in [-theta, theta]."""
    y_nodes: np.ndarray
    left_x: np.ndarray
    right_x: np.ndarray
    theta: float
    _left: CubicSpline = field(init=False, repr=False, default=None)
    _right: CubicSpline = field(init=False, repr=False, default=None)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_left", CubicSpline(self.y_nodes, self.left_x))
        object.__setattr__(self, "_right", CubicSpline(self.y_nodes, self.right_x))

    def left(self, y):
        return self._left(y)

    def right(self, y):
        return self._right(y)

    @property
    def width(self) -> float:
        """Horizontal width on the line y = 0."""
        return float(self.right(0.0) - self.left(0.0))

    @property
    def max_slope(self) -> float:
        dy = np.diff(self.y_nodes)
        slopes = [np.abs(np.diff(arc) / dy).max() for arc in (self.left_x, self.right_x)]
        return float(max(slopes))

    def contains(self, x, y, tol: float = 0.0):
        x = np.asarray(x)
        y = np.asarray(y)
        return (
            (np.abs(y) <= self.theta + tol)
            & (self.left(y) - tol <= x)
            & (x <= self.right(y) + tol)
        )

    def to_dict(self) -> Dict:
        return {
            "theta": self.theta,
            "y": self.y_nodes.tolist(),
            "left": self.left_x.tolist(),
            "right": self.right_x.tolist(),
        }


@dataclass(frozen=True)
class ExpansionCertificate:
    c: float
    lam: float
    samples: int
    rng_seed: int
    min_ratio: float
    image_inside: bool

    @property
    def passed(self) -> bool:
        return self.min_ratio >= 1.0 and self.image_inside


@dataclass(frozen=True, eq=False)
class PlanePiece:
    box: PlaneBox
    order: int
    branch: Tuple[int, ...]
    expansion_certificate: Optional[ExpansionCertificate] = None

    def to_dict(self) -> Dict:
        cert = self.expansion_certificate
        return {
            "order": self.order,
            "branch": list(self.branch),
            "box": self.box.to_dict(),
            "certificate": None if cert is None else {
                "c": cert.c,
                "lambda": cert.lam,
                "samples": cert.samples,
                "rng_seed": cert.rng_seed,
                "min_ratio": cert.min_ratio,
                "image_inside": cert.image_inside,
                "passed": cert.passed,
            },
        }


@dataclass(frozen=True)
class NotAdmissible:
    order: int
    separation: float


@dataclass(frozen=True, eq=False)
class SimplePieces:
    pieces: Tuple[PlanePiece, ...]
    base: PlaneBox
    central_box: PlaneBox
    return_time: int
    width_ratio: float
    b: float = 0.0

    def to_dict(self) -> Dict:
        """Box coordinates are in the normal form, whose Jacobian determinant is b**2."""
        return {
            "map": NORMAL_FORM,
            "b": self.b,
            "jacobian_det": self.b ** 2,
            "return_time": self.return_time,
            "count": len(self.pieces),
            "width_ratio": self.width_ratio,
            "central_box": self.central_box.to_dict(),
            "base": self.base.to_dict(),
            "pieces": [piece.to_dict() for piece in self.pieces],
        }


def normal_form_step(params: PlaneParams, x, y):
    """(x**2 + a + b y, -b x) plus B(x, y, a)."""
    nx = x * x + params.a + params.b * y
    ny = -params.b * x
    if params.perturbation is not None:
        bx, by = params.perturbation(x, y, params.a)
        nx = nx + bx
        ny = ny + by
    return nx, ny


def normal_form_jacobian(params: PlaneParams, x, y) -> np.ndarray:
    """Differentials at arrays of points, shape (..., 2, 2)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.zeros(x.shape + (2, 2))
    out[..., 0, 0] = 2.0 * x
    out[..., 0, 1] = params.b
    out[..., 1, 0] = -params.b
    if params.perturbation is not None:
        flat_x, flat_y = x.ravel(), y.ravel()
        extra = np.array([params.perturbation.jacobian(px, py, params.a) for px, py in zip(flat_x, flat_y)])
        out = out + extra.reshape(out.shape)
    return out


def iterate_normal_form(params: PlaneParams, x, y, n: int):
    for _ in range(n):
        x, y = normal_form_step(params, x, y)
    return x, y


def normal_form_fixed_point(params: PlaneParams) -> Tuple[float, float]:
    """The fixed point near (alpha, 0): smaller root of x**2 - (1 + b**2) x + a = 0 (B = 0)."""
    s = 1.0 + params.b * params.b
    disc = s * s - 4.0 * params.a
    if disc < 0.0:
        raise NoFixedPoints(f"normal form has no fixed points at a={params.a!r}, b={params.b!r}")
    x = 0.5 * (s - math.sqrt(disc))
    return x, -params.b * x


def _continue_arc(
    params: PlaneParams,
    y_nodes: np.ndarray,
    initial: np.ndarray,
    target: Callable[[np.ndarray], np.ndarray],
    sign: float,
    what: str,
) -> np.ndarray:
    """
    Solve x = sign * sqrt(target(y') - a - b y - B1(x, y)), y' = -b x + B2(x, y) at every node by
    fixed-point iteration; target is the arc the new arc is mapped into.
    """
    x = initial.copy()
    for _ in range(ARC_MAX_ITER):
        y_image = -params.b * x
        shift = np.zeros_like(x)
        if params.perturbation is not None:
            bx, by = params.perturbation(x, y_nodes, params.a)
            y_image = y_image + by
            shift = bx
        radicand = target(y_image) - params.a - params.b * y_nodes - shift
        if np.any(radicand < 0.0) or not np.all(np.isfinite(radicand)):
            raise ArcFailure(f"{what} arc left the domain of the inverse branch")
        nxt = sign * np.sqrt(radicand)
        change = float(np.max(np.abs(nxt - x)))
        x = nxt
        if change < ARC_TOL:
            break
    else:
        raise ArcFailure(f"{what} arc did not converge in {ARC_MAX_ITER} iterations")
    slopes = np.abs(np.diff(x) / np.diff(y_nodes))
    if slopes.size and slopes.max() > MAX_ARC_SLOPE:
        raise ArcFailure(f"{what} arc slope {slopes.max()!r} exceeds {MAX_ARC_SLOPE}")
    return x


def build_base_box(params: PlaneParams, nodes: int = DEFAULT_ARC_NODES, theta: Optional[float] = None) -> PlaneBox:
    """
    The base box: the local stable arc of the fixed point near alpha (left) and its preimage
    under the positive branch (right), continued as graphs over [-theta, theta].
    Raises:
        ArcFailure: if continuation loses the graph property or leaves the branch domain.
    """
    theta = params.theta if theta is None else theta
    y_nodes = np.linspace(-theta, theta, nodes)
    x_fix, _ = normal_form_fixed_point(params)
    left_x = np.full(nodes, x_fix)

    # The stable arc is invariant: iterate the graph transform against its own current graph.
    for _ in range(ARC_MAX_ITER):
        updated = _continue_arc(params, y_nodes, left_x, CubicSpline(y_nodes, left_x), -1.0, "left")
        change = float(np.max(np.abs(updated - left_x)))
        left_x = updated
        if change < ARC_TOL:
            break
    else:
        raise ArcFailure(f"stable arc graph transform did not converge in {ARC_MAX_ITER} steps")
    left_spline = CubicSpline(y_nodes, left_x)
    right_x = _continue_arc(params, y_nodes, -left_x, left_spline, 1.0, "right")
    contextual_log('debug', f"🧩 [Boxes] base box width {float(right_x[nodes // 2] - left_x[nodes // 2])!r}", operation="build_base_box", params={"a": params.a, "b": params.b, "nodes": nodes})
    return PlaneBox(y_nodes, left_x, right_x, theta)


def _pull_back_arc(
    params: PlaneParams,
    y_nodes: np.ndarray,
    bracket: Callable[[float], Tuple[float, float]],
    n: int,
    arc: Callable[[float], float],
) -> np.ndarray:
    xs = np.empty(len(y_nodes))
    for i, y in enumerate(y_nodes):
        def g(x: float) -> float:
            fx, fy = iterate_normal_form(params, x, y, n)
            return float(fx - arc(fy))

        lo, hi = bracket(y)
        g_lo, g_hi = g(lo), g(hi)
        if g_lo == 0.0:
            xs[i] = lo
            continue
        if g_hi == 0.0:
            xs[i] = hi
            continue
        if not (np.isfinite(g_lo) and np.isfinite(g_hi)) or g_lo * g_hi > 0.0:
            raise PullbackFailure(f"no sign change for the order-{n} pullback at y={y!r} in [{lo!r}, {hi!r}]")
        xs[i] = brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return xs


def pull_back_box(
    params: PlaneParams,
    target: PlaneBox,
    n: int,
    bracket: Callable[[float], Tuple[float, float]],
) -> PlaneBox:
    """
    The part of f**-n(target) inside the bracket, node by node: the x at which f**n meets each
    bounding arc of the target.
    """
    a1 = _pull_back_arc(params, target.y_nodes, bracket, n, lambda y: float(target.left(y)))
    a2 = _pull_back_arc(params, target.y_nodes, bracket, n, lambda y: float(target.right(y)))
    return PlaneBox(target.y_nodes, np.minimum(a1, a2), np.maximum(a1, a2), target.theta)


def certify_piece(
    params: PlaneParams,
    box: PlaneBox,
    order: int,
    base: PlaneBox,
    samples: int = DEFAULT_CERT_SAMPLES,
    rng_seed: int = DEFAULT_RNG_SEED,
    c: float = DEFAULT_CERT_C,
    lam: float = DEFAULT_CERT_LAMBDA,
) -> ExpansionCertificate:
    """
    Sampled expansion certificate. For seeded points z of the box, every k < order and a nearly
    horizontal u = (1, s) with |s| <= theta attached at f**k(z), checks
    |Df**(order-k)(f**k z) u| >= c * lam**(order-k) * |u|, and that f**order(z) lies in the base box.
    min_ratio is the worst observed |Df u| / (c lam**m |u|).
    """
    rng = np.random.default_rng(rng_seed)
    y = rng.uniform(-box.theta, box.theta, samples)
    t = rng.uniform(0.0, 1.0, samples)
    x = box.left(y) + t * (box.right(y) - box.left(y))
    s = rng.uniform(-box.theta, box.theta, samples)
    u0 = np.stack([np.ones(samples), s], axis=1)
    u_norm = np.linalg.norm(u0, axis=1)

    jacobians = []
    px, py = x, y
    for _ in range(order):
        jacobians.append(normal_form_jacobian(params, px, py))
        px, py = normal_form_step(params, px, py)
    image_inside = bool(np.all(base.contains(px, py, tol=CURVE_TOL)))

    min_ratio = math.inf
    for k in range(order):
        v = u0.copy()
        for j in range(k, order):
            v = np.einsum("nij,nj->ni", jacobians[j], v)
        m = order - k
        ratio = np.linalg.norm(v, axis=1) / (c * lam ** m * u_norm)
        min_ratio = min(min_ratio, float(ratio.min()))
    return ExpansionCertificate(c, lam, samples, rng_seed, min_ratio, image_inside)


def _bracket_from(box: PlaneBox) -> Callable[[float], Tuple[float, float]]:
    def bracket(y: float) -> Tuple[float, float]:
        lo, hi = float(box.left(y)), float(box.right(y))
        pad = BRACKET_WIDEN * max(hi - lo, CURVE_TOL)
        return lo - pad, hi + pad
    return bracket


def star_product(
    params: PlaneParams,
    p1: PlanePiece,
    p2: PlanePiece,
    base: Optional[PlaneBox] = None,
    certify: bool = False,
    rng_seed: int = DEFAULT_RNG_SEED,
) -> Union[PlanePiece, NotAdmissible]:
    """
    (Y, n) * (Y', n') = (f**-n(Y') intersected with Y, n + n'): the arcs of Y' pulled back along
    p1's branch inside p1's box.
    Returns NotAdmissible when the pulled-back arcs coincide (the box collapses onto one arc).
    Raises:
        PullbackFailure: if an arc cannot be bracketed inside p1's box.
    """
    box = pull_back_box(params, p2.box, p1.order, _bracket_from(p1.box))
    order = p1.order + p2.order
    separation = float(np.max(box.right_x - box.left_x))
    if separation <= CURVE_TOL:
        return NotAdmissible(order, separation)
    certificate = None
    if certify:
        reference = base if base is not None else build_base_box(params, len(p2.box.y_nodes), p2.box.theta)
        certificate = certify_piece(params, box, order, reference, rng_seed=rng_seed)
    return PlanePiece(box, order, p1.branch + p2.branch, certificate)


def base_piece(base: PlaneBox) -> PlanePiece:
    """The base box as the order-0 piece, the unit of the star product."""
    return PlanePiece(base, 0, ())


def _one_dimensional_bracket(p: ScalarMapParam, interval: RegularInterval, kappa: float) -> Callable[[float], Tuple[float, float]]:
    ext = pull_back_interval(p, extended_core(fixed_points(p).core, kappa), interval.branch_certificate, strict=True)
    if ext is None:
        ext = interval.interval
    return lambda y: (ext.lo, ext.hi)


def simple_pieces(
    params: PlaneParams,
    kappa: float = DEFAULT_KAPPA,
    nodes: int = DEFAULT_ARC_NODES,
    samples: int = DEFAULT_CERT_SAMPLES,
    rng_seed: int = DEFAULT_RNG_SEED,
) -> SimplePieces:
    """
    Continue the 1-D simple intervals of P_a into boxes across the base box, certify each, and
    report the central box left between the two innermost pieces.
    Raises:
        ReturnTimeNotFound: if the critical value never returns to A.
        CountMismatch: if the number of pieces is not 2M - 2.
    """
    p = ScalarMapParam(params.a)
    return_time = critical_return_time(p, DEFAULT_MAX_STEPS, ReturnConvention.CRITICAL_VALUE)
    if return_time is None:
        raise ReturnTimeNotFound(f"critical value of a={params.a!r} does not return to A")
    intervals, _ = simple_intervals(p, kappa)
    expected = 2 * return_time - 2
    if len(intervals) != expected:
        raise CountMismatch(f"{len(intervals)} simple intervals at a={params.a!r}, expected 2M-2 = {expected}")
    base = build_base_box(params, nodes)
    pieces: List[PlanePiece] = []
    for interval in intervals:
        box = pull_back_box(params, base, interval.order, _one_dimensional_bracket(p, interval, kappa))
        certificate = certify_piece(params, box, interval.order, base, samples, rng_seed)
        pieces.append(PlanePiece(box, interval.order, interval.branch_certificate, certificate))
    pieces.sort(key=lambda piece: float(piece.box.left(0.0)))
    left_side = [pc for pc in pieces if float(pc.box.right(0.0)) <= 0.0]
    right_side = [pc for pc in pieces if float(pc.box.left(0.0)) >= 0.0]
    central_left = left_side[-1].box.right_x if left_side else base.left_x
    central_right = right_side[0].box.left_x if right_side else base.right_x
    central = PlaneBox(base.y_nodes, central_left, central_right, base.theta)
    width_ratio = central.width / 2.0 ** -return_time
    contextual_log('debug', f"🧩 [Boxes] {len(pieces)} simple pieces, central width ratio {width_ratio:.3f}", operation="simple_pieces", params={"a": params.a, "b": params.b})
    return SimplePieces(tuple(pieces), base, central, return_time, width_ratio, params.b)
