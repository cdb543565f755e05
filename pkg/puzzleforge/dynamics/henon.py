"""
henon.py

The Hénon family h(x, y) = (x**2 + a + y, -b x), optionally perturbed by a smooth field B, with
its Jacobian, saddle fixed points, trapping-region check, Lyapunov exponents by iterated
Gram-Schmidt, attractor clouds and dimension estimates.

Coordinates follow the x**2 + a convention of the quadratic family: the classical map
X' = 1 - 1.4 X**2 + Y, Y' = 0.3 X is this family at (a, b) = (-1.4, -0.3) after x = -1.4 X,
y = -1.4 Y.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Protocol, Sequence, Tuple

import numpy as np
from matplotlib.path import Path
from scipy.optimize import root

from puzzleforge.constants import DEFAULT_BOX_THETA
from puzzleforge.errors import Escaped, NoFixedPoints
from puzzleforge.utils.logging import contextual_log

DEFAULT_RADIUS = 1e3
FD_STEP = 1e-6

# Hénon's quadrilateral for (a, b) = (-1.4, -0.3), converted from (X, Y) by x = -1.4 X, y = -1.4 Y.
CLASSICAL_QUADRILATERAL: Tuple[Tuple[float, float], ...] = (
    (1.862, -0.588),
    (-1.848, -0.1862),
    (-1.743, 0.196),
    (1.484, 0.7),
)


class Perturbation(Protocol):
    """A smooth field B(x, y, a) with its differential and a declared C2-size."""
    c2_size: float

    def __call__(self, x, y, a) -> Tuple[np.ndarray, np.ndarray]: ...

    def jacobian(self, x: float, y: float, a: float) -> np.ndarray: ...


@dataclass(frozen=True)
class BumpField:
    """
    amplitude * phi(|z - center|**2 / radius**2) * direction with phi(s) = e * exp(-1/(1 - s))
    on s < 1, a compactly supported C-infinity bump equal to amplitude at the center.
    """
    amplitude: float
    center: Tuple[float, float] = (0.0, 0.0)
    radius: float = 0.5
    direction: Tuple[float, float] = (1.0, 0.0)
    c2_size: float = field(init=False, default=0.0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "c2_size", self._estimate_c2_size())

    def _profile(self, x, y):
        s = ((np.asarray(x) - self.center[0]) ** 2 + (np.asarray(y) - self.center[1]) ** 2) / self.radius ** 2
        inside = s < 1.0
        safe = np.where(inside, s, 0.0)
        phi = np.where(inside, math.e * np.exp(-1.0 / (1.0 - safe)), 0.0)
        dphi = np.where(inside, -phi / (1.0 - safe) ** 2, 0.0)
        return phi, dphi

    def __call__(self, x, y, a=None):
        phi, _ = self._profile(x, y)
        return self.amplitude * phi * self.direction[0], self.amplitude * phi * self.direction[1]

    def jacobian(self, x: float, y: float, a: float = None) -> np.ndarray:
        _, dphi = self._profile(x, y)
        ds = np.array([2.0 * (x - self.center[0]), 2.0 * (y - self.center[1])]) / self.radius ** 2
        grad = self.amplitude * float(dphi) * ds
        return np.outer(np.asarray(self.direction), grad)

    def _estimate_c2_size(self, n: int = 201) -> float:
        """sup of |B|, |DB| and finite-difference |D2B| over a grid covering the support."""
        xs = np.linspace(self.center[0] - self.radius, self.center[0] + self.radius, n)
        ys = np.linspace(self.center[1] - self.radius, self.center[1] + self.radius, n)
        gx, gy = np.meshgrid(xs, ys)
        phi, _ = self._profile(gx, gy)
        values = np.abs(self.amplitude) * phi
        h = xs[1] - xs[0]
        d1 = np.gradient(values, h)
        d2 = [np.gradient(d, h) for d in d1]
        sizes = [values.max()] + [np.abs(d).max() for d in d1] + [np.abs(dd).max() for pair in d2 for dd in pair]
        return float(max(sizes))


@dataclass(frozen=True)
class PlaneParams:
    a: float
    b: float
    perturbation: Optional[Perturbation] = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError("plane parameters must be finite")
        if abs(self.b) >= 1.0:
            raise ValueError(f"|b| must be < 1 for a dissipative map, got b={self.b!r}")

    @property
    def theta(self) -> float:
        """Box half-height: 1/|log C2-size| with a perturbation, 1/|log|b|| without, a default at b = 0."""
        if self.perturbation is not None and 0.0 < self.perturbation.c2_size < 1.0:
            return 1.0 / abs(math.log(self.perturbation.c2_size))
        if self.b != 0.0:
            return 1.0 / abs(math.log(abs(self.b)))
        return DEFAULT_BOX_THETA


@dataclass(frozen=True)
class SaddlePoint:
    x: float
    y: float
    unstable_eigenvalue: float
    stable_eigenvalue: float
    unstable_vector: Tuple[float, float]
    stable_vector: Tuple[float, float]


@dataclass(frozen=True)
class PlaneFixedPoints:
    alpha: SaddlePoint
    beta: SaddlePoint


@dataclass(frozen=True)
class TrappingResult:
    passed: bool
    margin: float
    max_penetration: float
    samples: int


def henon_step(params: PlaneParams, x, y):
    """(x**2 + a + y, -b x) plus B(x, y, a). Accepts floats or arrays."""
    nx = x * x + params.a + y
    ny = -params.b * x
    if params.perturbation is not None:
        bx, by = params.perturbation(x, y, params.a)
        nx = nx + bx
        ny = ny + by
    return nx, ny


def jacobian(params: PlaneParams, x: float, y: float) -> Tuple[np.ndarray, float]:
    """Differential at (x, y) and its determinant (b up to rounding when B = 0)."""
    matrix = np.array([[2.0 * x, 1.0], [-params.b, 0.0]])
    if params.perturbation is not None:
        matrix = matrix + params.perturbation.jacobian(x, y, params.a)
    det = matrix[0, 0] * matrix[1, 1] - matrix[0, 1] * matrix[1, 0]
    return matrix, float(det)


def finite_difference_jacobian(params: PlaneParams, x: float, y: float, h: float = FD_STEP) -> np.ndarray:
    fx_plus = np.array(henon_step(params, x + h, y), dtype=float)
    fx_minus = np.array(henon_step(params, x - h, y), dtype=float)
    fy_plus = np.array(henon_step(params, x, y + h), dtype=float)
    fy_minus = np.array(henon_step(params, x, y - h), dtype=float)
    return np.column_stack([(fx_plus - fx_minus) / (2 * h), (fy_plus - fy_minus) / (2 * h)])


def _saddle(params: PlaneParams, x: float, y: float) -> SaddlePoint:
    matrix, _ = jacobian(params, x, y)
    values, vectors = np.linalg.eig(matrix)
    values = np.real_if_close(values)
    if np.iscomplexobj(values):
        raise NoFixedPoints(f"fixed point ({x!r}, {y!r}) is not a saddle: eigenvalues {values}")
    order = np.argsort(-np.abs(values))
    unstable, stable = order
    return SaddlePoint(
        x=float(x),
        y=float(y),
        unstable_eigenvalue=float(values[unstable]),
        stable_eigenvalue=float(values[stable]),
        unstable_vector=tuple(float(v) for v in np.real(vectors[:, unstable])),
        stable_vector=tuple(float(v) for v in np.real(vectors[:, stable])),
    )


def _label(first: SaddlePoint, second: SaddlePoint) -> PlaneFixedPoints:
    if first.unstable_eigenvalue < 0.0 <= second.unstable_eigenvalue:
        return PlaneFixedPoints(alpha=first, beta=second)
    if second.unstable_eigenvalue < 0.0 <= first.unstable_eigenvalue:
        return PlaneFixedPoints(alpha=second, beta=first)
    lo, hi = sorted((first, second), key=lambda s: s.x)
    return PlaneFixedPoints(alpha=lo, beta=hi)


def fixed_points_plane(params: PlaneParams) -> PlaneFixedPoints:
    """
    The two fixed points with eigen-data; alpha is the one whose unstable eigenvalue is negative.
    Unperturbed points come from x**2 - (1 + b) x + a = 0, perturbed ones from a root solve
    started there.
    Raises:
        NoFixedPoints: if the discriminant is negative or the perturbed solve fails.
    """
    disc = (1.0 + params.b) ** 2 - 4.0 * params.a
    if disc < 0.0:
        raise NoFixedPoints(f"(1+b)^2 - 4a = {disc!r} < 0")
    sq = math.sqrt(disc)
    xs = (0.5 * ((1.0 + params.b) - sq), 0.5 * ((1.0 + params.b) + sq))
    points = []
    for x in xs:
        y = -params.b * x
        if params.perturbation is not None:
            sol = root(lambda z: np.array(henon_step(params, z[0], z[1]), dtype=float) - z, np.array([x, y]))
            if not sol.success:
                raise NoFixedPoints(f"perturbed fixed point solve failed near ({x!r}, {y!r}): {sol.message}")
            x, y = float(sol.x[0]), float(sol.x[1])
        points.append(_saddle(params, x, y))
    return _label(*points)


def _signed_distance(path: Path, vertices: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Distance to the polygon boundary, positive inside."""
    starts = vertices
    ends = np.roll(vertices, -1, axis=0)
    d = ends - starts
    rel = points[:, None, :] - starts[None, :, :]
    t = np.clip(np.sum(rel * d[None, :, :], axis=2) / np.sum(d * d, axis=1)[None, :], 0.0, 1.0)
    nearest = starts[None, :, :] + t[:, :, None] * d[None, :, :]
    dist = np.min(np.linalg.norm(points[:, None, :] - nearest, axis=2), axis=1)
    inside = path.contains_points(points)
    return np.where(inside, dist, -dist)


def trapping_check(params: PlaneParams, region: Sequence[Tuple[float, float]], grid: int = 512) -> TrappingResult:
    """
    Map a grid x grid sample of the polygon and measure how deep inside the images stay.
    margin is the smallest distance of an image to the boundary (negative when one escapes).
    """
    vertices = np.asarray(region, dtype=float)
    path = Path(vertices)
    xs = np.linspace(vertices[:, 0].min(), vertices[:, 0].max(), grid)
    ys = np.linspace(vertices[:, 1].min(), vertices[:, 1].max(), grid)
    gx, gy = np.meshgrid(xs, ys)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    pts = pts[path.contains_points(pts, radius=0.0)]
    if len(pts) == 0:
        return TrappingResult(False, -math.inf, math.inf, 0)
    ix, iy = henon_step(params, pts[:, 0], pts[:, 1])
    images = np.column_stack([ix, iy])
    margin = float(_signed_distance(path, vertices, images).min())
    return TrappingResult(margin > 0.0, margin, max(0.0, -margin), len(pts))


def lyapunov_plane(
    params: PlaneParams,
    x0: float,
    y0: float,
    n: int,
    burn_in: int = 1000,
    radius: float = DEFAULT_RADIUS,
) -> Tuple[float, float]:
    """
    Both Lyapunov exponents by propagating an orthonormal frame and re-orthonormalizing every
    step. When the second frame vector collapses (b = 0) the second exponent is -inf.
    Raises:
        Escaped: if the orbit leaves the disk of the given radius.
    """
    b = params.b
    x, y = float(x0), float(y0)
    for _ in range(burn_in):
        x, y = henon_step(params, x, y)
        if abs(x) > radius or abs(y) > radius:
            raise Escaped(f"orbit left radius {radius!r} during burn-in")
    v1x, v1y, v2x, v2y = 1.0, 0.0, 0.0, 1.0
    s1 = s2 = 0.0
    collapsed = False
    for i in range(n):
        if params.perturbation is None:
            j11, j12, j21, j22 = 2.0 * x, 1.0, -b, 0.0
        else:
            m, _ = jacobian(params, x, y)
            j11, j12, j21, j22 = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
        w1x, w1y = j11 * v1x + j12 * v1y, j21 * v1x + j22 * v1y
        n1 = math.hypot(w1x, w1y)
        v1x, v1y = w1x / n1, w1y / n1
        s1 += math.log(n1)
        if not collapsed:
            w2x, w2y = j11 * v2x + j12 * v2y, j21 * v2x + j22 * v2y
            proj = w2x * v1x + w2y * v1y
            w2x, w2y = w2x - proj * v1x, w2y - proj * v1y
            n2 = math.hypot(w2x, w2y)
            if n2 == 0.0:
                collapsed = True
            else:
                v2x, v2y = w2x / n2, w2y / n2
                s2 += math.log(n2)
        x, y = henon_step(params, x, y)
        if abs(x) > radius or abs(y) > radius:
            raise Escaped(f"orbit left radius {radius!r} after {burn_in + i + 1} steps")
    return s1 / n, (-math.inf if collapsed else s2 / n)


def kaplan_yorke_dimension(l1: float, l2: float) -> float:
    if l1 < 0.0:
        return 0.0
    if l1 + l2 >= 0.0:
        return 2.0
    return 1.0 + l1 / abs(l2)


def attractor_sample(
    params: PlaneParams,
    x0: float,
    y0: float,
    n: int,
    burn_in: int = 1000,
    radius: float = DEFAULT_RADIUS,
) -> np.ndarray:
    """n orbit points after burn_in, as an (n, 2) array."""
    x, y = float(x0), float(y0)
    cloud = np.empty((n, 2))
    for i in range(burn_in + n):
        if i >= burn_in:
            cloud[i - burn_in] = (x, y)
        x, y = henon_step(params, x, y)
        if abs(x) > radius or abs(y) > radius:
            raise Escaped(f"orbit left radius {radius!r} after {i + 1} steps")
    return cloud


def unstable_manifold_sweep(params: PlaneParams, seeds: int = 1000, steps: int = 20, length: float = 1e-6) -> np.ndarray:
    """
    Points of the unstable manifold of alpha: a short segment along the local unstable
    eigenvector, iterated forward. Escaping points are dropped.
    """
    saddle = fixed_points_plane(params).alpha
    t = np.linspace(-length, length, seeds)
    x = saddle.x + t * saddle.unstable_vector[0]
    y = saddle.y + t * saddle.unstable_vector[1]
    layers = []
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(steps):
            x, y = henon_step(params, x, y)
            ok = np.isfinite(x) & np.isfinite(y) & (np.abs(x) < DEFAULT_RADIUS) & (np.abs(y) < DEFAULT_RADIUS)
            layers.append(np.column_stack([x[ok], y[ok]]))
    return np.vstack(layers)


def box_counting_dimension(points: np.ndarray, exponents: Sequence[int] = range(3, 9)) -> Tuple[float, Tuple[int, ...]]:
    """
    Slope of log N(s) against log(1/s) for box sizes s = 2**-k, with N(s) the number of occupied
    boxes. Returns the slope and the box counts.
    """
    pts = np.asarray(points, dtype=float)
    scales = [2.0 ** -k for k in exponents]
    counts = tuple(len(np.unique(np.floor(pts / s).astype(np.int64), axis=0)) for s in scales)
    slope, _ = np.polyfit(np.log(1.0 / np.asarray(scales)), np.log(np.asarray(counts, dtype=float)), 1)
    contextual_log('debug', f"🧩 [Henon] box counts {counts}", operation="box_counting_dimension")
    return float(slope), counts
