"""
measures.py

Lyapunov exponents and invariant-density estimates for the quadratic family: orbit histograms
(Birkhoff averages over many seeds), an optional Ulam transfer-matrix estimate, the exact
arcsine reference at a = -2 and empirical-measure convergence along single orbits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from puzzleforge.dynamics.intervals import RealInterval
from puzzleforge.dynamics.scalar import ScalarMapParam, fixed_points, invariant_core
from puzzleforge.errors import CriticalHit, NotInvariant
from puzzleforge.sweep import run_pool
from puzzleforge.utils.logging import contextual_log

MIN_BINS = 100
MIN_EXPONENT_SAMPLES = 1000
SEED_CHUNK = 256
ULAM_SUBSAMPLES = 64


@dataclass(frozen=True, eq=False)
class DensityHistogram:
    support: RealInterval
    bin_count: int
    masses: np.ndarray

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(self.support.lo, self.support.hi, self.bin_count + 1)

    @property
    def centers(self) -> np.ndarray:
        edges = self.edges
        return 0.5 * (edges[:-1] + edges[1:])

    @property
    def density(self) -> np.ndarray:
        return self.masses / (self.support.length / self.bin_count)

    def rows(self) -> List[Dict[str, float]]:
        return [{"bin_center": float(c), "mass": float(m)} for c, m in zip(self.centers, self.masses)]


@dataclass(frozen=True, eq=False)
class EmpiricalStats:
    start: float
    n: int
    histogram: DensityHistogram
    lyapunov_partial: float


def density_support(p: ScalarMapParam) -> RealInterval:
    """[a, a**2 + a] where it is invariant, [-beta, beta] otherwise."""
    try:
        return invariant_core(p)
    except NotInvariant:
        beta = fixed_points(p).beta
        return RealInterval(-beta, beta)


def bin_index(x: np.ndarray, support: RealInterval, bins: int) -> np.ndarray:
    """Bin of each point; points on or past the edges fall into the end bins."""
    scaled = (np.asarray(x) - support.lo) / support.length * bins
    return np.clip(np.floor(scaled), 0, bins - 1).astype(np.int64)


def _histogram(counts: np.ndarray, support: RealInterval) -> DensityHistogram:
    total = counts.sum()
    masses = counts / total if total > 0 else np.full(len(counts), 1.0 / len(counts))
    return DensityHistogram(support, len(counts), masses.astype(float))


def lyapunov_1d(p: ScalarMapParam, x0: float, n: int, burn_in: int = 1000) -> float:
    """
    (1/n) sum log|2 x_i| over n orbit points after burn_in iterates.
    Raises:
        CriticalHit: if the orbit meets 0 exactly.
    """
    if n < MIN_EXPONENT_SAMPLES:
        raise ValueError(f"n must be >= {MIN_EXPONENT_SAMPLES}")
    a = p.a
    x = float(x0)
    for _ in range(burn_in):
        x = x * x + a
    total = 0.0
    for i in range(n):
        if x == 0.0:
            raise CriticalHit(f"orbit from {x0!r} hits 0 after {burn_in + i} steps")
        total += math.log(abs(2.0 * x))
        x = x * x + a
    return total / n


def _orbit_counts(args: Tuple[float, RealInterval, int, int, int, int, np.random.SeedSequence]) -> np.ndarray:
    a, support, bins, seeds, iterates, burn_in, seed_seq = args
    rng = np.random.default_rng(seed_seq)
    x = rng.uniform(support.lo, support.hi, size=seeds)
    for _ in range(burn_in):
        x = x * x + a
    counts = np.zeros(bins, dtype=np.int64)
    for _ in range(iterates):
        counts += np.bincount(bin_index(x, support, bins), minlength=bins)
        x = x * x + a
    return counts


def _orbit_density(p: ScalarMapParam, support: RealInterval, bins: int, iterates: int, seeds: int,
                   rng_seed: int, burn_in: int, workers: int) -> DensityHistogram:
    chunks = max(1, math.ceil(seeds / SEED_CHUNK))
    children = np.random.SeedSequence(rng_seed).spawn(chunks)
    sizes = [SEED_CHUNK] * (chunks - 1) + [seeds - SEED_CHUNK * (chunks - 1)]
    tasks = [(p.a, support, bins, size, iterates, burn_in, child) for size, child in zip(sizes, children)]
    counts = sum(run_pool(_orbit_counts, tasks, workers))
    return _histogram(counts, support)


def ulam_matrix(p: ScalarMapParam, support: RealInterval, bins: int, subsamples: int = ULAM_SUBSAMPLES) -> sparse.csr_matrix:
    """
    Row-stochastic transfer matrix: entry (i, j) is the fraction of evenly spaced points of bin i
    that P_a sends into bin j.
    """
    width = support.length / bins
    offsets = (np.arange(subsamples) + 0.5) / subsamples
    starts = support.lo + width * (np.arange(bins)[:, None] + offsets[None, :])
    targets = bin_index(starts * starts + p.a, support, bins)
    rows = np.repeat(np.arange(bins), subsamples)
    data = np.full(rows.shape, 1.0 / subsamples)
    return sparse.csr_matrix((data, (rows, targets.ravel())), shape=(bins, bins))


def _operator_density(p: ScalarMapParam, support: RealInterval, bins: int, iterates: int) -> DensityHistogram:
    transfer = ulam_matrix(p, support, bins).T.tocsr()
    v = np.full(bins, 1.0 / bins)
    for step in range(iterates):
        nxt = transfer @ v
        nxt /= nxt.sum()
        if np.abs(nxt - v).sum() < 1e-13:
            v = nxt
            break
        v = nxt
    contextual_log('debug', f"🧩 [Ulam] power iteration stopped after {step + 1} steps", operation="ulam_density", params={"a": p.a, "bins": bins})
    return _histogram(v, support)


def ulam_density(
    p: ScalarMapParam,
    bins: int,
    iterates: int,
    seeds: int,
    rng_seed: int = 0,
    burn_in: int = 100,
    mode: str = "orbit",
    workers: int = 1,
) -> DensityHistogram:
    """
    Estimate the absolutely continuous invariant density of P_a on its invariant core.

    mode "orbit" histograms iterates of uniformly drawn seeds (seeded, split into fixed chunks so
    the result does not depend on workers); mode "operator" takes the stationary vector of the
    Ulam transfer matrix by power iteration, using iterates as the step cap.
    """
    if bins < MIN_BINS:
        raise ValueError(f"bins must be >= {MIN_BINS}")
    if iterates < 1:
        raise ValueError("iterates must be >= 1")
    support = density_support(p)
    if mode == "orbit":
        return _orbit_density(p, support, bins, iterates, seeds, rng_seed, burn_in, workers)
    if mode == "operator":
        return _operator_density(p, support, bins, iterates)
    raise ValueError(f"unknown density mode {mode!r}")


def arcsine_reference(bins: int) -> DensityHistogram:
    """Exact bin masses of 1/(pi sqrt(4 - x**2)) on [-2, 2], the invariant density at a = -2."""
    support = RealInterval(-2.0, 2.0)
    edges = np.linspace(-2.0, 2.0, bins + 1)
    cdf = 0.5 + np.arcsin(np.clip(edges / 2.0, -1.0, 1.0)) / np.pi
    return DensityHistogram(support, bins, np.diff(cdf))


def l1_distance(h1: DensityHistogram, h2: DensityHistogram) -> float:
    if h1.bin_count != h2.bin_count or h1.support != h2.support:
        raise ValueError("histograms must share support and bin count")
    return float(np.abs(h1.masses - h2.masses).sum())


def exponent_from_density(hist: DensityHistogram) -> float:
    """Sum of mass * log|2 * center|, the density-side estimate of the Lyapunov exponent."""
    with np.errstate(divide="ignore"):
        return float(np.sum(hist.masses * np.log(np.abs(2.0 * hist.centers))))


def _single_orbit(p: ScalarMapParam, x0: float, n: int) -> np.ndarray:
    orbit = np.empty(n)
    x = float(x0)
    for i in range(n):
        orbit[i] = x
        x = x * x + p.a
    return orbit


def empirical_convergence(
    p: ScalarMapParam,
    x0: float,
    checkpoints: Sequence[int],
    reference: DensityHistogram,
) -> List[Tuple[int, float]]:
    """
    L1 distance between the empirical measure of x_0..x_{n-1} and the reference histogram at each
    checkpoint n. A distance that does not shrink flags x0 as outside the basin of the reference.
    """
    marks = list(checkpoints)
    if not marks or any(n < 1 for n in marks) or any(b <= a for a, b in zip(marks, marks[1:])):
        raise ValueError("checkpoints must be positive and strictly increasing")
    idx = bin_index(_single_orbit(p, x0, marks[-1]), reference.support, reference.bin_count)
    out: List[Tuple[int, float]] = []
    counts = np.zeros(reference.bin_count, dtype=np.int64)
    prev = 0
    for n in marks:
        counts += np.bincount(idx[prev:n], minlength=reference.bin_count)
        prev = n
        out.append((n, l1_distance(_histogram(counts, reference.support), reference)))
    return out


def empirical_stats(p: ScalarMapParam, x0: float, n: int, bins: int = MIN_BINS,
                    support: Optional[RealInterval] = None) -> EmpiricalStats:
    """Histogram and partial exponent of exactly n orbit points from x0."""
    support = support or density_support(p)
    orbit = _single_orbit(p, x0, n)
    counts = np.bincount(bin_index(orbit, support, bins), minlength=bins)
    with np.errstate(divide="ignore"):
        partial = float(np.mean(np.log(np.abs(2.0 * orbit))))
    return EmpiricalStats(float(x0), n, _histogram(counts, support), partial)
