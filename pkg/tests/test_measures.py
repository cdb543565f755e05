import math

import numpy as np
import pytest

from puzzleforge.dynamics.intervals import RealInterval
from puzzleforge.dynamics.measures import (
    arcsine_reference,
    bin_index,
    density_support,
    empirical_convergence,
    empirical_stats,
    exponent_from_density,
    l1_distance,
    lyapunov_1d,
    ulam_density,
    ulam_matrix,
)
from puzzleforge.dynamics.scalar import ScalarMapParam
from puzzleforge.errors import CriticalHit


def test_density_support():
    assert density_support(ScalarMapParam(-2.0)) == RealInterval(-2.0, 2.0)
    assert density_support(ScalarMapParam(-1.5)).to_list() == pytest.approx([-1.5, 0.75])


def test_bin_index_clamps_edges():
    support = RealInterval(-2.0, 2.0)
    idx = bin_index(np.array([-2.5, -2.0, 0.0, 2.0, 3.0]), support, 4)
    assert idx.tolist() == [0, 0, 2, 3, 3]


def test_lyapunov_at_chebyshev(chebyshev):
    assert lyapunov_1d(chebyshev, 0.3, 200_000) == pytest.approx(math.log(2.0), abs=1e-3)


@pytest.mark.slow
def test_lyapunov_at_chebyshev_long_orbit(chebyshev):
    assert lyapunov_1d(chebyshev, 0.3, 10_000_000) == pytest.approx(math.log(2.0), abs=1e-3)


def test_lyapunov_on_attracting_two_cycle():
    # multiplier of the 2-cycle of x**2 + a is 4 (a + 1)
    assert lyapunov_1d(ScalarMapParam(-1.1), 0.1, 10_000) == pytest.approx(0.5 * math.log(0.4), abs=1e-6)


def test_lyapunov_guards():
    with pytest.raises(CriticalHit):
        lyapunov_1d(ScalarMapParam(-1.0), 0.0, 1000, burn_in=0)
    with pytest.raises(ValueError):
        lyapunov_1d(ScalarMapParam(-1.9), 0.1, 999)


def test_arcsine_reference():
    ref = arcsine_reference(200)
    assert ref.masses.sum() == pytest.approx(1.0, abs=1e-12)
    assert ref.masses == pytest.approx(ref.masses[::-1], abs=1e-12)
    assert exponent_from_density(arcsine_reference(2000)) == pytest.approx(math.log(2.0), abs=0.01)


def test_orbit_density_matches_arcsine(chebyshev):
    hist = ulam_density(chebyshev, bins=200, iterates=2000, seeds=1000, rng_seed=7)
    assert hist.masses.sum() == pytest.approx(1.0)
    assert l1_distance(hist, arcsine_reference(200)) < 0.02


def test_operator_density_matches_arcsine(chebyshev):
    hist = ulam_density(chebyshev, bins=400, iterates=2000, seeds=0, mode="operator")
    assert l1_distance(hist, arcsine_reference(400)) < 0.1


def test_ulam_matrix_is_row_stochastic(chebyshev):
    matrix = ulam_matrix(chebyshev, RealInterval(-2.0, 2.0), 100)
    assert np.allclose(np.asarray(matrix.sum(axis=1)).ravel(), 1.0)


def test_orbit_density_does_not_depend_on_workers(chebyshev):
    serial = ulam_density(chebyshev, bins=100, iterates=50, seeds=600, rng_seed=3, workers=1)
    pooled = ulam_density(chebyshev, bins=100, iterates=50, seeds=600, rng_seed=3, workers=2)
    assert np.array_equal(serial.masses, pooled.masses)


def test_density_rejects_bad_arguments(chebyshev):
    with pytest.raises(ValueError):
        ulam_density(chebyshev, bins=50, iterates=10, seeds=10)
    with pytest.raises(ValueError):
        ulam_density(chebyshev, bins=100, iterates=0, seeds=10)
    with pytest.raises(ValueError):
        ulam_density(chebyshev, bins=100, iterates=10, seeds=10, mode="bogus")


def test_l1_needs_matching_histograms():
    with pytest.raises(ValueError):
        l1_distance(arcsine_reference(100), arcsine_reference(200))


def test_empirical_convergence(chebyshev):
    distances = empirical_convergence(chebyshev, 0.3, [1000, 10_000, 100_000], arcsine_reference(100))
    assert [n for n, _ in distances] == [1000, 10_000, 100_000]
    assert distances[-1][1] < distances[0][1]
    assert distances[-1][1] < 0.1


def test_empirical_convergence_checkpoints_must_increase(chebyshev):
    with pytest.raises(ValueError):
        empirical_convergence(chebyshev, 0.3, [100, 100], arcsine_reference(100))


def test_empirical_stats(chebyshev):
    stats = empirical_stats(chebyshev, 0.3, 5000)
    assert stats.n == 5000
    assert stats.histogram.masses.sum() == pytest.approx(1.0)
    assert stats.lyapunov_partial == pytest.approx(math.log(2.0), abs=0.01)
