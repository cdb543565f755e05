import math

import numpy as np
import pytest
from matplotlib.path import Path

from puzzleforge.dynamics.henon import (
    CLASSICAL_QUADRILATERAL,
    BumpField,
    PlaneParams,
    attractor_sample,
    box_counting_dimension,
    finite_difference_jacobian,
    fixed_points_plane,
    henon_step,
    jacobian,
    kaplan_yorke_dimension,
    lyapunov_plane,
    trapping_check,
    unstable_manifold_sweep,
)
from puzzleforge.errors import Escaped, NoFixedPoints

CLASSICAL = PlaneParams(-1.4, -0.3)


def test_classical_map_in_quadratic_coordinates():
    X, Y = 0.37, -0.12
    x, y = henon_step(CLASSICAL, -1.4 * X, -1.4 * Y)
    assert x == pytest.approx(-1.4 * (1 - 1.4 * X ** 2 + Y))
    assert y == pytest.approx(-1.4 * (0.3 * X))


def test_zero_b_is_the_quadratic_map():
    assert henon_step(PlaneParams(-1.9, 0.0), 0.5, 0.0) == (0.25 - 1.9, -0.0)


def test_parameter_validation():
    with pytest.raises(ValueError):
        PlaneParams(-1.4, 1.0)
    with pytest.raises(ValueError):
        PlaneParams(math.nan, 0.1)


def test_jacobian_determinant_and_finite_differences():
    matrix, det = jacobian(CLASSICAL, 0.4, -0.2)
    assert det == pytest.approx(-0.3)
    assert np.allclose(matrix, finite_difference_jacobian(CLASSICAL, 0.4, -0.2), atol=1e-6)


def test_perturbed_jacobian_matches_finite_differences():
    bump = BumpField(1e-2, center=(0.1, 0.0), radius=0.5, direction=(0.6, 0.8))
    params = PlaneParams(-1.4, -0.3, bump)
    matrix, _ = jacobian(params, 0.2, 0.1)
    assert np.allclose(matrix, finite_difference_jacobian(params, 0.2, 0.1), atol=1e-6)


def test_bump_field():
    bump = BumpField(1e-3, center=(0.5, 0.5), radius=0.25)
    bx, by = bump(0.5, 0.5)
    assert float(bx) == pytest.approx(1e-3)
    assert float(by) == 0.0
    assert float(bump(2.0, 2.0)[0]) == 0.0
    assert bump.c2_size >= 1e-3


def test_classical_fixed_points():
    fixed = fixed_points_plane(CLASSICAL)
    assert fixed.alpha.x == pytest.approx(-0.8839, abs=1e-4)
    assert fixed.beta.x == pytest.approx(1.5839, abs=1e-4)
    assert fixed.alpha.unstable_eigenvalue < -1.0
    assert fixed.beta.unstable_eigenvalue > 1.0
    assert abs(fixed.alpha.stable_eigenvalue) < 1.0
    for saddle in (fixed.alpha, fixed.beta):
        assert henon_step(CLASSICAL, saddle.x, saddle.y) == pytest.approx((saddle.x, saddle.y))


def test_perturbed_fixed_points_are_fixed():
    params = PlaneParams(-1.4, -0.3, BumpField(1e-3, center=(-0.88, 0.26), radius=0.3))
    fixed = fixed_points_plane(params)
    for saddle in (fixed.alpha, fixed.beta):
        assert henon_step(params, saddle.x, saddle.y) == pytest.approx((saddle.x, saddle.y), abs=1e-10)


def test_fixed_points_need_real_roots():
    with pytest.raises(NoFixedPoints):
        fixed_points_plane(PlaneParams(1.0, 0.0))


def test_sampled_fixed_points_satisfy_the_map():
    rng = np.random.default_rng(5)
    for a, b in zip(rng.uniform(-2.0, -1.2, 25), rng.uniform(-0.5, 0.2, 25)):
        params = PlaneParams(float(a), float(b))
        fixed = fixed_points_plane(params)
        for saddle in (fixed.alpha, fixed.beta):
            assert henon_step(params, saddle.x, saddle.y) == pytest.approx((saddle.x, saddle.y), abs=1e-12)
            assert saddle.unstable_eigenvalue * saddle.stable_eigenvalue == pytest.approx(b, abs=1e-12)


def test_classical_lyapunov_and_kaplan_yorke():
    l1, l2 = lyapunov_plane(CLASSICAL, 0.0, 0.0, 100_000)
    assert l1 == pytest.approx(0.42, abs=0.02)
    assert l1 + l2 == pytest.approx(math.log(0.3), abs=1e-8)
    assert 1.24 <= kaplan_yorke_dimension(l1, l2) <= 1.28


@pytest.mark.slow
def test_classical_lyapunov_long_orbit():
    l1, l2 = lyapunov_plane(CLASSICAL, 0.0, 0.0, 10_000_000)
    assert l1 == pytest.approx(0.419, abs=0.005)
    assert 1.25 <= kaplan_yorke_dimension(l1, l2) <= 1.27


def test_lyapunov_with_b_zero_collapses_second_exponent():
    l1, l2 = lyapunov_plane(PlaneParams(-2.0, 0.0), 0.3, 0.0, 20_000)
    assert l1 == pytest.approx(math.log(2.0), abs=0.01)
    assert l2 == -math.inf


def test_escaping_orbit():
    with pytest.raises(Escaped):
        lyapunov_plane(PlaneParams(1.0, 0.1), 0.0, 0.0, 100)


def test_kaplan_yorke_cases():
    assert kaplan_yorke_dimension(-0.1, -1.0) == 0.0
    assert kaplan_yorke_dimension(0.5, -0.2) == 2.0
    assert kaplan_yorke_dimension(0.5, -1.0) == 1.5


def test_classical_trapping_region():
    result = trapping_check(CLASSICAL, CLASSICAL_QUADRILATERAL, grid=128)
    assert result.passed
    assert result.margin > 0.0
    assert result.samples > 0


def test_attractor_cloud_stays_in_the_trapping_region():
    cloud = attractor_sample(CLASSICAL, 0.0, 0.0, 50_000)
    assert Path(np.asarray(CLASSICAL_QUADRILATERAL)).contains_points(cloud).all()
    assert trapping_check(CLASSICAL, CLASSICAL_QUADRILATERAL, grid=64).margin > 0.0


def test_small_square_is_not_trapping():
    square = ((-0.1, -0.1), (0.1, -0.1), (0.1, 0.1), (-0.1, 0.1))
    result = trapping_check(CLASSICAL, square, grid=32)
    assert not result.passed
    assert result.max_penetration > 0.0


def test_attractor_box_dimension():
    cloud = attractor_sample(CLASSICAL, 0.0, 0.0, 100_000)
    assert cloud.shape == (100_000, 2)
    slope, counts = box_counting_dimension(cloud)
    assert len(counts) == 6
    assert list(counts) == sorted(counts)
    assert 1.0 < slope < 1.5


def test_box_dimension_of_a_segment():
    t = np.linspace(0.0, 1.0, 100_000, endpoint=False)
    slope, counts = box_counting_dimension(np.column_stack([t, t]))
    assert counts == tuple(2 ** k for k in range(3, 9))
    assert slope == pytest.approx(1.0)


def test_unstable_manifold_sweep():
    points = unstable_manifold_sweep(CLASSICAL, seeds=100, steps=10)
    assert points.shape[1] == 2
    assert np.all(np.abs(points) < 1e3)
