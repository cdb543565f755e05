import math

import numpy as np
import pytest

from puzzleforge.dynamics.intervals import RealInterval, dedup_sorted, merge_adjacent, tile
from puzzleforge.dynamics.scalar import (
    ReturnConvention,
    ScalarMapParam,
    chebyshev_coordinate,
    critical_orbit,
    critical_return_time,
    doubling_angle,
    eval_map,
    fixed_points,
    image_interval,
    inverse_branch,
    invariant_core,
    oracle_orbit,
    orbit_with_derivative,
    pull_back_interval,
)
from puzzleforge.errors import NoRealFixedPoints, NotInvariant

GOLDEN = (1 + math.sqrt(5)) / 2


def test_interval_rejects_reversed_endpoints():
    with pytest.raises(ValueError):
        RealInterval(1.0, 0.0)


def test_interval_helpers():
    iv = RealInterval(-1.0, 3.0)
    assert iv.length == 4.0
    assert iv.midpoint == 1.0
    assert iv.contains(3.0) and not iv.contains_interior(3.0)
    assert iv.widened(0.5) == RealInterval(-1.5, 3.5)
    assert RealInterval.hull([2.0, -4.0, 0.0]) == RealInterval(-4.0, 2.0)


def test_dedup_tile_and_merge():
    assert dedup_sorted([1.0, -1.0, 1.0 + 1e-12], 1e-10) == [-1.0, 1.0]
    assert tile([0.0, 1.0, 2.0]) == [RealInterval(0.0, 1.0), RealInterval(1.0, 2.0)]
    merged = merge_adjacent([RealInterval(1.0, 2.0), RealInterval(0.0, 1.0), RealInterval(3.0, 4.0)], 1e-12)
    assert merged == [RealInterval(0.0, 2.0), RealInterval(3.0, 4.0)]


@pytest.mark.parametrize("a, x, expected", [(-2.0, 0.0, -2.0), (-2.0, 2.0, 2.0), (-1.5, 0.5, -1.25)])
def test_eval_map(a, x, expected):
    assert eval_map(ScalarMapParam(a), x) == pytest.approx(expected, abs=1e-15)


def test_parameter_range_is_enforced():
    with pytest.raises(NoRealFixedPoints):
        ScalarMapParam(0.3)
    with pytest.raises(ValueError):
        ScalarMapParam(-2.5)


@pytest.mark.parametrize("a, alpha, beta", [
    (-2.0, -1.0, 2.0),
    (-1.0, 1 - GOLDEN, GOLDEN),
    (0.25, 0.5, 0.5),
])
def test_fixed_points_examples(a, alpha, beta):
    fp = fixed_points(ScalarMapParam(a))
    assert fp.alpha == pytest.approx(alpha, abs=1e-12)
    assert fp.beta == pytest.approx(beta, abs=1e-12)


def test_fixed_point_residuals_over_sampled_parameters():
    for a in np.linspace(-2.0, -0.76, 1000):
        p = ScalarMapParam(float(a))
        fp = fixed_points(p)
        assert abs(eval_map(p, fp.alpha) - fp.alpha) <= 1e-12
        assert abs(eval_map(p, fp.beta) - fp.beta) <= 1e-12
        assert fp.ordered


@pytest.mark.parametrize("a, lo, hi", [(-2.0, -2.0, 2.0), (-1.0, -1.0, 0.0), (-1.5, -1.5, 0.75)])
def test_invariant_core(a, lo, hi):
    core = invariant_core(ScalarMapParam(a))
    assert (core.lo, core.hi) == pytest.approx((lo, hi))


def test_invariant_core_outside_contract():
    with pytest.raises(NotInvariant):
        invariant_core(ScalarMapParam(-0.9))


def test_orbit_from_critical_value_at_chebyshev(chebyshev):
    seg = orbit_with_derivative(chebyshev, -2.0, 3)
    assert seg.values == (-2.0, 2.0, 2.0, 2.0)
    assert seg.log_derivative_partial_sums == pytest.approx((math.log(4), math.log(16), math.log(64)))
    assert not seg.hit_critical


def test_critical_orbit_starts_at_the_critical_value(chebyshev):
    assert critical_orbit(chebyshev, 3) == orbit_with_derivative(chebyshev, -2.0, 3)


def test_orbit_flags_critical_hit(chebyshev):
    seg = orbit_with_derivative(chebyshev, 0.0, 2)
    assert seg.values == (0.0, -2.0, 2.0)
    assert seg.zero_hits == (0,)
    assert seg.log_derivative_partial_sums[0] == -math.inf


def test_orbit_matches_extended_precision_oracle():
    p = ScalarMapParam(-1.9)
    seg = orbit_with_derivative(p, 0.0, 10)
    oracle = oracle_orbit(-1.9, 0.0, 10)
    assert seg.values == pytest.approx([float(v) for v in oracle], abs=1e-9)


def test_log_sums_agree_with_direct_product():
    p = ScalarMapParam(-1.83)
    seg = orbit_with_derivative(p, 0.3, 40)
    product = np.prod(np.abs(2.0 * np.asarray(seg.values[:-1])))
    assert seg.log_derivative_partial_sums[-1] == pytest.approx(math.log(product), rel=1e-10)


def test_return_time_conventions():
    p = ScalarMapParam(-1.0)
    assert critical_return_time(p) == 2
    assert critical_return_time(p, convention=ReturnConvention.CRITICAL_VALUE) == 1


def test_return_time_absent_at_chebyshev(chebyshev):
    assert critical_return_time(chebyshev) is None


def test_return_time_grows_toward_chebyshev():
    eps = 1e-6
    m = critical_return_time(ScalarMapParam(-2.0 + eps))
    assert m is not None
    assert abs(m - math.log(1 / eps) / math.log(4)) < 4


def test_semi_conjugacy(chebyshev):
    theta = np.random.default_rng(7).uniform(0.0, 1.0, 10_000)
    lhs = eval_map(chebyshev, chebyshev_coordinate(theta))
    rhs = chebyshev_coordinate(doubling_angle(theta))
    assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_inverse_branches_and_images(chebyshev):
    assert inverse_branch(chebyshev, -1.0, 1.0) == pytest.approx(1.0)
    assert inverse_branch(chebyshev, -1.0, -1.0) == pytest.approx(-1.0)
    assert inverse_branch(chebyshev, -2.5, 1.0) is None
    assert image_interval(chebyshev, RealInterval(-1.0, 1.0)) == RealInterval(-2.0, -1.0)
    assert image_interval(chebyshev, RealInterval(1.0, math.sqrt(3))).to_list() == pytest.approx([-1.0, 1.0])


def test_pull_back_interval(chebyshev):
    pulled = pull_back_interval(chebyshev, RealInterval(-1.0, 1.0), (1,))
    assert pulled.to_list() == pytest.approx([1.0, math.sqrt(3)])
    assert pull_back_interval(chebyshev, RealInterval(-2.0, 1.0), (1,)) is None
