import math

import numpy as np
import pytest
from scipy.optimize import brentq

from puzzleforge.dynamics.intervals import RealInterval
from puzzleforge.dynamics.puzzle import PuzzlePiece, puzzle_level
from puzzleforge.dynamics.regular_cover import (
    NotRegular,
    NotRegularReason,
    RegularInterval,
    distortion_ratio,
    enumerate_regular,
    extended_core,
    is_regular,
    locate_regular,
    monte_carlo_uncovered,
    simple_intervals,
)
from puzzleforge.dynamics.scalar import ReturnConvention, ScalarMapParam, critical_return_time, fixed_points
from puzzleforge.errors import ResourceLimit, ReturnTimeNotFound

SQRT3 = math.sqrt(3.0)


def piece(lo, hi, order, index=0):
    return PuzzlePiece(RealInterval(lo, hi), order, index)


def test_extended_core():
    assert extended_core(RealInterval(-1.0, 1.0), 0.05).to_list() == pytest.approx([-1.05, 1.05])


def test_regular_example(chebyshev):
    result = is_regular(chebyshev, piece(1.0, SQRT3, 1, 3), 0.05)
    assert isinstance(result, RegularInterval)
    assert result.branch_certificate == (1,)


def test_central_piece_is_not_regular(chebyshev):
    result = is_regular(chebyshev, piece(-1.0, 1.0, 1, 2), 0.05)
    assert isinstance(result, NotRegular)
    assert result.reason == NotRegularReason.CRITICAL_INTERIOR


def test_wrong_image_is_not_regular(chebyshev):
    result = is_regular(chebyshev, piece(-2.0, -SQRT3, 1), 0.05)
    assert result.reason == NotRegularReason.IMAGE


def test_piece_outside_domain(chebyshev):
    assert is_regular(chebyshev, piece(1.5, 2.5, 1), 0.05).reason == NotRegularReason.OUTSIDE_DOMAIN


def test_order_zero_rejected(chebyshev):
    with pytest.raises(ValueError):
        is_regular(chebyshev, piece(-1.0, 1.0, 0), 0.05)


def test_cover_at_order_one_leaves_all_of_a(chebyshev):
    report = enumerate_regular(chebyshev, 1)
    assert report.regular_intervals == ()
    assert report.uncovered_measure == (2.0,)
    assert report.uncovered_containing(0.0) is not None


def test_cover_shrinks_like_halving_at_chebyshev(chebyshev):
    report = enumerate_regular(chebyshev, 12)
    measures = report.uncovered_measure
    assert all(b <= a + 1e-12 for a, b in zip(measures, measures[1:]))
    assert report.fitted_rate == pytest.approx(math.log(2.0), abs=0.1)
    assert report.uncovered_pieces and all(p.contains(0.0) for p in report.uncovered_pieces)


def test_cover_indices_count_siblings_within_the_parent(chebyshev):
    report = enumerate_regular(chebyshev, 3)
    by_order = {n: [ri for ri in report.regular_intervals if ri.order == n] for n in (2, 3)}
    assert [ri.piece.index for ri in by_order[2]] == [0, 2]
    assert [ri.piece.index for ri in by_order[3]] == [0, 2]
    assert by_order[3][0].lo == pytest.approx(-math.sqrt(2.0 - SQRT3), abs=1e-12)
    assert by_order[3][0].hi == pytest.approx(-math.sqrt(2.0 - math.sqrt(2.0 + SQRT3)), abs=1e-12)
    level = puzzle_level(chebyshev, 3)
    position = next(pc.index for pc in level.pieces if pc.lo == pytest.approx(by_order[3][0].lo, abs=1e-12))
    assert position > 2


def test_monte_carlo_agrees_with_uncovered_measure(chebyshev):
    report = enumerate_regular(chebyshev, 4)
    mc = monte_carlo_uncovered(report, samples=1_000_000, rng_seed=11)
    assert mc["seed"] == 11
    assert abs(mc["estimate"] - report.uncovered_measure[-1]) <= 5 * mc["stderr"] + 1e-9


@pytest.mark.parametrize("a", np.linspace(-2.0 + 1e-5, -1.95, 6).tolist())
def test_cover_properties_near_chebyshev(a):
    p = ScalarMapParam(a)
    report = enumerate_regular(p, 8)
    measures = report.uncovered_measure
    assert all(0.0 <= m <= report.core.length for m in measures)
    assert all(b <= a_ + 1e-12 for a_, b in zip(measures, measures[1:]))
    intervals = report.regular_intervals
    assert all(left.hi <= right.lo + 1e-9 for left, right in zip(intervals, intervals[1:]))
    covered = sum(ri.interval.length for ri in intervals)
    assert covered + measures[-1] == pytest.approx(report.core.length, abs=1e-9)


def test_cover_serialises_to_report_schema(chebyshev):
    data = enumerate_regular(chebyshev, 3).to_dict()
    assert data["orders"] == [1, 2, 3]
    assert len(data["uncovered"]) == 3
    lo, hi, order, simple = data["intervals"][0]
    assert lo < hi and order == 2 and simple is False


def test_piece_budget(chebyshev):
    with pytest.raises(ResourceLimit):
        enumerate_regular(chebyshev, 3, max_pieces=0)


def test_distortion_at_chebyshev_is_small(chebyshev):
    report = enumerate_regular(chebyshev, 10)
    ratios = [distortion_ratio(chebyshev, ri.interval, ri.order) for ri in report.regular_intervals]
    assert ratios and max(ratios) <= 100.0


def test_distortion_respects_koebe_bound():
    p = ScalarMapParam(-1.9)
    kappa = 0.05
    tau = kappa / 2.0
    report = enumerate_regular(p, 10, kappa)
    for ri in report.regular_intervals:
        assert distortion_ratio(p, ri.interval, ri.order) <= ((1 + tau) / tau) ** 2


def test_locate_regular_agrees_with_enumeration():
    p = ScalarMapParam(-1.9)
    report = enumerate_regular(p, 8)
    for x in np.random.default_rng(3).uniform(report.core.lo, report.core.hi, 200):
        found, window = locate_regular(p, float(x), 8)
        expected = report.interval_containing(float(x))
        if expected is None:
            assert found is None
            assert window.contains(float(x))
        else:
            assert found is not None
            assert found.interval.to_list() == pytest.approx(expected.interval.to_list(), abs=1e-12)
            assert found.order == expected.order


def test_locate_regular_rejects_points_outside_a(chebyshev):
    with pytest.raises(ValueError):
        locate_regular(chebyshev, 1.5, 4)


def test_simple_intervals_near_chebyshev(near_chebyshev):
    intervals, gap = simple_intervals(near_chebyshev)
    m = critical_return_time(near_chebyshev)
    assert m == 9
    assert intervals and all(ri.is_simple and ri.order < m for ri in intervals)
    assert gap.contains(0.0)
    ratio = gap.length / 2.0 ** -(m - 1)
    assert 1 / 8 <= ratio <= 8
    union = sum(ri.interval.length for ri in intervals)
    assert union + gap.length == pytest.approx(fixed_points(near_chebyshev).core.length, abs=1e-9)
    assert all(not gap.overlaps(ri.interval) for ri in intervals)


def centre_near_chebyshev(period):
    """Parameter near -2 whose critical point has the given period."""
    def g(a):
        x = 0.0
        for _ in range(period):
            x = x * x + a
        return x
    scale = math.pi ** 2 / 4.0 ** period
    return brentq(g, -2.0 + 0.1 * scale, -2.0 + 2.5 * scale, xtol=1e-15)


@pytest.mark.parametrize("period", [5, 6, 7, 8, 9, 10])
def test_simple_interval_count_at_centres(period):
    p = ScalarMapParam(centre_near_chebyshev(period))
    m = critical_return_time(p, convention=ReturnConvention.CRITICAL_VALUE)
    assert m == period - 1
    intervals, gap = simple_intervals(p)
    assert len(intervals) == 2 * m - 2
    assert sorted(ri.order for ri in intervals) == sorted(2 * list(range(2, period)))
    assert gap.contains(0.0)


def test_simple_intervals_need_a_return(chebyshev):
    with pytest.raises(ReturnTimeNotFound):
        simple_intervals(chebyshev)
