import numpy as np
import pytest

from puzzleforge.dynamics.boxes import (
    NORMAL_FORM,
    NotAdmissible,
    PlaneBox,
    PlanePiece,
    base_piece,
    build_base_box,
    certify_piece,
    normal_form_fixed_point,
    normal_form_step,
    simple_pieces,
    star_product,
)
from puzzleforge.dynamics.henon import PlaneParams
from puzzleforge.dynamics.intervals import RealInterval
from puzzleforge.dynamics.regular_cover import simple_intervals
from puzzleforge.dynamics.scalar import ScalarMapParam, fixed_points, pull_back_interval
from puzzleforge.errors import CountMismatch, PullbackFailure, ReturnTimeNotFound

# critical value enters A at time 8, well inside A
RETURNING_A = -2.0 + 6e-5
NODES = 33


@pytest.fixture(scope="module")
def flat_pieces():
    return simple_pieces(PlaneParams(RETURNING_A, 0.0), nodes=NODES, samples=200)


@pytest.fixture(scope="module")
def thin_pieces():
    return simple_pieces(PlaneParams(RETURNING_A, 1e-6), nodes=NODES, samples=200)


def test_normal_form_fixed_point():
    params = PlaneParams(-1.5, 0.3)
    x, y = normal_form_fixed_point(params)
    assert normal_form_step(params, x, y) == pytest.approx((x, y), abs=1e-12)
    assert normal_form_fixed_point(PlaneParams(-1.5, 0.0))[0] == pytest.approx(fixed_points(ScalarMapParam(-1.5)).alpha)


def test_base_box_is_a_for_b_zero():
    params = PlaneParams(-1.9, 0.0)
    box = build_base_box(params, nodes=NODES)
    alpha = fixed_points(ScalarMapParam(-1.9)).alpha
    assert box.theta == pytest.approx(0.1)
    assert np.allclose(box.left_x, alpha, atol=1e-12)
    assert np.allclose(box.right_x, -alpha, atol=1e-12)
    assert box.max_slope == pytest.approx(0.0, abs=1e-9)
    assert bool(box.contains(0.0, 0.0))
    assert not bool(box.contains(0.0, 0.2))


def test_piece_count_and_ordering(thin_pieces):
    assert thin_pieces.return_time == 8
    assert len(thin_pieces.pieces) == 2 * 8 - 2
    lefts = [float(piece.box.left(0.0)) for piece in thin_pieces.pieces]
    assert lefts == sorted(lefts)
    assert all(piece.box.width > 0.0 for piece in thin_pieces.pieces)
    assert all(1 < piece.order < 9 for piece in thin_pieces.pieces)


def test_central_box_scales_with_return_time(thin_pieces):
    assert bool(thin_pieces.central_box.contains(0.0, 0.0))
    assert 1 / 8 <= thin_pieces.width_ratio <= 8


def test_pieces_carry_certificates(thin_pieces):
    for piece in thin_pieces.pieces:
        cert = piece.expansion_certificate
        assert cert is not None
        assert cert.samples == 200
    data = thin_pieces.to_dict()
    assert data["count"] == 14
    assert data["map"] == NORMAL_FORM
    assert data["jacobian_det"] == pytest.approx(1e-12)
    assert set(data["pieces"][0]) == {"order", "branch", "box", "certificate"}


def test_certificate_is_reproducible_from_its_seed(thin_pieces):
    piece = thin_pieces.pieces[0]
    params = PlaneParams(RETURNING_A, 1e-6)
    again = certify_piece(params, piece.box, piece.order, thin_pieces.base, samples=200, rng_seed=piece.expansion_certificate.rng_seed)
    assert again == piece.expansion_certificate
    fresh = certify_piece(params, piece.box, piece.order, thin_pieces.base, samples=50, rng_seed=11)
    assert (fresh.samples, fresh.rng_seed) == (50, 11)
    assert fresh.min_ratio > 0.0


def test_flat_pieces_are_products_of_simple_intervals(flat_pieces):
    intervals, _ = simple_intervals(ScalarMapParam(RETURNING_A))
    by_lo = sorted(intervals, key=lambda ri: ri.lo)
    for piece, interval in zip(flat_pieces.pieces, by_lo):
        assert piece.order == interval.order
        assert np.allclose(piece.box.left_x, interval.lo, atol=1e-12)
        assert np.allclose(piece.box.right_x, interval.hi, atol=1e-12)


def test_base_piece_is_a_unit(flat_pieces):
    params = PlaneParams(RETURNING_A, 0.0)
    target = flat_pieces.pieces[3]
    product = star_product(params, base_piece(flat_pieces.base), target)
    assert product.order == target.order
    assert np.allclose(product.box.left_x, target.box.left_x, atol=1e-12)
    assert np.allclose(product.box.right_x, target.box.right_x, atol=1e-12)


def test_star_product_nests_inside_the_first_piece(flat_pieces):
    params = PlaneParams(RETURNING_A, 0.0)
    first, second = flat_pieces.pieces[0], flat_pieces.pieces[-1]
    product = star_product(params, first, second)
    assert product.order == first.order + second.order
    assert product.branch == first.branch + second.branch
    assert np.all(product.box.left_x >= first.box.left_x - 1e-12)
    assert np.all(product.box.right_x <= first.box.right_x + 1e-12)


def test_star_product_is_associative_without_coupling(flat_pieces):
    params = PlaneParams(RETURNING_A, 0.0)
    p1, p2, p3 = sorted(flat_pieces.pieces, key=lambda pc: pc.order)[:3]
    left = star_product(params, star_product(params, p1, p2), p3)
    right = star_product(params, p1, star_product(params, p2, p3))
    assert left.order == right.order == p1.order + p2.order + p3.order
    assert left.branch == right.branch
    assert np.allclose(left.box.left_x, right.box.left_x, atol=1e-11)
    assert np.allclose(left.box.right_x, right.box.right_x, atol=1e-11)


def test_flat_star_product_pulls_back_the_second_interval(flat_pieces):
    params = PlaneParams(RETURNING_A, 0.0)
    p = ScalarMapParam(RETURNING_A)
    for first, second in ((flat_pieces.pieces[0], flat_pieces.pieces[-1]), (flat_pieces.pieces[-1], flat_pieces.pieces[2])):
        product = star_product(params, first, second)
        target = RealInterval(float(second.box.left_x[0]), float(second.box.right_x[0]))
        expected = pull_back_interval(p, target, first.branch)
        assert np.allclose(product.box.left_x, expected.lo, atol=1e-11)
        assert np.allclose(product.box.right_x, expected.hi, atol=1e-11)


def test_collapsed_target_is_not_admissible(flat_pieces):
    params = PlaneParams(RETURNING_A, 0.0)
    base = flat_pieces.base
    mid = 0.5 * (base.left_x + base.right_x)
    line = PlanePiece(PlaneBox(base.y_nodes, mid, mid, base.theta), 1, (1,))
    result = star_product(params, flat_pieces.pieces[0], line)
    assert isinstance(result, NotAdmissible)
    assert result.order == flat_pieces.pieces[0].order + 1


def test_target_outside_the_image_fails(flat_pieces):
    params = PlaneParams(RETURNING_A, 0.0)
    base = flat_pieces.base
    far = PlanePiece(PlaneBox(base.y_nodes, base.left_x + 5.0, base.right_x + 5.0, base.theta), 1, (1,))
    with pytest.raises(PullbackFailure):
        star_product(params, flat_pieces.pieces[0], far)


def test_late_return_gives_count_mismatch():
    # the innermost order-8 pieces fail the extension test here
    with pytest.raises(CountMismatch):
        simple_pieces(PlaneParams(-2.0 + 1e-4, 1e-6), nodes=NODES, samples=10)


def test_no_return_at_chebyshev():
    with pytest.raises(ReturnTimeNotFound):
        simple_pieces(PlaneParams(-2.0, 1e-6), nodes=NODES, samples=10)
