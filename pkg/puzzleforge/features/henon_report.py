"""
henon_report.py

The `henon` command: fixed points, Lyapunov exponents and Kaplan-Yorke dimension, attractor
point clouds with a box-counting estimate, the classical trapping-region check, and the simple
pieces of the box construction with their star products, and the unstable manifold of alpha.
Fixed points are always reported; with no other flag the exponents are computed too. Plane
quantities use (x**2 + a + y, -b x), Jacobian b; pieces use the normal form (x**2 + a + b y, -b x),
Jacobian b**2.
"""
import math
import time

import numpy as np

from puzzleforge.config import RunConfig
from puzzleforge.constants import CURVE_TOL
from puzzleforge.dynamics.boxes import NORMAL_FORM, NotAdmissible, base_piece, simple_pieces, star_product
from puzzleforge.dynamics.henon import (
    CLASSICAL_QUADRILATERAL,
    PlaneParams,
    attractor_sample,
    box_counting_dimension,
    fixed_points_plane,
    kaplan_yorke_dimension,
    lyapunov_plane,
    trapping_check,
    unstable_manifold_sweep,
)
from puzzleforge.utils.decorators import command_error_handler
from puzzleforge.utils.logging import build_context, contextual_log
from puzzleforge.utils.output_utils import OutputSet, summary_table
from puzzleforge.utils.progress_utils import progress_bar, spinner

SADDLE_FIELDS = ["label", "x", "y", "unstable_eigenvalue", "stable_eigenvalue"]
STAR_FIELDS = ["first", "second", "order", "admissible", "width", "inside_first"]


def saddle_rows(fixed):
    return [
        {"label": label, "x": s.x, "y": s.y, "unstable_eigenvalue": s.unstable_eigenvalue, "stable_eigenvalue": s.stable_eigenvalue}
        for label, s in (("alpha", fixed.alpha), ("beta", fixed.beta))
    ]


def star_rows(params, pieces):
    """
    The leftmost simple piece starred with every simple piece, plus the base piece as left unit.
    Widths are at y = 0.
    """
    first = pieces.pieces[0]
    rows = []
    pairs = [("base", base_piece(pieces.base), 0, first)]
    pairs += [(0, first, j, pc) for j, pc in enumerate(pieces.pieces)]
    for i, left, j, right in progress_bar(pairs, desc="Star products"):
        product = star_product(params, left, right)
        if isinstance(product, NotAdmissible):
            rows.append({"first": i, "second": j, "order": product.order, "admissible": False, "width": product.separation, "inside_first": None})
            continue
        inside = bool(np.all(product.box.left_x >= left.box.left_x - CURVE_TOL) and np.all(product.box.right_x <= left.box.right_x + CURVE_TOL))
        rows.append({"first": i, "second": j, "order": product.order, "admissible": True, "width": product.box.width, "inside_first": inside})
    return rows


@command_error_handler('henon')
def henon_report(config: RunConfig, config_path: str = None) -> dict:
    context = build_context("henon")
    started = time.perf_counter()
    contextual_log('info', f"🌀 [Henon] Starting report for (a, b)=({config.a!r}, {config.b!r})", operation="command_start", params=config.to_dict(), extra=context)
    params = PlaneParams(config.a, config.b)
    outputs = OutputSet(config.command_dir, "henon", context)
    tag = [("a", params.a), ("b", params.b)]
    x0 = config.x0 if config.x0 is not None else 0.0
    want_lyapunov = config.lyapunov or not (config.attractor or config.trapping or config.pieces or config.star or config.manifold)
    summary = {"a": params.a, "b": params.b}

    fixed = fixed_points_plane(params)
    outputs.csv(tag + [("fixed", 2)], saddle_rows(fixed), SADDLE_FIELDS, item_name="Fixed points")
    summary["alpha_x"] = fixed.alpha.x
    summary["beta_x"] = fixed.beta.x

    if want_lyapunov:
        with spinner(f"Propagating a tangent frame for {config.n} steps..."):
            l1, l2 = lyapunov_plane(params, x0, 0.0, config.n)
        summary.update({
            "lambda1": l1,
            "lambda2": l2,
            "lambda_sum": l1 + l2,
            "log_abs_b": math.log(abs(params.b)) if params.b != 0.0 else -math.inf,
            "kaplan_yorke": kaplan_yorke_dimension(l1, l2),
        })

    if config.attractor:
        with spinner(f"Sampling {config.n} attractor points..."):
            cloud = attractor_sample(params, x0, 0.0, config.n)
            slope, counts = box_counting_dimension(cloud)
        outputs.csv(tag + [("cloud", config.n)], ({"x": x, "y": y} for x, y in cloud), ["x", "y"], item_name="Attractor cloud")
        summary["box_dimension"] = slope
        summary["box_counts"] = list(counts)

    if config.manifold:
        with spinner(f"Iterating {config.seeds} points of the local unstable segment..."):
            curve = unstable_manifold_sweep(params, config.seeds, config.manifold_steps)
        outputs.csv(tag + [("manifold", config.manifold_steps)], ({"x": x, "y": y} for x, y in curve), ["x", "y"], item_name="Unstable manifold")
        summary["manifold_points"] = len(curve)

    if config.trapping:
        result = trapping_check(params, CLASSICAL_QUADRILATERAL)
        summary.update({"trapping_passed": result.passed, "trapping_margin": result.margin})

    if config.pieces or config.star:
        with spinner("Continuing simple intervals into boxes..."):
            pieces = simple_pieces(params, config.kappa, config.nodes, config.samples, config.rng_seed)
        outputs.json(tag + [("pieces", pieces.return_time)], pieces.to_dict(), item_name="Simple pieces")
        summary.update({
            "return_time": pieces.return_time,
            "simple_pieces": len(pieces.pieces),
            "certified": sum(1 for piece in pieces.pieces if piece.expansion_certificate and piece.expansion_certificate.passed),
            "central_width_ratio": pieces.width_ratio,
            "pieces_map": NORMAL_FORM,
            "pieces_jacobian_det": params.b ** 2,
        })
        if config.star:
            rows = star_rows(params, pieces)
            outputs.csv(tag + [("star", len(rows))], rows, STAR_FIELDS, item_name="Star products")
            summary["star_admissible"] = sum(1 for row in rows if row["admissible"])

    outputs.json(tag + [("summary", 1)], summary, item_name="Henon summary")
    summary_table([[k, v] for k, v in summary.items() if k != "box_counts"], headers=["quantity", "value"], title="🌀 Henon summary")
    outputs.finalize(config.to_dict(), config_path)
    contextual_log('info', "🌀 [Henon] Henon report complete.", operation="command_end", status="success", duration_ms=round((time.perf_counter() - started) * 1000.0, 3), extra=context)
    return summary
