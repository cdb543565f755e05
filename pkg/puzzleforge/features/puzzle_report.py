"""
puzzle_report.py

The `puzzle` command: the puzzle level of a given order as a CSV table, the regular cover of A up
to order_cap as JSON, and optionally a root-scan verification of the level's cut points.
"""
import dataclasses
import time

from puzzleforge.config import RunConfig
from puzzleforge.dynamics.puzzle import brute_force_roots, puzzle_level
from puzzleforge.dynamics.regular_cover import enumerate_regular, monte_carlo_uncovered
from puzzleforge.dynamics.scalar import ScalarMapParam, critical_return_time, fixed_points
from puzzleforge.utils.decorators import command_error_handler
from puzzleforge.utils.logging import build_context, contextual_log
from puzzleforge.utils.message_utils import info, warning
from puzzleforge.utils.output_utils import OutputSet, summary_table
from puzzleforge.utils.progress_utils import spinner

VERIFY_GRID = 1_000_000


def level_rows(level):
    return [
        {"index": piece.index, "order": piece.order, "lo": piece.lo, "hi": piece.hi, "length": piece.interval.length}
        for piece in level.pieces
    ]


def verify_cut_points(p: ScalarMapParam, order: int, cut_points, grid: int = VERIFY_GRID):
    """Largest distance between the recursive cut points and the root-scan oracle, or None on a count mismatch."""
    roots = brute_force_roots(p, order, grid)
    if len(roots) != len(cut_points):
        return {"matched": False, "recursive": len(cut_points), "oracle": len(roots), "max_deviation": None}
    deviation = max((abs(r - c) for r, c in zip(roots, cut_points)), default=0.0)
    return {"matched": True, "recursive": len(cut_points), "oracle": len(roots), "max_deviation": deviation}


@command_error_handler('puzzle')
def puzzle_report(config: RunConfig, config_path: str = None) -> dict:
    """
    Write the order-n puzzle table and the cover report for P_a.
    Returns:
        dict: summary of what was computed (piece count, cover rate, verification).
    """
    context = build_context("puzzle")
    started = time.perf_counter()
    contextual_log('info', f"🧩 [Puzzle] Starting puzzle report for a={config.a!r}, order={config.order}", operation="command_start", params=config.to_dict(), extra=context)
    p = ScalarMapParam(config.a)
    outputs = OutputSet(config.command_dir, "puzzle", context)
    tag = [("a", p.a), ("order", config.order)]

    with spinner(f"Building puzzle level {config.order}..."):
        level = puzzle_level(p, config.order)
    outputs.csv(tag, level_rows(level), item_name="Puzzle level")

    with spinner(f"Enumerating regular intervals up to order {config.order_cap}..."):
        cover = enumerate_regular(p, config.order_cap, config.kappa)
        if config.monte_carlo:
            cover = dataclasses.replace(cover, monte_carlo=monte_carlo_uncovered(cover, config.monte_carlo, config.rng_seed))
    outputs.json([("a", p.a), ("cover", config.order_cap)], cover.to_dict(), item_name="Cover report")

    summary = {
        "a": p.a,
        "order": config.order,
        "pieces": len(level.pieces),
        "alpha": fixed_points(p).alpha,
        "return_time": critical_return_time(p, config.max_steps),
        "regular_intervals": len(cover.regular_intervals),
        "uncovered_at_cap": cover.uncovered_measure[-1] if cover.uncovered_measure else None,
        "rate": cover.fitted_rate,
    }
    if config.verify:
        with spinner("Verifying cut points against the root scan..."):
            summary["verification"] = verify_cut_points(p, config.order, level.cut_points)
        check = summary["verification"]
        if check["matched"]:
            info(f"Cut points match the root scan (max deviation {check['max_deviation']:.3e})", extra=context, command="puzzle")
        else:
            warning(f"Root scan found {check['oracle']} cut points, recursion found {check['recursive']}", extra=context, command="puzzle")
        outputs.json([("a", p.a), ("order", config.order), ("verify", 1)], summary["verification"], item_name="Verification")

    summary_table(
        [[k, v] for k, v in summary.items() if k != "verification"],
        headers=["quantity", "value"],
        title="🧩 Puzzle summary",
    )
    outputs.finalize(config.to_dict(), config_path)
    contextual_log('info', "🧩 [Puzzle] Puzzle report complete.", operation="command_end", status="success", duration_ms=round((time.perf_counter() - started) * 1000.0, 3), extra=context)
    return summary
