"""
classify_sweep.py

The `classify` command: strong-regularity verdicts over a grid of parameters in a window, a
summary with the candidate fraction, and optionally the parapuzzle decomposition of the window
and the survivor-fraction trend toward a = -2.
"""
import time
from collections import Counter

from puzzleforge.config import RunConfig
from puzzleforge.dynamics.intervals import RealInterval
from puzzleforge.dynamics.strong_regularity import (
    Verdict,
    classify_grid,
    parapuzzle_decompose,
    survivor_fraction_trend,
)
from puzzleforge.utils.decorators import command_error_handler
from puzzleforge.utils.logging import build_context, contextual_log
from puzzleforge.utils.message_utils import warning
from puzzleforge.utils.output_utils import OutputSet, summary_table
from puzzleforge.utils.progress_utils import spinner

ROW_FIELDS = ["a", "verdict", "depth", "margin", "M", "reason", "step"]


def grid_points(window: RealInterval, samples: int):
    """Cell centers of a uniform partition of the window into samples cells."""
    width = window.length / samples
    return [window.lo + (i + 0.5) * width for i in range(samples)]


def verdict_summary(results) -> dict:
    counts = Counter(r.verdict for r in results)
    total = len(results)
    candidates = counts.get(Verdict.STRONGLY_REGULAR_CANDIDATE, 0)
    return {
        "samples": total,
        "candidates": candidates,
        "excluded": counts.get(Verdict.EXCLUDED, 0),
        "undetermined": counts.get(Verdict.UNDETERMINED, 0),
        "candidate_fraction": candidates / total if total else 0.0,
        "reasons": dict(sorted(Counter(r.reason for r in results if r.reason).items())),
    }


@command_error_handler('classify')
def classify_sweep(config: RunConfig, config_path: str = None) -> dict:
    context = build_context("classify")
    started = time.perf_counter()
    contextual_log('info', f"🔎 [Classify] Starting sweep on {config.window} with {config.samples} samples", operation="command_start", params=config.to_dict(), extra=context)
    window = RealInterval(*config.window)
    outputs = OutputSet(config.command_dir, "classify", context)
    tag = [("lo", window.lo), ("hi", window.hi), ("samples", config.samples)]

    with spinner(f"Classifying {config.samples} parameters..."):
        results = classify_grid(
            grid_points(window, config.samples), config.depth, config.theta,
            config.order_cap, config.kappa, config.workers,
        )
    outputs.csv(tag, [r.to_row() for r in results], ROW_FIELDS, item_name="Verdict table")
    if results and all(r.verdict == Verdict.UNDETERMINED for r in results):
        warning(f"Every sample is undetermined at depth {config.depth}; raise --depth or --order-cap", extra=context, command="classify")

    summary = {"window": window.to_list(), "depth": config.depth, "theta": config.theta, **verdict_summary(results)}
    if config.prefix_depth is not None:
        with spinner(f"Decomposing the window at prefix depth {config.prefix_depth}..."):
            pieces = parapuzzle_decompose(window, config.prefix_depth, config.order_cap, config.kappa)
        outputs.json(tag + [("prefix", config.prefix_depth)], [w.to_dict() for w in pieces], item_name="Parapuzzle windows")
        summary["parapuzzle_windows"] = len(pieces)
        summary["undetermined_windows"] = sum(not w.determined for w in pieces)
    if config.trend:
        with spinner("Measuring the survivor-fraction trend..."):
            trend = survivor_fraction_trend(
                samples=config.samples, depth=config.depth, theta=config.theta,
                order_cap=config.order_cap, kappa=config.kappa, workers=config.workers,
            )
        outputs.csv([("trend", config.samples)], trend, item_name="Survivor trend")
        summary["trend"] = trend
    outputs.json(tag + [("summary", 1)], summary, item_name="Sweep summary")

    summary_table(
        [[k, summary[k]] for k in ("samples", "candidates", "excluded", "undetermined", "candidate_fraction")],
        headers=["quantity", "value"],
        title="🔎 Classification summary",
    )
    outputs.finalize(config.to_dict(), config_path)
    contextual_log('info', "🔎 [Classify] Sweep complete.", operation="command_end", status="success", duration_ms=round((time.perf_counter() - started) * 1000.0, 3), extra=context)
    return summary
