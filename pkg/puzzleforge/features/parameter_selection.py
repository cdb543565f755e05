"""
parameter_selection.py

The `select` command: binding-based parameter selection over a window. Writes the selection
report, the surviving critical-curve windows, the survivor measure after each N, and a
Collet-Eckmann tail check of every sampled survivor.
"""
import time

from puzzleforge.config import RunConfig
from puzzleforge.dynamics.binding import BindingKnobs, collet_eckmann_estimate, expansion_outside, run_selection
from puzzleforge.dynamics.intervals import RealInterval
from puzzleforge.dynamics.scalar import ScalarMapParam
from puzzleforge.errors import CriticalHit
from puzzleforge.utils.decorators import command_error_handler
from puzzleforge.utils.logging import build_context, contextual_log
from puzzleforge.utils.message_utils import warning
from puzzleforge.utils.output_utils import OutputSet, summary_table
from puzzleforge.utils.progress_utils import progress_bar, spinner

WINDOW_FIELDS = ["lo", "hi", "N", "bindings", "curve_length", "image_lo", "image_hi", "merged_cells"]


def knobs_from(config: RunConfig) -> BindingKnobs:
    return BindingKnobs(
        delta=config.delta,
        delta_sep=config.delta_sep,
        alpha_frac=config.alpha_frac,
        alpha_ba=config.alpha_ba,
        ell_min=config.ell_min,
    )


def survivor_tails(survivors, n: int):
    """Collet-Eckmann rate and tail minimum along each survivor's critical orbit."""
    rows = []
    for a in progress_bar(survivors, desc="Collet-Eckmann tails"):
        try:
            estimate = collet_eckmann_estimate(ScalarMapParam(a), n)
            rows.append({"a": a, "rate": estimate.rate, "tail_min": estimate.tail_min})
        except CriticalHit:
            rows.append({"a": a, "rate": None, "tail_min": None})
    return rows


@command_error_handler('select')
def parameter_selection(config: RunConfig, config_path: str = None) -> dict:
    context = build_context("select")
    started = time.perf_counter()
    contextual_log('info', f"🧮 [Select] Starting selection on {config.window} up to N={config.n_max}", operation="command_start", params=config.to_dict(), extra=context)
    window = RealInterval(*config.window)
    knobs = knobs_from(config)
    outputs = OutputSet(config.command_dir, "select", context)
    tag = [("lo", window.lo), ("hi", window.hi), ("nmax", config.n_max)]

    with spinner(f"Building binding ledgers on {config.grid} cells..."):
        report = run_selection(window, config.n_max, knobs, config.grid, config.workers)
    if not report.windows:
        warning(f"No critical-curve window survived on {config.window} up to N={config.n_max}", extra=context, command="select")
    outputs.json(tag, report.to_dict(), item_name="Selection report")
    outputs.csv(tag + [("windows", 1)], report.csv_rows(), WINDOW_FIELDS, item_name="Critical-curve windows")
    outputs.csv(
        tag + [("measure", 1)],
        [{"N": N, "survivor_measure": m} for N, m in enumerate(report.per_n_survivor_measure)],
        item_name="Survivor measure",
    )

    tails = survivor_tails(report.survivors, config.n_max)
    outputs.csv(tag + [("tails", 1)], tails, ["a", "rate", "tail_min"], item_name="Collet-Eckmann tails")
    midpoint_map = ScalarMapParam(window.midpoint)
    expansion = {metric: expansion_outside(midpoint_map, config.delta, 8, metric) for metric in ("adapted", "flat")}

    summary = {
        "survivor_measure": report.survivor_measure,
        "sampled_survivor_measure": report.sampled_survivor_measure,
        "windows": len(report.windows),
        "sampled_survivors": len(report.survivors),
        "positive_tails": sum(1 for row in tails if row["tail_min"] is not None and row["tail_min"] > 0.0),
        "expansion_adapted": expansion["adapted"].lambda_estimate,
        "expansion_flat": expansion["flat"].lambda_estimate,
        **{f"trimmed_{k}": v for k, v in report.trimmed.items()},
    }
    summary_table([[k, v] for k, v in summary.items()], headers=["quantity", "value"], title="🧮 Selection summary")
    outputs.finalize(config.to_dict(), config_path)
    contextual_log('info', "🧮 [Select] Selection complete.", operation="command_end", status="success", duration_ms=round((time.perf_counter() - started) * 1000.0, 3), extra=context)
    return summary
