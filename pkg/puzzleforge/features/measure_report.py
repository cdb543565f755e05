"""
measure_report.py

The `measure` command: invariant-density histogram, Lyapunov exponent and empirical-measure
convergence for P_a. With none of --density/--exponent/--convergence given, density and
exponent are both produced. At a = -2 the histogram is compared with the exact arcsine density.
"""
import time

import numpy as np

from puzzleforge.config import RunConfig
from puzzleforge.dynamics.measures import (
    arcsine_reference,
    density_support,
    empirical_convergence,
    exponent_from_density,
    l1_distance,
    lyapunov_1d,
    ulam_density,
)
from puzzleforge.dynamics.scalar import ScalarMapParam
from puzzleforge.utils.decorators import command_error_handler
from puzzleforge.utils.logging import build_context, contextual_log
from puzzleforge.utils.output_utils import OutputSet, summary_table
from puzzleforge.utils.progress_utils import spinner

CHEBYSHEV_A = -2.0


def starting_point(p: ScalarMapParam, config: RunConfig) -> float:
    """x0 from the config, else a seeded uniform draw from the density support."""
    if config.x0 is not None:
        return config.x0
    support = density_support(p)
    return float(np.random.default_rng(config.rng_seed).uniform(support.lo, support.hi))


def checkpoints(n: int):
    marks = [10 ** k for k in range(3, 12) if 10 ** k < n]
    return marks + [n]


@command_error_handler('measure')
def measure_report(config: RunConfig, config_path: str = None) -> dict:
    context = build_context("measure")
    started = time.perf_counter()
    contextual_log('info', f"📐 [Measure] Starting measure report for a={config.a!r}", operation="command_start", params=config.to_dict(), extra=context)
    p = ScalarMapParam(config.a)
    outputs = OutputSet(config.command_dir, "measure", context)
    want_density = config.density or not (config.exponent or config.convergence)
    want_exponent = config.exponent or not (config.density or config.convergence)
    summary = {"a": p.a, "rng_seed": config.rng_seed}

    histogram = None
    if want_density:
        with spinner(f"Estimating the invariant density ({config.mode}, {config.bins} bins)..."):
            histogram = ulam_density(p, config.bins, config.iterates, config.seeds, config.rng_seed,
                                     mode=config.mode, workers=config.workers)
        outputs.csv([("a", p.a), ("bins", config.bins), ("mode", config.mode)], histogram.rows(), ["bin_center", "mass"], item_name="Density histogram")
        summary["density_exponent"] = exponent_from_density(histogram)
        if p.a == CHEBYSHEV_A:
            summary["arcsine_l1"] = l1_distance(histogram, arcsine_reference(config.bins))

    x0 = starting_point(p, config)
    if want_exponent:
        with spinner(f"Averaging log|2x| over {config.n} iterates..."):
            summary["lyapunov"] = lyapunov_1d(p, x0, config.n)
        summary["x0"] = x0

    if config.convergence:
        reference = histogram
        if reference is None:
            reference = arcsine_reference(config.bins) if p.a == CHEBYSHEV_A else ulam_density(
                p, config.bins, config.iterates, config.seeds, config.rng_seed, mode=config.mode, workers=config.workers)
        with spinner("Tracking empirical-measure convergence..."):
            distances = empirical_convergence(p, x0, checkpoints(config.n), reference)
        outputs.csv([("a", p.a), ("convergence", config.n)], [{"n": n, "l1": d} for n, d in distances], ["n", "l1"], item_name="Convergence table")
        summary["x0"] = x0
        summary["final_l1"] = distances[-1][1]

    outputs.json([("a", p.a), ("summary", 1)], summary, item_name="Measure summary")
    summary_table([[k, v] for k, v in summary.items()], headers=["quantity", "value"], title="📐 Measure summary")
    outputs.finalize(config.to_dict(), config_path)
    contextual_log('info', "📐 [Measure] Measure report complete.", operation="command_end", status="success", duration_ms=round((time.perf_counter() - started) * 1000.0, 3), extra=context)
    return summary
