"""
puzzleforge command-line interface.

    puzzleforge puzzle   --a=-2 --order=1
    puzzleforge classify --window -2:-1.999 --samples 1e4
    puzzleforge select   --window -2e0:-1.999 --Nmax 200
    puzzleforge measure  --a=-2 --density --bins 1000
    puzzleforge henon    --a=-1.4 --b=-0.3 --lyapunov -n 1e7

Flags mirror RunConfig fields; values are validated by RunConfigSchema, not by argparse.
Exit codes: 0 ok, 2 configuration, 3 numerical failure, 4 resource budget.
"""
import argparse
import sys
from typing import Dict, List, Optional, Sequence

from dotenv import load_dotenv
from marshmallow import ValidationError

from puzzleforge import __version__
from puzzleforge.cli_logging_setup import configure_logging
from puzzleforge.config import ConfigLoader
from puzzleforge.errors import ConfigError, PuzzleforgeError
from puzzleforge.features import COMMAND_MANIFEST, COMMAND_REGISTRY
from puzzleforge.utils.logging import contextual_log
from puzzleforge.utils.message_utils import error
from puzzleforge.utils.rich_console import set_quiet

# name -> (option strings, takes a value, help)
OPTIONS: Dict[str, tuple] = {
    "a": (("--a",), True, "quadratic parameter a in [-2, 1/4]"),
    "b": (("--b",), True, "Henon parameter b in (-1, 1)"),
    "window": (("--window",), True, "parameter window lo:hi"),
    "order": (("--order",), True, "puzzle order"),
    "order_cap": (("--order-cap",), True, "largest order searched for regular intervals"),
    "kappa": (("--kappa",), True, "extension margin of A, in (0, 1)"),
    "theta": (("--theta",), True, "allowed proportion of non-simple orders"),
    "depth": (("--depth",), True, "itinerary depth"),
    "max_steps": (("--max-steps",), True, "step budget for the critical return time"),
    "samples": (("--samples",), True, "grid points, Monte-Carlo or certificate samples"),
    "prefix_depth": (("--prefix-depth",), True, "itinerary prefix depth for the parapuzzle decomposition"),
    "monte_carlo": (("--monte-carlo",), True, "Monte-Carlo samples for the uncovered measure (0 = off)"),
    "n_max": (("--Nmax", "--n-max"), True, "last time of the binding induction"),
    "grid": (("--grid",), True, "selection grid cells"),
    "delta": (("--delta",), True, "critical window half-width"),
    "delta_sep": (("--delta-sep",), True, "binding separation scale"),
    "alpha_frac": (("--alpha-frac",), True, "bound-time fraction for condition H"),
    "alpha_ba": (("--alpha-ba",), True, "basic-assumption exponent"),
    "ell_min": (("--ell-min",), True, "minimum critical-curve length"),
    "bins": (("--bins",), True, "histogram bins"),
    "iterates": (("--iterates",), True, "iterates per seed (power-iteration cap in operator mode)"),
    "seeds": (("--seeds",), True, "orbit seeds (manifold segment points for henon)"),
    "n": (("-n",), True, "orbit length"),
    "x0": (("--x0",), True, "orbit start"),
    "mode": (("--mode",), True, "density estimator: orbit or operator"),
    "nodes": (("--nodes",), True, "spline nodes per stable arc"),
    "verify": (("--verify",), False, "check cut points against a root scan"),
    "trend": (("--trend",), False, "report the survivor-fraction trend toward -2"),
    "density": (("--density",), False, "invariant-density histogram"),
    "exponent": (("--exponent",), False, "Lyapunov exponent"),
    "convergence": (("--convergence",), False, "empirical-measure convergence"),
    "lyapunov": (("--lyapunov",), False, "Lyapunov exponents and Kaplan-Yorke dimension"),
    "attractor": (("--attractor",), False, "attractor point cloud and box dimension"),
    "trapping": (("--trapping",), False, "classical trapping-region check"),
    "pieces": (("--pieces",), False, "simple pieces of the box construction"),
    "star": (("--star",), False, "star products of the leftmost simple piece with every simple piece"),
    "manifold": (("--manifold",), False, "unstable manifold of alpha"),
    "manifold_steps": (("--manifold-steps",), True, "forward iterates of the local unstable segment"),
}

COMMAND_OPTIONS: Dict[str, Sequence[str]] = {
    "puzzle": ("a", "order", "order_cap", "kappa", "max_steps", "verify", "monte_carlo"),
    "classify": ("window", "samples", "depth", "theta", "order_cap", "kappa", "prefix_depth", "trend"),
    "select": ("window", "n_max", "grid", "delta", "delta_sep", "alpha_frac", "alpha_ba", "ell_min"),
    "measure": ("a", "density", "exponent", "convergence", "bins", "iterates", "seeds", "n", "x0", "mode"),
    "henon": ("a", "b", "lyapunov", "attractor", "trapping", "pieces", "star", "manifold", "n", "x0", "kappa", "nodes", "samples", "seeds", "manifold_steps"),
}

GLOBAL_VALUE_FLAGS = ("--config", "--output-dir", "--workers", "--rng-seed")
VALUE_FLAGS = frozenset(GLOBAL_VALUE_FLAGS).union(
    flag for flags, takes_value, _ in OPTIONS.values() if takes_value for flag in flags
)
NON_FLAG_KEYS = ("command", "config", "verbose", "quiet")


def _looks_numeric(token: str) -> bool:
    if not token.startswith('-'):
        return False
    try:
        for part in token.split(':'):
            float(part)
    except ValueError:
        return False
    return True


def join_negative_values(argv: Sequence[str], value_flags=VALUE_FLAGS) -> List[str]:
    """
    Rewrite '--flag -2e0:-1.999' as '--flag=-2e0:-1.999' so argparse does not read a negative
    value as another option.
    """
    out: List[str] = []
    i = 0
    while i < len(argv):
        token = argv[i]
        if token in value_flags and i + 1 < len(argv) and _looks_numeric(argv[i + 1]):
            out.append(f"{token}={argv[i + 1]}")
            i += 2
            continue
        out.append(token)
        i += 1
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='flat key=value (or .yaml) config file')
    common.add_argument('--output-dir', dest='output_dir', help='base output directory (default: output)')
    common.add_argument('--workers', help='worker processes (default: PUZZLEFORGE_WORKERS or 1)')
    common.add_argument('--rng-seed', dest='rng_seed', help='seed for stochastic steps')
    common.add_argument('--verbose', action='store_true', help='debug-level logging')
    common.add_argument('--quiet', action='store_true', help='no console output')

    parser = argparse.ArgumentParser(prog="puzzleforge", description="Puzzle, parameter-selection and Henon numerics.")
    parser.add_argument('--version', action='version', version=f"puzzleforge {__version__}")
    sub = parser.add_subparsers(dest='command', required=True)
    for entry in COMMAND_MANIFEST:
        cmd = sub.add_parser(entry["key"], parents=[common], help=f"{entry['emoji']} {entry['label']}", description=entry["description"])
        for name in COMMAND_OPTIONS[entry["key"]]:
            flags, takes_value, help_text = OPTIONS[name]
            if takes_value:
                cmd.add_argument(*flags, dest=name, help=help_text)
            else:
                cmd.add_argument(*flags, dest=name, action='store_true', default=None, help=help_text)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(join_negative_values(argv))
    configure_logging(level="DEBUG" if args.verbose else None)
    set_quiet(args.quiet)
    flags = {k: v for k, v in vars(args).items() if k not in NON_FLAG_KEYS}
    try:
        config = ConfigLoader(args.config).load(args.command, flags)
        COMMAND_REGISTRY[args.command](config, args.config)
    except ConfigError as e:
        error(str(e), command=args.command, suggestion="see `puzzleforge <command> --help` for ranges")
        return e.exit_code
    except ValidationError as e:
        error(f"Invalid configuration: {e.messages}", command=args.command)
        return ConfigError.exit_code
    except PuzzleforgeError as e:
        return e.exit_code
    except ValueError as e:
        contextual_log('error', f"🧩 [CLI] Rejected input: {e}", operation="command_end", status="error", error_type="ValueError", command=args.command)
        return ConfigError.exit_code
    except KeyboardInterrupt:
        return 130
    return 0
