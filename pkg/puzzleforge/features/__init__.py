"""
features/__init__.py

Command manifest and registry for the puzzleforge CLI. Each command driver is registered with
metadata used to build the argparse subcommands and dispatch handlers.
"""

from .classify_sweep import classify_sweep
from .henon_report import henon_report
from .measure_report import measure_report
from .parameter_selection import parameter_selection
from .puzzle_report import puzzle_report

# Each entry: key, label, emoji, group, handler, description
COMMAND_MANIFEST = [
    {"key": "puzzle", "label": "Puzzle levels and regular cover", "emoji": "🧩", "group": "Interval dynamics", "handler": puzzle_report, "description": "Tabulate the puzzle pieces of one order and the regular intervals covering A."},
    {"key": "classify", "label": "Strong-regularity sweep", "emoji": "🔎", "group": "Parameter space", "handler": classify_sweep, "description": "Classify a grid of parameters by their critical itinerary through regular intervals."},
    {"key": "select", "label": "Binding-based parameter selection", "emoji": "🧮", "group": "Parameter space", "handler": parameter_selection, "description": "Exclude parameters whose bound time grows too large and report the surviving windows."},
    {"key": "measure", "label": "Invariant measures and exponents", "emoji": "📐", "group": "Interval dynamics", "handler": measure_report, "description": "Estimate the invariant density and the Lyapunov exponent of x**2 + a."},
    {"key": "henon", "label": "Henon attractor and boxes", "emoji": "🌀", "group": "Plane dynamics", "handler": henon_report, "description": "Fixed points, exponents, attractor clouds, the unstable manifold, trapping, simple pieces and their star products for the Henon map."},
]

COMMAND_REGISTRY = {c["key"]: c["handler"] for c in COMMAND_MANIFEST}
