"""
User-facing message constants and shared numerical defaults for puzzleforge.
"""

FORGE_ICON = "🧩"

SUCCESS = f"{FORGE_ICON} Success!"
ABORTED = f"{FORGE_ICON} Aborted."
FAILED_TO = f"{FORGE_ICON} Failed to {{action}}: {{error}}"
WRITTEN_TO = f"{FORGE_ICON} {{item}} written to {{filename}}"
CONFIG_INVALID = f"{FORGE_ICON} Invalid configuration: {{errors}}"
NUMERICAL_FAILURE = f"{FORGE_ICON} Numerical failure in {{command}}: {{error}}"
RESOURCE_EXHAUSTED = f"{FORGE_ICON} Resource budget exhausted in {{command}}: {{error}}"
MANIFEST_WRITTEN = f"{FORGE_ICON} Manifest written to {{filename}}"
P2_PROXY_NOTE = "binding schedules replayed at the first, middle and last sampled cell centres of each window only"
PARAPUZZLE_PROXY_NOTE = "itinerary prefix compared at window endpoints and midpoint only"

PRECISION_MODE = "binary64"
FLOAT_FORMAT = ".17g"

# Tolerances
EPS_FIX = 1e-12
EPS_DEDUP = 1e-10
EPS_PARAM = 1e-14
CURVE_TOL = 1e-8

# Knob defaults
DEFAULT_KAPPA = 0.05
DEFAULT_THETA = 0.1
DEFAULT_DEPTH = 20
DEFAULT_ORDER_CAP = 20
DEFAULT_MAX_STEPS = 10_000
DEFAULT_DELTA = 0.05
DEFAULT_ALPHA_FRAC = 0.2
DEFAULT_ALPHA_BA = 0.05
DEFAULT_ELL_MIN_FRACTION = 1e-2
DEFAULT_MAX_PIECES = 200_000
DEFAULT_ARC_NODES = 512
DEFAULT_CERT_SAMPLES = 1000
DEFAULT_CERT_C = 0.1
DEFAULT_CERT_LAMBDA = 1.5
DEFAULT_BOX_THETA = 0.1
DEFAULT_RNG_SEED = 20240601
