"""
config.py

Run configuration for the puzzleforge CLI. One RunConfig per command invocation, validated by a
marshmallow schema and merged from four sources. Priority: command-line flag > config file >
environment variable > default. The config file is a flat key=value text file (read with
python-dotenv) or, when it ends in .yaml/.yml, a flat YAML mapping.
"""
import os
from dataclasses import asdict, dataclass
from typing import Any, Dict, Mapping, Optional, Tuple

import yaml
from dotenv import dotenv_values
from marshmallow import EXCLUDE, ValidationError, fields, post_load, validate, validates_schema

from puzzleforge.constants import (
    CONFIG_INVALID,
    DEFAULT_ALPHA_BA,
    DEFAULT_ALPHA_FRAC,
    DEFAULT_ARC_NODES,
    DEFAULT_DELTA,
    DEFAULT_DEPTH,
    DEFAULT_KAPPA,
    DEFAULT_MAX_STEPS,
    DEFAULT_ORDER_CAP,
    DEFAULT_RNG_SEED,
    DEFAULT_THETA,
)
from puzzleforge.errors import ConfigError
from puzzleforge.utils.fields import BaseOptionsSchema, ExpNumberField, WindowField, normalize_key
from puzzleforge.utils.logging import contextual_log

COMMANDS = ("puzzle", "classify", "select", "measure", "henon")
A_RANGE = (-2.0, 0.25)
ENV_KEYS = {
    "PUZZLEFORGE_WORKERS": "workers",
    "PUZZLEFORGE_OUTPUT_DIR": "output_dir",
    "PUZZLEFORGE_RNG_SEED": "rng_seed",
}
NEEDS_A = ("puzzle", "measure", "henon")
NEEDS_WINDOW = ("classify", "select")


@dataclass(frozen=True)
class RunConfig:
    command: str
    output_dir: str = "output"
    a: Optional[float] = None
    b: Optional[float] = None
    window: Optional[Tuple[float, float]] = None
    order: int = 3
    verify: bool = False
    monte_carlo: int = 0
    theta: float = DEFAULT_THETA
    kappa: float = DEFAULT_KAPPA
    delta: float = DEFAULT_DELTA
    delta_sep: Optional[float] = None
    alpha_frac: float = DEFAULT_ALPHA_FRAC
    alpha_ba: float = DEFAULT_ALPHA_BA
    ell_min: Optional[float] = None
    order_cap: int = DEFAULT_ORDER_CAP
    depth: int = DEFAULT_DEPTH
    max_steps: int = DEFAULT_MAX_STEPS
    n_max: int = 100
    grid: int = 2048
    samples: int = 1000
    prefix_depth: Optional[int] = None
    trend: bool = False
    bins: int = 1000
    iterates: int = 2000
    seeds: int = 1000
    n: int = 100_000
    x0: Optional[float] = None
    mode: str = "orbit"
    density: bool = False
    exponent: bool = False
    convergence: bool = False
    lyapunov: bool = False
    attractor: bool = False
    trapping: bool = False
    pieces: bool = False
    star: bool = False
    manifold: bool = False
    manifold_steps: int = 20
    nodes: int = DEFAULT_ARC_NODES
    rng_seed: int = DEFAULT_RNG_SEED
    workers: int = 1

    @property
    def command_dir(self) -> str:
        return os.path.join(self.output_dir, self.command)

    def to_dict(self) -> Dict[str, Any]:
        """Config echo for manifests; the output directory is left out so relocated runs compare equal."""
        payload = asdict(self)
        payload.pop("output_dir")
        if self.window is not None:
            payload["window"] = [self.window[0], self.window[1]]
        return payload


def _count(minimum: int, default: Optional[int]):
    kwargs = {"validate": validate.Range(min=minimum)}
    if default is None:
        kwargs["allow_none"] = True
        kwargs["load_default"] = None
    else:
        kwargs["load_default"] = default
    return ExpNumberField(**kwargs)


class RunConfigSchema(BaseOptionsSchema):
    """Schema for one CLI run. Unknown keys (e.g. stray entries in a shared config file) are ignored."""

    class Meta:
        unknown = EXCLUDE

    command = fields.Str(required=True, validate=validate.OneOf(COMMANDS))
    a = fields.Float(allow_nan=False, allow_none=True, load_default=None, validate=validate.Range(*A_RANGE))
    b = fields.Float(allow_nan=False, allow_none=True, load_default=None,
                     validate=validate.Range(-1.0, 1.0, min_inclusive=False, max_inclusive=False))
    window = WindowField(allow_none=True, load_default=None)
    order = _count(0, 3)
    verify = fields.Boolean(load_default=False)
    monte_carlo = _count(0, 0)
    theta = fields.Float(load_default=DEFAULT_THETA, validate=validate.Range(0.0, 1.0, min_inclusive=False))
    kappa = fields.Float(load_default=DEFAULT_KAPPA, validate=validate.Range(0.0, 1.0, min_inclusive=False, max_inclusive=False))
    delta = fields.Float(load_default=DEFAULT_DELTA, validate=validate.Range(0.0, 1.0, min_inclusive=False))
    delta_sep = fields.Float(allow_none=True, load_default=None, validate=validate.Range(0.0, min_inclusive=False))
    alpha_frac = fields.Float(load_default=DEFAULT_ALPHA_FRAC, validate=validate.Range(0.0, 1.0))
    alpha_ba = fields.Float(load_default=DEFAULT_ALPHA_BA, validate=validate.Range(0.0))
    ell_min = fields.Float(allow_none=True, load_default=None, validate=validate.Range(0.0))
    order_cap = _count(0, DEFAULT_ORDER_CAP)
    depth = _count(0, DEFAULT_DEPTH)
    max_steps = _count(1, DEFAULT_MAX_STEPS)
    n_max = _count(1, 100)
    grid = _count(2, 2048)
    samples = _count(1, 1000)
    prefix_depth = _count(0, None)
    trend = fields.Boolean(load_default=False)
    bins = _count(100, 1000)
    iterates = _count(1, 2000)
    seeds = _count(1, 1000)
    n = _count(1000, 100_000)
    x0 = fields.Float(allow_nan=False, allow_none=True, load_default=None)
    mode = fields.Str(load_default="orbit", validate=validate.OneOf(("orbit", "operator")))
    density = fields.Boolean(load_default=False)
    exponent = fields.Boolean(load_default=False)
    convergence = fields.Boolean(load_default=False)
    lyapunov = fields.Boolean(load_default=False)
    attractor = fields.Boolean(load_default=False)
    trapping = fields.Boolean(load_default=False)
    pieces = fields.Boolean(load_default=False)
    star = fields.Boolean(load_default=False)
    manifold = fields.Boolean(load_default=False)
    manifold_steps = _count(1, 20)
    nodes = _count(9, DEFAULT_ARC_NODES)
    rng_seed = _count(0, DEFAULT_RNG_SEED)
    workers = _count(1, 1)

    @validates_schema
    def check_command_inputs(self, data, **kwargs):
        command = data.get("command")
        if command in NEEDS_A and data.get("a") is None:
            raise ValidationError(f"'{command}' needs a parameter a in [-2, 1/4].", "a")
        if command == "henon" and data.get("b") is None:
            raise ValidationError("'henon' needs a parameter b in (-1, 1).", "b")
        if command in NEEDS_WINDOW:
            window = data.get("window")
            if window is None:
                raise ValidationError(f"'{command}' needs a window lo:hi.", "window")
            if window[0] < A_RANGE[0] or window[1] > A_RANGE[1]:
                raise ValidationError("Window must lie inside [-2, 1/4].", "window")

    @post_load
    def make_config(self, data, **kwargs):
        return RunConfig(**data)


def read_config_file(path: str) -> Dict[str, Any]:
    """Flat key=value file (dotenv syntax) or flat YAML mapping."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    if path.endswith((".yaml", ".yml")):
        with open(path, 'r', encoding='utf-8') as file:
            loaded = yaml.safe_load(file) or {}
        if not isinstance(loaded, Mapping) or any(isinstance(v, (Mapping, list)) for v in loaded.values()):
            raise ConfigError(f"config file must be a flat mapping: {path}")
        return dict(loaded)
    return dict(dotenv_values(path))


class ConfigLoader:
    """
    Loads and merges configuration for one command run.
    - defaults < environment (PUZZLEFORGE_WORKERS, PUZZLEFORGE_OUTPUT_DIR, PUZZLEFORGE_RNG_SEED)
      < config file < command-line flags.
    - Flags left unset (None) do not override lower layers.
    """

    def __init__(self, config_path: Optional[str] = None, environ: Optional[Mapping[str, str]] = None):
        self.config_path = config_path
        self.environ = os.environ if environ is None else environ
        self.file_values = read_config_file(config_path) if config_path else {}

    def env_values(self) -> Dict[str, Any]:
        return {key: self.environ[env] for env, key in ENV_KEYS.items() if self.environ.get(env)}

    def merged(self, command: str, flags: Optional[Mapping[str, Any]] = None) -> Dict[str, Any]:
        merged: Dict[str, Any] = {}
        for layer in (self.env_values(), self.file_values, dict(flags or {})):
            for k, v in layer.items():
                if v is not None:
                    merged[normalize_key(k)] = v
        merged["command"] = command
        return merged

    def load(self, command: str, flags: Optional[Mapping[str, Any]] = None) -> RunConfig:
        """
        Validate the merged options into a RunConfig.
        Raises:
            ConfigError: on any range or consistency violation, with marshmallow's messages.
        """
        merged = self.merged(command, flags)
        try:
            config = RunConfigSchema().load(merged)
        except ValidationError as err:
            contextual_log('error', f"⚙️ [Config] Validation failed for '{command}': {err.messages}", operation="config_load", status="error", error_type="ValidationError", params={"command": command})
            raise ConfigError(CONFIG_INVALID.format(errors=err.messages)) from err
        contextual_log('debug', f"⚙️ [Config] Loaded configuration for '{command}'", operation="config_load", status="success", params=config.to_dict())
        return config
