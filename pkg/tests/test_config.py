import pytest

from puzzleforge.config import ConfigLoader, RunConfig, read_config_file
from puzzleforge.errors import ConfigError
from puzzleforge.utils.fields import normalize_key


def load(command, environ=None, config_path=None, **flags):
    return ConfigLoader(config_path, environ={} if environ is None else environ).load(command, flags)


def test_defaults():
    config = load("puzzle", a=-2)
    assert isinstance(config, RunConfig)
    assert config.a == -2.0
    assert config.order == 3
    assert config.kappa == 0.05
    assert config.workers == 1
    assert config.output_dir == "output"


def test_counts_accept_exponent_notation():
    config = load("measure", a="-2", n="1e7", bins="1.5e3")
    assert config.n == 10_000_000
    assert config.bins == 1500


@pytest.mark.parametrize("value", ["2.5e3x", "2500.5", True])
def test_counts_reject_non_integers(value):
    with pytest.raises(ConfigError):
        load("measure", a=-2, n=value)


def test_window_with_negative_exponents():
    config = load("select", window="-2e0:-1.999")
    assert config.window == (-2.0, -1.999)
    assert config.to_dict()["window"] == [-2.0, -1.999]


@pytest.mark.parametrize("window", ["-1:-2", "-3:-1", "-2:-1:0", "a:b", "-2:inf"])
def test_bad_windows(window):
    with pytest.raises(ConfigError):
        load("classify", window=window)


@pytest.mark.parametrize(
    "command, flags",
    [
        ("puzzle", {}),
        ("puzzle", {"a": 0.5}),
        ("henon", {"a": -1.4}),
        ("henon", {"a": -1.4, "b": 1.0}),
        ("classify", {}),
        ("measure", {"a": -2, "bins": 50}),
        ("measure", {"a": -2, "mode": "spectral"}),
        ("henon", {"a": -1.4, "b": -0.3, "nodes": 5}),
        ("puzzle", {"a": -2, "kappa": 1.0}),
        ("puzzle", {"a": -2, "workers": 0}),
    ],
)
def test_invalid_configurations(command, flags):
    with pytest.raises(ConfigError):
        load(command, **flags)


def test_layering_env_file_flags(tmp_path):
    path = tmp_path / "run.env"
    path.write_text("WORKERS=2\nNMAX=70\nWINDOW=-2:-1.999\n")
    environ = {"PUZZLEFORGE_WORKERS": "3", "PUZZLEFORGE_RNG_SEED": "9"}
    config = load("select", environ=environ, config_path=str(path))
    assert config.workers == 2
    assert config.n_max == 70
    assert config.rng_seed == 9
    overridden = load("select", environ=environ, config_path=str(path), workers="4", n_max=None)
    assert overridden.workers == 4
    assert overridden.n_max == 70


def test_yaml_config(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("a: -1.4\nb: -0.3\nlyapunov: true\nseed: 5\ncolour: blue\n")
    config = load("henon", config_path=str(path))
    assert (config.a, config.b) == (-1.4, -0.3)
    assert config.lyapunov
    assert config.rng_seed == 5


def test_nested_yaml_is_rejected(tmp_path):
    path = tmp_path / "run.yml"
    path.write_text("knobs:\n  delta: 0.1\n")
    with pytest.raises(ConfigError):
        read_config_file(str(path))


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        ConfigLoader(str(tmp_path / "absent.env"), environ={})


@pytest.mark.parametrize(
    "key, expected",
    [("--order-cap", "order_cap"), ("NMAX", "n_max"), ("PUZZLEFORGE_SEED", "rng_seed"), ("Delta-Sep", "delta_sep")],
)
def test_normalize_key(key, expected):
    assert normalize_key(key) == expected


def test_config_echo_and_command_dir(tmp_path):
    config = load("puzzle", a=-2, output_dir=str(tmp_path))
    assert "output_dir" not in config.to_dict()
    assert config.command_dir == str(tmp_path / "puzzle")
