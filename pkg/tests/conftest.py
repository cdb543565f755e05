import pytest

from puzzleforge.dynamics.scalar import ScalarMapParam
from puzzleforge.utils.rich_console import set_quiet

NEAR_CHEBYSHEV = -2.0 + 1e-4


@pytest.fixture(autouse=True)
def quiet_console(tmp_path, monkeypatch):
    """No console noise and no log file in the working tree."""
    set_quiet(True)
    monkeypatch.setenv("PUZZLEFORGE_LOG_FILE", str(tmp_path / "puzzleforge.log"))
    for var in ("PUZZLEFORGE_WORKERS", "PUZZLEFORGE_OUTPUT_DIR", "PUZZLEFORGE_RNG_SEED"):
        monkeypatch.delenv(var, raising=False)
    yield
    set_quiet(False)


@pytest.fixture
def chebyshev():
    return ScalarMapParam(-2.0)


@pytest.fixture
def near_chebyshev():
    return ScalarMapParam(NEAR_CHEBYSHEV)


@pytest.fixture
def output_dir(tmp_path):
    return tmp_path / "out"
