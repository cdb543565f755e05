import json
import logging

import pytest

from puzzleforge import __version__
from puzzleforge.cli_logging_setup import configure_logging
from puzzleforge.utils.logging import LOGGER_NAME, build_context, contextual_log


@pytest.fixture
def log_file(tmp_path):
    path = tmp_path / "run.log"
    logger = configure_logging(level="DEBUG", fmt="json", log_file=str(path))
    yield path
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()


def records(path):
    for handler in logging.getLogger(LOGGER_NAME).handlers:
        handler.flush()
    return [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]


def test_build_context_drops_unset_fields():
    assert build_context("puzzle") == {"command": "puzzle"}
    assert build_context("select", batch=3, window=[-2.0, -1.9]) == {"command": "select", "batch": 3, "window": [-2.0, -1.9]}
    assert build_context() == {}


def test_records_carry_structured_fields(log_file):
    contextual_log('info', "started", extra=build_context("measure"), operation="command_start", params={"a": -2.0})
    (record,) = records(log_file)
    assert record["message"] == "started"
    assert record["levelname"] == "INFO"
    assert record["command"] == "measure"
    assert record["operation"] == "command_start"
    assert record["params"] == {"a": -2.0}
    assert record["cli_version"] == __version__
    assert record["operation_id"]


def test_supplied_operation_id_is_kept(log_file):
    contextual_log('debug', "step", operation_id="fixed-id")
    assert records(log_file)[0]["operation_id"] == "fixed-id"


def test_unknown_level_logs_at_info(log_file):
    contextual_log('chatty', "hello")
    assert records(log_file)[0]["levelname"] == "INFO"


def test_reconfiguring_replaces_the_handler(log_file, tmp_path):
    configure_logging(level="INFO", fmt="plain", log_file=str(tmp_path / "second.log"))
    ours = [h for h in logging.getLogger(LOGGER_NAME).handlers if getattr(h, '_puzzleforge', False)]
    assert len(ours) == 1
