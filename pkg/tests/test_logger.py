import json
import sys

import pytest
from loguru import logger

from src.utils.logger import configure_logging


@pytest.fixture(autouse=True)
def restore_default_sink():
    yield
    logger.remove()
    logger.add(sys.stderr)


def test_stderr_sink_only():
    sink_ids = configure_logging(level="warning")

    assert len(sink_ids) == 1


def test_file_sink(tmp_path):
    log_file = tmp_path / "logs" / "fhnls.log"

    sink_ids = configure_logging(level="DEBUG", log_file=str(log_file))
    logger.debug("grid built")
    logger.info("run finished")
    for sink_id in sink_ids:
        logger.remove(sink_id)

    content = log_file.read_text()
    assert len(sink_ids) == 2
    assert "grid built" in content
    assert "run finished" in content
    assert "| INFO     |" in content


def test_level_filters_file(tmp_path):
    log_file = tmp_path / "fhnls.log"

    sink_ids = configure_logging(level="WARNING", log_file=str(log_file))
    logger.info("hidden")
    logger.warning("energy drift")
    for sink_id in sink_ids:
        logger.remove(sink_id)

    content = log_file.read_text()
    assert "hidden" not in content
    assert "energy drift" in content


def test_serialized_records_carry_bound_context(tmp_path):
    log_file = tmp_path / "fhnls.jsonl"

    sink_ids = configure_logging(level="INFO", log_file=str(log_file), serialize=True)
    logger.bind(run_id="evolve-0123456789ab").info("step accepted")
    for sink_id in sink_ids:
        logger.remove(sink_id)

    record = json.loads(log_file.read_text().splitlines()[0])['record']
    assert record['message'] == "step accepted"
    assert record['extra']['run_id'] == "evolve-0123456789ab"


def test_level_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("LOG_LEVEL", "ERROR")
    log_file = tmp_path / "fhnls.log"

    sink_ids = configure_logging(log_file=str(log_file))
    logger.warning("not written")
    logger.error("written")
    for sink_id in sink_ids:
        logger.remove(sink_id)

    content = log_file.read_text()
    assert "not written" not in content
    assert "written" in content
