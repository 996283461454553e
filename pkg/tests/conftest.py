import logging
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(__file__)))

from settings import reset_settings  # noqa: E402


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run fine-grid acceptance checks")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: fine-grid solves, skipped unless --runslow is given")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def fresh_settings():
    """Every test sees settings re-read from its own environment."""
    reset_settings()
    yield
    reset_settings()
    # handlers created by cli.main hold the stderr of the test that made them
    logging.getLogger("gridhodge").handlers.clear()
