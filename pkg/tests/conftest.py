"""Shared fixtures plus the acceptance summary.

Tests marked @pytest.mark.acceptance("<criterion>") get one PASS/FAIL
line each in the terminal summary, so the acceptance status is readable
straight off a plain `pytest` run.
"""
import sys
from pathlib import Path

import numpy as np
import pytest

FIXTURES = Path(__file__).parent / "fixtures"
LOOPBACK = [sys.executable, str(FIXTURES / "loopback_adapter.py")]

_acceptance_results = []


def planted_motif_instance(rng):
    """Series with its tail window planted earlier, plus the true successor.

    Returns (series, window_len, plant_offset, successor). The planted
    copy never overlaps its own successor window or the tail.
    """
    length = int(rng.integers(32, 129))
    window_len = int(rng.integers(4, min(16, (length - 1) // 2) + 1))
    series = rng.uniform(-1.0, 1.0, length)
    offset = int(rng.integers(0, length - 2 * window_len))
    series[offset : offset + window_len] = series[length - window_len :]
    successor = series[offset + window_len : offset + 2 * window_len].copy()
    return series, window_len, offset, successor


@pytest.fixture
def loopback_command():
    return list(LOOPBACK)


def loopback_with(*flags):
    return LOOPBACK + list(flags)


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(label): ties a test to one acceptance criterion"
    )


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    report = yield
    marker = item.get_closest_marker("acceptance")
    if marker and (
        report.when == "call" or (report.when == "setup" and not report.passed)
    ):
        if report.passed:
            outcome = "PASS"
        elif report.skipped:
            outcome = "SKIP"
        else:
            outcome = "FAIL"
        _acceptance_results.append((marker.args[0], outcome))
    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for label, outcome in _acceptance_results:
        terminalreporter.write_line(f"ACCEPTANCE {outcome}: {label}")
