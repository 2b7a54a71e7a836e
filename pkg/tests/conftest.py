from __future__ import annotations

from pathlib import Path

import pytest

from histbank import kernels

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(params=sorted(kernels.available_backends()))
def backend(request):
    """Each available kernel implementation in turn."""
    return kernels.available_backends()[request.param]


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


# -- acceptance summary -------------------------------------------------

_CRITERIA: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _CRITERIA[number] = (title, "PASS" if report.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, verdict = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {verdict}  {title}")
