import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_LINES = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call" and "criterion" in item.fixturenames:
        label, notes = item.funcargs["criterion"]
        status = "PASS" if rep.passed else "FAIL"
        _LINES[label] = f"{status}  {label}" + (f": {'; '.join(notes)}" if notes else "")


@pytest.fixture
def criterion(request):
    """Collects a label and detail notes for the acceptance summary line."""
    marker = request.node.get_closest_marker("criterion")
    notes = []
    yield marker.args[0], notes


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): one acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_LINES, key=lambda s: int(s.split()[0])):
        terminalreporter.write_line(_LINES[label])
