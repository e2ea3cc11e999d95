import math

import pytest

from pcg_eur import symmetric_scheme

_RESULTS = []

MATRIX_ANGLES = ((0.0, math.pi / 2), (math.pi / 6, 2 * math.pi / 3))
MATRIX_DS = (2, 3, 4, 5)
ORDERS = (0.5, 2 / 3, 1.0, 2.0, math.inf)


def matrix_schemes():
    return [symmetric_scheme(d, a, b) for d in MATRIX_DS for a, b in MATRIX_ANGLES]


class Recorder:
    def __init__(self, name):
        self.name = name

    def __call__(self, ok, detail=""):
        _RESULTS.append((self.name, bool(ok), detail))
        return bool(ok)


@pytest.fixture
def criterion(request):
    """Call with ``(ok, detail)`` to log one acceptance line; the test still asserts."""
    marker = request.node.get_closest_marker("criterion")
    return Recorder(marker.args[0] if marker else request.node.name)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion label")
    config.addinivalue_line("markers", "slow: long-running campaign")


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
