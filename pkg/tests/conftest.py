import sys
import pytest

from coarsecorona.cayley import ball
from coarsecorona.groups import parse_builtin


@pytest.fixture(scope="session")
def z2_ball_60():
    return ball(parse_builtin("Z2"), 60)


@pytest.fixture(scope="session")
def balls():
    cache = {}

    def get(name, R):
        key = (name, R)
        if key not in cache:
            cache[key] = ball(parse_builtin(name), R)
        return cache[key]
    return get


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
