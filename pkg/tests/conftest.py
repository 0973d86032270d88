import numpy as np
import pytest

from bakerlab import ConstructionParams


@pytest.fixture(scope="session")
def p1():
    return ConstructionParams.theorem1()


@pytest.fixture(scope="session")
def p2():
    return ConstructionParams.theorem2()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per acceptance criterion."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(n, ok, detail=""):
        lines.append((n, bool(ok), detail))
        return bool(ok)
    return record


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for n, ok, detail in sorted(lines, key=lambda t: t[0]):
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
