import pytest

from tlcat.category_zoo import build_fibonacci, build_ising, su2, su2_level
from tlcat.monoidal_system import MonoidalSystem


@pytest.fixture(scope="session")
def fib():
    return build_fibonacci()


@pytest.fixture(scope="session")
def ising():
    return build_ising()


@pytest.fixture(scope="session")
def su2_small():
    return su2(1.3, max_label=4)


@pytest.fixture(scope="session")
def level3():
    return su2_level(3)


def with_entries(sys, changes=None, drop=()):
    """Copy of ``sys`` with some F-symbol entries replaced or removed."""
    table = dict(sys.f_entries())
    table.update(changes or {})
    for key in drop:
        table.pop(key)
    return MonoidalSystem(sys.labels, sys.unit, sys.rules, table, window=sys.window, name=sys.name + "*",
                          meta=dict(sys.meta))


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when != "call":
                continue
            for key, value in rep.user_properties:
                if key == "acceptance":
                    lines.append((value[0], f"{'PASS' if outcome == 'passed' else 'FAIL'}  criterion {value[0]:>2}: {value[1]}"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
