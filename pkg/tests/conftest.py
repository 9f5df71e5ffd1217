import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pdbas import KernelSpec, build_grid, build_layout

settings.register_profile("pdbas", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("pdbas")


@pytest.fixture
def layout():
    return build_layout(2.0, 0.2)


@pytest.fixture
def grid512(layout):
    return build_grid(layout, 512)


@pytest.fixture
def tri():
    return KernelSpec.triangular(0.2)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report_criterion():
    """Record one PASS/FAIL line for an acceptance criterion before asserting it."""
    def record(number: int, title: str, passed: bool, detail: str) -> bool:
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} -- {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
