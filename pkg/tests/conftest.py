import pytest
from hypothesis import settings

from ordclust.metric import MetricInstance, build_profile

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

A, B, C, D = range(4)


@pytest.fixture
def line():
    """Points a, b, c, d at 0, 1, 3, 7 on the real line."""
    inst = MetricInstance.from_points([[0.0], [1.0], [3.0], [7.0]], "l1")
    return inst, build_profile(inst)


# one summary line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
