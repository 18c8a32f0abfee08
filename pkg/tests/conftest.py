import sys

import numpy as np
import pytest

from soundrange.problem import SrpInstance
from soundrange.space import LpSpace


@pytest.fixture
def f1():
    """R^1, sensors 0 and 1, source 0.5 emitted at t0 = 0."""
    return SrpInstance.from_truth(LpSpace(1, 2.0), [[0.0], [1.0]], [0.5], 0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20191001)


def pytest_terminal_summary(terminalreporter):
    mod = next((m for name, m in list(sys.modules.items()) if name.endswith("test_acceptance")), None)
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for line in sorted(results, key=lambda l: int(l.split()[2])):
            terminalreporter.write_line(line)
