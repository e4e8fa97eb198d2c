import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cascade_sim.figures import FIGURE_PARAMS, FIGURE_SUBSYSTEM  # noqa: E402
from cascade_sim.model import CascadeParams, SubsystemParams  # noqa: E402

GOLDEN = Path(__file__).parent / "golden"
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def fig2():
    return FIGURE_PARAMS


@pytest.fixture
def fig2_sub():
    return FIGURE_SUBSYSTEM


def random_params(rng, high=10.0, phi=True) -> CascadeParams:
    r = rng.uniform(0, high, 10)
    r[4] -= high / 2
    r[9] -= high / 2
    return CascadeParams(SubsystemParams(*r[:5]), SubsystemParams(*r[5:]),
                         rng.uniform(0, 2 * np.pi) if phi else 0.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
