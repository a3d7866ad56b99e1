import math
from pathlib import Path

import numpy as np
import pytest

from qctl.qsde import DirectCoupling, QuadraturePlant

DATA = Path(__file__).resolve().parent.parent / "data"


def cavity_plant(delta=0.1, kappa1=0.01, kappa2=0.01):
    A = np.array([[0.0, delta], [-delta, 0.0]])
    B1 = np.array([[0.0, 0.0], [0.0, -2 * math.sqrt(kappa1)]])
    B2 = np.array([[0.0, 0.0], [0.0, -2 * math.sqrt(kappa2)]])
    C = np.array([[2 * math.sqrt(kappa1), 0.0], [0.0, 0.0]])
    return QuadraturePlant(A, B1, B2, C)


def cavity_rc(rc=0.01):
    return DirectCoupling(np.array([[0.0, rc], [rc, 0.0]]))


@pytest.fixture
def plant():
    return cavity_plant()


@pytest.fixture
def rc():
    return cavity_rc()


@pytest.fixture
def data_dir():
    return DATA


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion, then assert it."""

    def record(label, ok, detail=""):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        print(ACCEPTANCE_LINES[-1])
        assert ok, f"{label}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
