import math

import numpy as np
import pytest

from spinchain.spin_model import ChainParams
from spinchain.teleport import InputQubit

PAPER_OMEGA = (100.0, 200.0, 400.0, 800.0)


@pytest.fixture
def params():
    return ChainParams(PAPER_OMEGA, 10.0, 0.4)


@pytest.fixture
def qubit():
    return InputQubit(1 / 3, math.sqrt(8) / 3)


def random_qubits(n, seed=0):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    return [InputQubit(a, b) for a, b in z]


def pytest_configure(config):
    config.acceptance_lines = []


@pytest.fixture
def verdict(request):
    """Record and print one PASS/FAIL line; return the flag for the assert."""

    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        request.config.acceptance_lines.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
