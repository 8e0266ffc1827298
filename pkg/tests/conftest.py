import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from liereach.pauli import PauliOperator

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

LETTERS = "IXYZ"


def labels(n):
    return st.text(alphabet=LETTERS, min_size=n, max_size=n)


@st.composite
def operators(draw, n=None, max_terms=4, integer=False):
    """Random real Pauli sums; ``n`` may be fixed or drawn from 1..3."""
    if n is None:
        n = draw(st.integers(1, 3))
    k = draw(st.integers(1, max_terms))
    labs = draw(st.lists(labels(n), min_size=k, max_size=k))
    if integer:
        coeffs = draw(st.lists(st.integers(-3, 3), min_size=k, max_size=k))
    else:
        coeffs = draw(st.lists(st.floats(-2, 2, allow_nan=False, allow_infinity=False),
                               min_size=k, max_size=k))
    return PauliOperator(n, list(zip(labs, coeffs)))


@st.composite
def operator_sets(draw, min_size=1, max_size=4, n=None, integer=True):
    if n is None:
        n = draw(st.integers(1, 3))
    size = draw(st.integers(min_size, max_size))
    ops = [draw(operators(n=n, max_terms=3, integer=integer)) for _ in range(size)]
    return [o for o in ops if not o.is_zero()] or [PauliOperator.from_label("X" * n)]


def random_operator(rng: np.random.Generator, n: int, max_terms: int = 4, integer: bool = True):
    k = int(rng.integers(1, max_terms + 1))
    labs = ["".join(rng.choice(list(LETTERS), n)) for _ in range(k)]
    if integer:
        coeffs = rng.integers(-3, 4, k).astype(float)
    else:
        coeffs = rng.uniform(-2, 2, k)
    return PauliOperator(n, list(zip(labs, coeffs)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def report(request):
    """Record one PASS/FAIL line per acceptance criterion, then assert it."""
    lines = request.config._acceptance_lines

    def _report(criterion: str, ok: bool, detail: str) -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
        lines.append(line)
        print(line)
        assert ok, line

    return _report


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
