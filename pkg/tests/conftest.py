import hypothesis
import numpy as np
import pytest

from superswap.model import DecayParams, prepare_swap_input

hypothesis.settings.register_profile("default", max_examples=30, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def report():
    """Record one pass/fail line per acceptance criterion, then assert."""

    def _report(label, passed, detail):
        ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'}  {label}: {detail}")
        print(ACCEPTANCE_LINES[-1])
        assert passed, f"{label}: {detail}"

    return _report


@pytest.fixture(scope="session")
def p01():
    return DecayParams(0.1)


@pytest.fixture(scope="session")
def swap_input():
    return prepare_swap_input()


def random_density(gen, dim=4, rank=None):
    rank = rank or dim
    g = gen.normal(size=(dim, rank)) + 1j * gen.normal(size=(dim, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real


def random_pure(gen, dim):
    v = gen.normal(size=dim) + 1j * gen.normal(size=dim)
    return v / np.linalg.norm(v)


def random_unitary2(gen):
    q, r = np.linalg.qr(gen.normal(size=(2, 2)) + 1j * gen.normal(size=(2, 2)))
    return q * (np.diag(r) / np.abs(np.diag(r)))
