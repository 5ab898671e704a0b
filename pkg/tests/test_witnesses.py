import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from superswap.model import DecayParams
from superswap.qmath import DensityMatrix
from superswap.swap import analytic_rho_c_eta
from superswap.witnesses import (
    TSIRELSON,
    MeasurementSetting,
    chsh_max,
    chsh_max_numeric,
    chsh_value,
    conditional_expectation,
    correlation_matrix,
    evaluate,
    steering_parameter,
    werner,
)

from conftest import random_density, random_pure, random_unitary2

SINGLET = werner(1.0)


def test_singlet_values():
    r = evaluate(SINGLET)
    assert r.s2 == pytest.approx(2, abs=1e-12)
    assert r.s3 == pytest.approx(3, abs=1e-12)
    assert r.b_max == pytest.approx(TSIRELSON, abs=1e-12)
    assert np.allclose(correlation_matrix(SINGLET), -np.eye(3))


def test_optimal_settings_reach_maximum():
    for rho in (SINGLET, werner(0.8), random_density(np.random.default_rng(1))):
        b, settings = chsh_max(rho)
        assert chsh_value(rho, *settings) == pytest.approx(b, abs=1e-10)


@pytest.mark.parametrize("p", [0.0, 0.3, 0.55, 0.8, 1.0])
def test_werner_closed_forms(p):
    assert steering_parameter(werner(p), 3) == pytest.approx(3 * p * p)
    assert steering_parameter(werner(p), 2) == pytest.approx(2 * p * p)
    assert chsh_max(werner(p))[0] == pytest.approx(2 * math.sqrt(2) * p)


def test_product_states_null():
    gen = np.random.default_rng(5)
    for _ in range(10):
        a, b = random_pure(gen, 2), random_pure(gen, 2)
        rho = np.outer(np.kron(a, b), np.kron(a, b).conj())
        # pure product: B_max = 2 |r_a||r_b| = 2, conditional states equal the marginal
        assert chsh_max(rho)[0] <= 2 + 1e-12
        assert steering_parameter(rho, 3) == pytest.approx(1.0, abs=1e-12)


def test_separable_mixtures_do_not_violate():
    gen = np.random.default_rng(9)
    for _ in range(20):
        m = np.zeros((4, 4), dtype=complex)
        w = gen.dirichlet(np.ones(4))
        for wk in w:
            a, b = random_pure(gen, 2), random_pure(gen, 2)
            m += wk * np.outer(np.kron(a, b), np.kron(a, b).conj())
        assert chsh_max(m)[0] <= 2 + 1e-12
        assert steering_parameter(m, 3) <= 1 + 1e-12


@given(st.integers(0, 2**31))
def test_b_max_local_unitary_invariant(seed):
    gen = np.random.default_rng(seed)
    rho = random_density(gen)
    u = np.kron(random_unitary2(gen), random_unitary2(gen))
    assert chsh_max(u @ rho @ u.conj().T)[0] == pytest.approx(chsh_max(rho)[0], abs=1e-10)


@given(st.integers(0, 2**31))
def test_bounds_and_consistency(seed):
    rho = random_density(np.random.default_rng(seed))
    r = evaluate(rho)
    assert 0 <= r.b_max <= TSIRELSON + 1e-12
    assert 0 <= r.s2 <= r.s3 <= 3 + 1e-12
    for ax in "xyz":
        p_up, e_up = conditional_expectation(rho, ax, 1)
        p_dn, e_dn = conditional_expectation(rho, ax, -1)
        assert p_up + p_dn == pytest.approx(1)
        assert abs(e_up) <= 1 + 1e-12 and abs(e_dn) <= 1 + 1e-12


def test_numeric_maximization_matches_closed_form():
    gen = np.random.default_rng(21)
    states = [random_density(gen, rank=int(gen.integers(1, 5))) for _ in range(30)]
    worst = max(abs(chsh_max(s)[0] - chsh_max_numeric(s)) for s in states)
    assert worst <= 1e-6


def test_input_validation():
    with pytest.raises(ValueError):
        steering_parameter(np.eye(4), 3)  # trace 4
    with pytest.raises(ValueError):
        steering_parameter(SINGLET, 4)
    with pytest.raises(ValueError):
        MeasurementSetting((1.0, 1.0, 0.0))
    with pytest.raises(ValueError):
        chsh_value(SINGLET, [1, 0, 0], [0, 0, 1], [1, 1, 0], [0, 1, 0])
    with pytest.raises(ValueError):
        conditional_expectation(SINGLET, "x", 0)


def test_evaluate_normalizes_sub_normalized_state():
    rho = analytic_rho_c_eta(DecayParams(0.1), 5.0, 1.0)
    assert isinstance(rho, DensityMatrix) and rho.trace < 1
    r = evaluate(rho)
    assert r.b_max == pytest.approx(2.4587, abs=1e-3)
    assert r.chsh_violated and r.steering_violated
