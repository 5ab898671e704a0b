import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.optimize import brentq

from superswap import rng
from superswap.model import DecayParams, cavity_ket, dicke_basis, prepare_swap_input, psi_minus, psi_plus
from superswap.qmath import StateVector, trace_distance
from superswap.swap import (
    PHASE_CORRECTION,
    EfficiencyModel,
    OutcomeKind,
    analytic_rho_c,
    analytic_rho_c_eta,
    apply_efficiency,
    branch_weights,
    classify_and_correct,
    crossover_time,
    post_select,
    success_probability,
    superradiant_posterior,
    two_photon_probability,
    vacuum_bracket,
)
from superswap.trajectories import master_equation_evolve, simulate_ensemble

ds = st.floats(0.02, 0.45)


def quadrature_weights(p, T):
    """Integrate the single-emission densities of the S0 and T0 branches."""
    g, G = p.gamma, p.Gamma
    ts = brentq(lambda t: (g + G) * math.exp(-(g + G) * t) - (g - G) * math.exp(-(g - G) * t), 1e-9, 100.0)
    sup = lambda t: (g + G) * math.exp(-(g + G) * t)
    sub = lambda t: (g - G) * math.exp(-(g - G) * t)
    c = min(T, ts)
    # T0 branch carries psi+; corrected to psi- if early. S0 carries psi-; flipped if early.
    right = 0.25 * (quad(sup, 0, c)[0] + quad(sub, c, T)[0])
    wrong = 0.25 * (quad(sub, 0, c)[0] + quad(sup, c, T)[0])
    # T1 branch with exactly one emission leaves the cavities in |00>
    a, b = g + G, 2 * g
    one_sup = a / (b - a) * (math.exp(-a * T) - math.exp(-b * T))
    a2 = g - G
    one_sub = a2 / (b - a2) * (math.exp(-a2 * T) - math.exp(-b * T))
    return {"vacuum": 0.25 * (one_sup + one_sub), "psi_minus": right, "psi_plus": wrong}


@given(ds)
def test_crossover_is_density_crossing(d):
    p = DecayParams(d)
    ts = crossover_time(p)
    g, G = p.gamma, p.Gamma
    assert (g + G) * math.exp(-(g + G) * ts) == pytest.approx((g - G) * math.exp(-(g - G) * ts), rel=1e-12)
    assert superradiant_posterior(p, ts) == pytest.approx(0.5)
    assert superradiant_posterior(p, 0.5 * ts) > 0.5 > superradiant_posterior(p, 2 * ts)


def test_crossover_domain():
    with pytest.raises(ValueError):
        crossover_time(DecayParams(0.5))  # Gamma = 0
    with pytest.raises(ValueError):
        crossover_time(DecayParams(0.7))  # Gamma < 0


@pytest.mark.parametrize("d", [0.02, 0.1, 0.25, 0.4])
@pytest.mark.parametrize("T", [0.2, 1.0, 5.0, 50.0])
def test_branch_weights_match_quadrature(d, T):
    p = DecayParams(d)
    got, ref = branch_weights(p, T), quadrature_weights(p, T)
    for k in ref:
        assert got[k] == pytest.approx(ref[k], abs=1e-10)


def test_two_photon_probability_matches_master_equation():
    for d, T in [(0.1, 0.7), (0.3, 3.0)]:
        p = DecayParams(d)
        t1 = StateVector((2, 2, 2, 2), np.kron(dicke_basis().T1.amplitudes, [1, 0, 0, 0]))
        rho = master_equation_evolve(t1.projector(), p, T, dt=0.002).matrix
        ground = np.kron(dicke_basis().Tm1.amplitudes, np.eye(4)[0])
        assert two_photon_probability(p, T) == pytest.approx(np.vdot(ground, rho @ ground).real, abs=1e-9)
        assert vacuum_bracket(p, T) == pytest.approx(2 * two_photon_probability(p, T), abs=1e-12)


def test_asymptotic_weights():
    p = DecayParams(0.1)
    w = branch_weights(p, 1e4)
    k = p.kappa
    g, G = p.gamma, p.Gamma
    assert w["vacuum"] == pytest.approx(0, abs=1e-12)
    assert w["psi_minus"] == pytest.approx(0.25 * (1 - k ** ((g + G) / (2 * G)) + k ** ((g - G) / (2 * G))))
    assert w["psi_minus"] + w["psi_plus"] == pytest.approx(0.5)
    assert w["psi_minus"] > w["psi_plus"]


def test_phase_correction_maps_psi_plus_to_minus():
    assert np.allclose(PHASE_CORRECTION @ psi_plus(), psi_minus())
    assert np.allclose(PHASE_CORRECTION @ cavity_ket(0, 0), cavity_ket(0, 0))


@given(ds, st.floats(0.05, 20.0), st.floats(0.0, 1.0))
def test_efficiency_state_is_consistent(d, T, eta):
    p = DecayParams(d)
    rho = analytic_rho_c_eta(p, T, eta)
    assert np.all(np.linalg.eigvalsh(rho.matrix) > -1e-14)
    # single detection: one of one photon, or exactly one of two
    w = branch_weights(p, T)
    expected = eta * sum(w.values()) + 2 * eta * (1 - eta) * two_photon_probability(p, T) / 4
    assert rho.trace == pytest.approx(expected, abs=1e-12)
    assert success_probability(p, T, eta) == pytest.approx(rho.trace)


def test_efficiency_model_bounds():
    with pytest.raises(ValueError):
        EfficiencyModel(1.2)
    assert analytic_rho_c_eta(DecayParams(0.1), 5.0, 0.0).trace == 0.0


def _record(times, final):
    from superswap.trajectories import Channel, EmissionEvent, TrajectoryRecord

    return TrajectoryRecord(tuple(EmissionEvent(t, Channel.SYMMETRIC) for t in times), StateVector((2, 2, 2, 2), final))


def test_classify_outcomes():
    p = DecayParams(0.1)
    ts = crossover_time(p)
    atoms_g = dicke_basis().Tm1.amplitudes
    fin = np.kron(atoms_g, psi_plus())
    early = classify_and_correct(_record([0.5 * ts], fin), p, 5.0)
    assert early.kind is OutcomeKind.SUCCESS_PSI_PLUS_CORRECTED and early.kind.success
    assert np.allclose(early.cavity_state.matrix, np.outer(psi_minus(), psi_minus()))
    late = classify_and_correct(_record([2 * ts], fin), p, 5.0)
    assert late.kind is OutcomeKind.SUCCESS_PSI_MINUS
    assert np.allclose(late.cavity_state.matrix, np.outer(psi_plus(), psi_plus()))
    assert classify_and_correct(_record([], fin), p, 5.0).kind is OutcomeKind.FAILURE_ZERO_PHOTONS
    assert classify_and_correct(_record([1.0, 2.0], fin), p, 5.0).kind is OutcomeKind.FAILURE_TWO_PHOTONS
    with pytest.raises(ValueError):
        classify_and_correct(_record([1.0, 2.0, 3.0], fin), p, 5.0)


def test_classify_flags_vanishing_collective_rate():
    out = classify_and_correct(_record([0.3], np.kron(dicke_basis().Tm1.amplitudes, psi_plus())), DecayParams(0.5), 5.0)
    assert out.ambiguous and out.kind is OutcomeKind.SUCCESS_PSI_MINUS


def test_post_select_agrees_with_record_path():
    p, T, eta, seed = DecayParams(0.1), 5.0, 0.7, 4
    batch = simulate_ensemble(prepare_swap_input(), p, T, 400, seed)
    ps = post_select(batch, p, eta, seed)
    kept = []
    for i in range(400):
        rec = apply_efficiency(batch.record(i), EfficiencyModel(eta), rng.RngStream(seed, i))
        out = classify_and_correct(rec, p, T)
        if out.kind.success:
            kept.append(out.cavity_state.matrix)
    assert len(kept) == ps.n_retained
    assert np.allclose(np.array(kept), ps.cavity_states)


def test_post_selected_mixture_matches_closed_form():
    p, T = DecayParams(0.1), 5.0
    batch = simulate_ensemble(prepare_swap_input(), p, T, 30_000, 17)
    for eta in (1.0, 0.7):
        ps = post_select(batch, p, eta, 17)
        ref = analytic_rho_c_eta(p, T, eta)
        assert trace_distance(ps.mixture(), ref.normalized()) < 0.03
        assert ps.success_prob == pytest.approx(ref.trace, abs=4 * math.sqrt(ref.trace / 30_000))


def test_channel_labels_give_perfect_sorting():
    p, T = DecayParams(0.1), 5.0
    batch = simulate_ensemble(prepare_swap_input(), p, T, 5000, 2)
    ps = post_select(batch, p, 1.0, 2, use_channel_labels=True)
    m = ps.mixture().matrix
    # oracle labels leave only psi- and vacuum
    assert abs(np.vdot(psi_plus(), m @ psi_plus())) < 1e-12
    assert analytic_rho_c(p, T).trace == pytest.approx(sum(branch_weights(p, T).values()))
