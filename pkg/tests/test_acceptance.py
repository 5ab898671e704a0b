"""Acceptance criteria, one test and one reported PASS/FAIL line each."""

import math
import time

import numpy as np
from scipy.optimize import brentq

from superswap.model import DecayParams, prepare_swap_input
from superswap.qmath import trace_distance
from superswap.runner import cli
from superswap.runner.config import DEFAULT_D_GRID, DEFAULT_ETA_GRID, DEFAULT_T_GRID, ExperimentConfig
from superswap.runner.scenarios import delayed_choice_experiment, steering_into_past
from superswap.runner.sweeps import sweep_distance, sweep_waiting_time
from superswap.swap import analytic_rho_c, analytic_rho_c_eta, crossover_time, post_select
from superswap.trajectories import ensemble_density, master_equation_evolve, simulate_ensemble
from superswap.witnesses import chsh_max, chsh_max_numeric, evaluate, steering_parameter, werner

from conftest import random_density

N = 100_000
SEED = 20130412
P = DecayParams(0.1)


def test_c1_trajectories_match_master_equation(report):
    psi = prepare_swap_input()
    start = time.perf_counter()
    dists = {}
    for t in (0.5, 1.0, 2.0, 5.0):
        mc = ensemble_density(psi, P, t, N, SEED)
        me = master_equation_evolve(psi.projector(), P, t)
        dists[t] = trace_distance(mc, me)
    elapsed = time.perf_counter() - start
    ok = max(dists.values()) <= 0.02 and elapsed < 60
    detail = ", ".join(f"t={t}: {v:.4f}" for t, v in dists.items())
    report("C1 trajectories vs master equation", ok, f"{detail} (tol 0.02), {elapsed:.1f}s")


def test_c2_post_selection_matches_closed_form(report):
    T = 5.0
    batch = simulate_ensemble(prepare_swap_input(), P, T, N, SEED)
    dists = {1.0: trace_distance(post_select(batch, P, 1.0, SEED).mixture(), analytic_rho_c(P, T).normalized())}
    for eta in (0.8, 0.6):
        ref = analytic_rho_c_eta(P, T, eta).normalized()
        dists[eta] = trace_distance(post_select(batch, P, eta, SEED).mixture(), ref)
    ok = max(dists.values()) <= 0.02
    report("C2 post-selection vs closed form", ok, ", ".join(f"eta={e}: {v:.4f}" for e, v in dists.items()) + " (tol 0.02)")


def test_c3_witness_exactness(report):
    r = evaluate(werner(1.0))
    singlet_err = max(abs(r.s3 - 3), abs(r.s2 - 2), abs(r.b_max - 2 * math.sqrt(2)))
    steer = brentq(lambda q: steering_parameter(werner(q), 3) - 1.0, 0.0, 1.0, xtol=1e-12)
    bell = brentq(lambda q: chsh_max(werner(q))[0] - 2.0, 0.0, 1.0, xtol=1e-12)
    werner_err = max(abs(steer - 1 / math.sqrt(3)), abs(bell - 1 / math.sqrt(2)))
    gen = np.random.default_rng(2024)
    states = [random_density(gen, rank=int(gen.integers(1, 5))) for _ in range(100)]
    numeric_err = max(abs(chsh_max(s)[0] - chsh_max_numeric(s)) for s in states)
    ok = singlet_err <= 1e-9 and werner_err <= 1e-6 and numeric_err <= 1e-6
    report(
        "C3 witness exactness", ok,
        f"singlet err {singlet_err:.1e}, Werner steer {steer:.8f} CHSH {bell:.8f}, "
        f"numeric vs closed max dev {numeric_err:.1e} on 100 states",
    )


def test_c4_efficiency_threshold(report):
    T = 5.0

    def witnesses(eta):
        return evaluate(analytic_rho_c_eta(P, T, eta))

    eta_star = brentq(lambda e: witnesses(e).b_max - 2.0, 0.05, 1.0, xtol=1e-10)
    below = [e for e in np.linspace(0.05, eta_star, 400)[:-1] if witnesses(e).s3 > 1.0]
    ok = 0.74 <= eta_star <= 0.84 and len(below) > 0
    detail = f"eta* = {eta_star:.4f} (window [0.74, 0.84]); S3 > 1 below eta* down to eta = {min(below):.3f}" if below \
        else f"eta* = {eta_star:.4f}; no S3 > 1 below eta*"
    report("C4 efficiency threshold at d=0.1, T=5", ok, detail)


def test_c5_steering_dominates_chsh(report):
    rows = sweep_distance(ExperimentConfig()) + sweep_waiting_time(ExperimentConfig())
    rows = [r for r in rows if r.success_prob > 0]
    n_bell = sum(r.b_max > 2 for r in rows)
    bad = [r for r in rows if r.b_max > 2 and not r.s3 > 1]
    expected = len(DEFAULT_ETA_GRID) * (len(DEFAULT_D_GRID) + len(DEFAULT_T_GRID))
    ok = not bad and len(rows) == expected
    report("C5 CHSH region inside steering region", ok, f"{len(rows)} grid points, {n_bell} violate CHSH, {len(bad)} outside steering")


def test_c6_crossover_consistency(report):
    worst_cross = worst_kappa = 0.0
    for d in DEFAULT_D_GRID:
        p = DecayParams(d)
        g, G, k = p.gamma, p.Gamma, p.kappa
        ts = crossover_time(p)
        worst_cross = max(worst_cross, abs((g + G) * math.exp(-(g + G) * ts) - (g - G) * math.exp(-(g - G) * ts)))
        worst_kappa = max(
            worst_kappa,
            abs(math.exp(-(g + G) * ts) - k ** ((g + G) / (2 * G))),
            abs(math.exp(-(g - G) * ts) - k ** ((g - G) / (2 * G))),
        )
    ok = worst_cross <= 1e-12 and worst_kappa <= 1e-12
    report("C6 crossover time", ok, f"density residual {worst_cross:.1e}, kappa-power residual {worst_kappa:.1e} over {len(DEFAULT_D_GRID)} distances")


def test_c7_delayed_choice_subsets(report):
    rep = delayed_choice_experiment(ExperimentConfig(n_trajectories=N, master_seed=SEED))
    parts = []
    ok = True
    for name, st in list(rep.subsets.items()) + [("unsorted", rep.unsorted)]:
        sig = st.chsh.sigmas_above_bound
        single = name.startswith("one_photon")
        ok &= (sig >= 3) if single else (sig < 3)
        parts.append(f"{name} {st.chsh.value:.3f}+-{st.chsh.stderr:.3f} ({sig:+.1f} sigma)")
    report("C7 delayed-choice subsets", ok, "; ".join(parts))


def test_c8_steering_into_the_past(report):
    rep = steering_into_past(ExperimentConfig(n_trajectories=N, master_seed=SEED))
    st = rep.groups["single_photon"].steering
    ok = st.sigmas_above_bound >= 3 and rep.ordering_ok()
    report(
        "C8 three-time steering", ok,
        f"single-photon S3 = {st.s3:.4f} +- {st.stderr:.4f} ({st.sigmas_above_bound:.1f} sigma), "
        f"t1 < t2 < t3 for all {len(rep.eve)} records: {rep.ordering_ok()}",
    )


def test_c9_worker_count_reproducibility(report, tmp_path):
    args = ["sweep-distance", "--mode", "both", "--d", "0.05,0.1", "--eta", "1,0.7",
            "--trajectories", "20000", "--seed", "77"]
    outs = []
    for workers in (1, 3):
        path = tmp_path / f"w{workers}.csv"
        assert cli.main(args + ["--workers", str(workers), "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    again = tmp_path / "again.csv"
    cli.main(args + ["--workers", "1", "--out", str(again)])
    ok = outs[0] == outs[1] == again.read_bytes()
    report("C9 reproducibility across worker counts", ok, f"1-worker vs 3-worker CSV ({len(outs[0])} bytes) identical: {outs[0] == outs[1]}")
