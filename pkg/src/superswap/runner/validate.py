"""Oracle cross-checks run by the ``validate`` subcommand."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from ..model import DecayParams, dicke_basis, jump_operators, prepare_swap_input
from ..qmath import trace_distance
from ..swap import analytic_rho_c, analytic_rho_c_eta, crossover_time, post_select
from ..trajectories import ensemble_density, master_equation_evolve, simulate_ensemble
from ..witnesses import chsh_max, chsh_max_numeric, steering_parameter, werner
from .config import DEFAULT_D_GRID, DISTANCE_SWEEP_T, TIME_SWEEP_D, ExperimentConfig

TD_TOL = 0.02


@dataclass
class Check:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def check_jump_operators(p: DecayParams, jumps_fn) -> Check:
    j1, j2 = jumps_fn(p)
    db = dicke_basis()
    cav = np.zeros(4)
    cav[0] = 1.0

    def full(v):
        return np.kron(v.amplitudes, cav)

    errs = [
        np.linalg.norm(j1 @ full(db.T1) - math.sqrt(p.rate_super) * full(db.T0)),
        np.linalg.norm(j1 @ full(db.S0)),
        np.linalg.norm(j2 @ full(db.T1) + math.sqrt(p.rate_sub) * full(db.S0)),
    ]
    worst = max(errs)
    return Check("jump operators on Dicke states", worst < 1e-12, f"max error {worst:.2e}")


def check_mc_vs_master(cfg, p, jumps_fn) -> Check:
    psi = prepare_swap_input()
    jumps = jumps_fn(p)
    worst = 0.0
    for t in (0.5, 1.0, 2.0, 5.0):
        mc = ensemble_density(psi, p, t, cfg.n_trajectories, cfg.master_seed, workers=cfg.workers, jumps=jumps)
        me = master_equation_evolve(psi.projector(), p, t, jumps=jumps)
        worst = max(worst, trace_distance(mc, me))
    return Check("trajectories vs master equation", worst <= TD_TOL, f"max trace distance {worst:.4f} (tol {TD_TOL})")


def check_mc_vs_closed_form(cfg, p, T, jumps_fn, crossover_fn) -> Check:
    batch = simulate_ensemble(prepare_swap_input(), p, T, cfg.n_trajectories, cfg.master_seed,
                              workers=cfg.workers, jumps=jumps_fn(p))
    worst = 0.0
    for eta in (1.0, 0.8, 0.6):
        ps = post_select(batch, p, eta, cfg.master_seed)
        ref = analytic_rho_c_eta(p, T, eta).normalized()
        worst = max(worst, trace_distance(ps.mixture(), ref))
    return Check("post-selected ensemble vs closed form", worst <= TD_TOL, f"max trace distance {worst:.4f} (tol {TD_TOL})")


def check_chsh_closed_vs_numeric(p, T, n_random: int = 20, seed: int = 7) -> Check:
    gen = np.random.default_rng(seed)
    states = [analytic_rho_c(p, T).normalized().matrix]
    for _ in range(n_random):
        g = gen.normal(size=(4, 4)) + 1j * gen.normal(size=(4, 4))
        m = g @ g.conj().T
        states.append(m / np.trace(m).real)
    worst = max(abs(chsh_max(s)[0] - chsh_max_numeric(s)) for s in states)
    return Check("closed-form vs numeric B_max", worst <= 1e-6, f"max deviation {worst:.2e}")


def werner_thresholds() -> tuple[float, float]:
    steer = brentq(lambda q: steering_parameter(werner(q), 3) - 1.0, 0.0, 1.0, xtol=1e-12)
    chsh = brentq(lambda q: chsh_max(werner(q))[0] - 2.0, 0.0, 1.0, xtol=1e-12)
    return steer, chsh


def check_werner() -> Check:
    steer, chsh = werner_thresholds()
    err = max(abs(steer - 1 / math.sqrt(3)), abs(chsh - 1 / math.sqrt(2)))
    return Check("Werner thresholds", err <= 1e-6, f"steering {steer:.8f}, CHSH {chsh:.8f}")


def check_crossover(gamma: float, crossover_fn) -> Check:
    worst = 0.0
    for d in DEFAULT_D_GRID:
        p = DecayParams(d, gamma)
        ts = crossover_fn(p)
        g, G, k = p.gamma, p.Gamma, p.kappa
        worst = max(
            worst,
            abs((g + G) * math.exp(-(g + G) * ts) - (g - G) * math.exp(-(g - G) * ts)),
            abs(math.exp(-(g + G) * ts) - k ** ((g + G) / (2 * G))),
            abs(math.exp(-(g - G) * ts) - k ** ((g - G) / (2 * G))),
        )
    return Check("crossover time vs kappa exponents", worst <= 1e-12, f"max residual {worst:.2e}")


def validate(cfg: ExperimentConfig | None = None, jumps_fn: Callable = jump_operators,
             crossover_fn: Callable = crossover_time) -> list[Check]:
    """Run every oracle check; ``jumps_fn``/``crossover_fn`` exist for mutation testing."""
    cfg = cfg or ExperimentConfig()
    d = cfg.d_over_lambda[0] if cfg.d_over_lambda else TIME_SWEEP_D
    T = cfg.T[0] if cfg.T else DISTANCE_SWEEP_T
    p = DecayParams(d, cfg.gamma)
    return [
        check_jump_operators(p, jumps_fn),
        check_mc_vs_master(cfg, p, jumps_fn),
        check_mc_vs_closed_form(cfg, p, T, jumps_fn, crossover_fn),
        check_chsh_closed_vs_numeric(p, T),
        check_werner(),
        check_crossover(cfg.gamma, crossover_fn),
    ]
