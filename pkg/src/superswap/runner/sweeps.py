"""Distance and waiting-time sweeps of the swapped-state witnesses."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from .. import rng as rngmod
from ..model import DecayParams, prepare_swap_input
from ..swap import analytic_rho_c_eta, post_select
from ..trajectories import simulate_ensemble
from ..witnesses import evaluate, steering_parameter, chsh_max
from .config import DEFAULT_D_GRID, DEFAULT_T_GRID, DISTANCE_SWEEP_T, TIME_SWEEP_D, ConfigError, ExperimentConfig

N_BOOTSTRAP = 200


@dataclass
class ResultRow:
    d_over_lambda: float
    T: float
    eta: float
    s2: float
    s3: float
    b_max: float
    success_prob: float
    source: str
    s2_stderr: Optional[float] = None
    s3_stderr: Optional[float] = None
    b_max_stderr: Optional[float] = None
    success_prob_stderr: Optional[float] = None


COLUMNS = tuple(f.name for f in fields(ResultRow))


def _witness_triplet(m: np.ndarray) -> tuple[float, float, float]:
    return steering_parameter(m, 2), steering_parameter(m, 3), chsh_max(m)[0]


def analytic_row(p: DecayParams, T: float, eta: float) -> ResultRow:
    rho = analytic_rho_c_eta(p, T, eta)
    tr = rho.trace
    if tr <= 0:
        nan = math.nan
        return ResultRow(p.d_over_lambda, T, eta, nan, nan, nan, 0.0, "analytic")
    w = evaluate(rho)
    return ResultRow(p.d_over_lambda, T, eta, w.s2, w.s3, w.b_max, tr, "analytic")


def bootstrap_witnesses(states: np.ndarray, seed_key, n_boot: int = N_BOOTSTRAP) -> np.ndarray:
    """Poisson-bootstrap standard errors of (S2, S3, B_max) for a mixture of per-record states."""
    m = len(states)
    gen = np.random.default_rng(seed_key)
    w = gen.poisson(1.0, size=(n_boot, m)).astype(float)
    flat = states.reshape(m, -1)
    sums = w @ flat
    tot = w.sum(axis=1)
    vals = np.array([_witness_triplet((s / t).reshape(4, 4)) for s, t in zip(sums, tot) if t > 0])
    return vals.std(axis=0, ddof=1)


def monte_carlo_rows(p: DecayParams, T: float, etas, cfg: ExperimentConfig, point: int) -> list[ResultRow]:
    """Simulate once per (d, T) and post-select at every efficiency with shared draws."""
    batch = simulate_ensemble(prepare_swap_input(), p, T, cfg.n_trajectories, cfg.master_seed, workers=cfg.workers)
    rows = []
    for k, eta in enumerate(etas):
        ps = post_select(batch, p, eta, cfg.master_seed)
        n = ps.n_total
        sp = ps.success_prob
        sp_err = math.sqrt(max(sp * (1 - sp), 0.0) / n)
        if ps.n_retained < 2:
            nan = math.nan
            rows.append(ResultRow(p.d_over_lambda, T, eta, nan, nan, nan, sp, "monte_carlo", nan, nan, nan, sp_err))
            continue
        s2, s3, b = _witness_triplet(ps.cavity_states.mean(axis=0))
        e2, e3, eb = bootstrap_witnesses(ps.cavity_states, [int(cfg.master_seed), rngmod.BOOTSTRAP, point, k])
        rows.append(ResultRow(p.d_over_lambda, T, eta, s2, s3, b, sp, "monte_carlo", e2, e3, eb, sp_err))
    return rows


def _sweep(points, cfg: ExperimentConfig) -> list[ResultRow]:
    rows: list[ResultRow] = []
    for i, (d, T) in enumerate(points):
        p = DecayParams(d, cfg.gamma)
        if cfg.mode in ("analytic", "both"):
            rows.extend(analytic_row(p, T, eta) for eta in cfg.eta)
        if cfg.mode in ("monte_carlo", "both"):
            rows.extend(monte_carlo_rows(p, T, cfg.eta, cfg, i))
    return rows


def sweep_distance(cfg: ExperimentConfig) -> list[ResultRow]:
    """Witnesses versus inter-atomic distance at one fixed waiting time."""
    T = cfg.T if cfg.T is not None else (DISTANCE_SWEEP_T,)
    if len(T) != 1:
        raise ConfigError("sweep-distance needs a single waiting time T")
    ds = cfg.d_over_lambda if cfg.d_over_lambda is not None else DEFAULT_D_GRID
    return _sweep([(d, T[0]) for d in ds], cfg)


def sweep_waiting_time(cfg: ExperimentConfig) -> list[ResultRow]:
    """Witnesses versus waiting time at one fixed distance."""
    ds = cfg.d_over_lambda if cfg.d_over_lambda is not None else (TIME_SWEEP_D,)
    if len(ds) != 1:
        raise ConfigError("sweep-time needs a single distance d_over_lambda")
    Ts = cfg.T if cfg.T is not None else DEFAULT_T_GRID
    return _sweep([(ds[0], T) for T in Ts], cfg)
