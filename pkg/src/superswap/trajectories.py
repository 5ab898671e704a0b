"""Quantum-jump Monte Carlo for the collective decay, plus an RK4 Lindblad
integrator used as an independent check.

Between jumps the (unnormalized) state evolves under exp(-i H_eff t) with
H_eff = -(i/2) sum_k J_k^dag J_k. That generator is normal, so in its
eigenbasis the survival probability is a finite sum of exponentials and the
waiting time is found by bisection on it rather than by time stepping.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import rng as rngmod
from .model import GLOBAL_DIMS, DecayParams, jump_operators
from .qmath import DensityMatrix, StateVector

DEFAULT_CHUNK = 8192
TIME_TOL = 1e-12
MAX_EVENTS = 16


class Channel(enum.IntEnum):
    SYMMETRIC = 0
    ANTISYMMETRIC = 1


@dataclass(frozen=True)
class EmissionEvent:
    time: float
    channel: Channel

    def __post_init__(self):
        if not math.isfinite(self.time) or self.time < 0:
            raise ValueError(f"event time must be finite and non-negative, got {self.time}")


@dataclass(frozen=True)
class TrajectoryRecord:
    events: tuple[EmissionEvent, ...]
    final_state: StateVector
    weight: float = 1.0
    # emissions removed by detector inefficiency
    missed: int = 0

    def __post_init__(self):
        times = [e.time for e in self.events]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("events must be strictly increasing in time")


class DecayEngine:
    """Precomputed no-jump propagation for a fixed set of jump operators."""

    def __init__(self, p: DecayParams, jumps: Sequence[np.ndarray] | None = None):
        self.params = p
        self.jumps = tuple(np.asarray(j, dtype=complex) for j in (jumps if jumps is not None else jump_operators(p)))
        k = sum(j.conj().T @ j for j in self.jumps)
        k = 0.5 * (k + k.conj().T)
        lam, u = np.linalg.eigh(k)
        lam = np.where(np.abs(lam) < 1e-13, 0.0, lam)
        if lam.min() < 0:
            raise ValueError("sum of J^dag J must be positive semidefinite")
        self.rates = lam  # norm-squared decay rates of the eigencomponents
        self.basis = u
        # group equal rates: survival is a sum over distinct rates only
        uniq = []
        for r in lam:
            if not any(abs(r - q) < 1e-12 for q in uniq):
                uniq.append(float(r))
        self.group_rates = np.array(uniq)
        self.group_of = np.array([int(np.argmin(np.abs(self.group_rates - r))) for r in lam])
        self.dim = k.shape[0]

    # amplitudes in the eigenbasis
    def to_eig(self, psi: np.ndarray) -> np.ndarray:
        return psi @ self.basis.conj()

    def from_eig(self, c: np.ndarray) -> np.ndarray:
        return c @ self.basis.T

    def group_weights(self, c: np.ndarray) -> np.ndarray:
        w = np.zeros(c.shape[:-1] + (len(self.group_rates),))
        p = np.abs(c) ** 2
        for g in range(len(self.group_rates)):
            w[..., g] = p[..., self.group_of == g].sum(axis=-1)
        return w

    def survival(self, weights: np.ndarray, tau) -> np.ndarray:
        """Norm squared after no-jump evolution for ``tau`` (weights summing to 1)."""
        tau = np.asarray(tau, dtype=float)[..., None]
        with np.errstate(invalid="ignore"):
            decay = np.where(self.group_rates == 0.0, 1.0, np.exp(-self.group_rates * tau))
        return np.sum(weights * decay, axis=-1)

    def propagate(self, c: np.ndarray, tau: np.ndarray) -> np.ndarray:
        """Unnormalized no-jump evolution of eigenbasis amplitudes (``tau`` may be inf)."""
        tau = np.asarray(tau, dtype=float)[..., None]
        with np.errstate(invalid="ignore"):
            decay = np.where(self.rates == 0.0, 1.0, np.exp(-0.5 * self.rates * tau))
        return c * decay

    def _time_bound(self, weights: np.ndarray, u: np.ndarray) -> np.ndarray:
        """A time by which survival has certainly dropped to ``u``.

        Survival is at most w0 + (1 - w0) exp(-r_min t), with w0 the dark weight
        and r_min the smallest positive rate.
        """
        dark = self.group_rates == 0.0
        w0 = weights[:, dark].sum(axis=1)
        r_min = self.group_rates[~dark].min()
        frac = np.clip((u - w0) / np.maximum(1.0 - w0, 1e-300), 1e-300, 1.0)
        return -np.log(frac) / r_min * (1.0 + 1e-9) + TIME_TOL

    def step(self, psi: np.ndarray, t_now: np.ndarray, t_max: float, u_wait: np.ndarray, u_chan: np.ndarray):
        """Advance a batch of normalized states to their next emission or to ``t_max``.

        Returns ``(jumped, t_event, channel, new_psi)``; rows that do not jump
        are evolved to ``t_max`` and renormalized.
        """
        psi = np.atleast_2d(psi)
        norms = np.linalg.norm(psi, axis=1)
        if np.any(norms < 1e-300):
            raise ValueError("cannot sample from a zero-norm state")
        c = self.to_eig(psi / norms[:, None])
        w = self.group_weights(c)
        horizon = np.maximum(t_max - t_now, 0.0)
        jumped = u_wait > self.survival(w, horizon)

        tau = horizon.copy()
        if np.any(jumped):
            lo = np.zeros(int(jumped.sum()))
            hi = np.minimum(horizon[jumped], self._time_bound(w[jumped], u_wait[jumped]))
            wj, uj = w[jumped], u_wait[jumped]
            # per-row convergence keeps each trajectory independent of its batch
            open_ = hi - lo > TIME_TOL
            while np.any(open_):
                mid = 0.5 * (lo + hi)
                above = self.survival(wj, mid) > uj
                lo = np.where(open_ & above, mid, lo)
                hi = np.where(open_ & ~above, mid, hi)
                open_ = hi - lo > TIME_TOL
            tau[jumped] = hi

        c_t = self.propagate(c, tau)
        psi_t = self.from_eig(c_t)
        channel = np.full(psi.shape[0], -1, dtype=int)
        new_psi = psi_t / np.linalg.norm(psi_t, axis=1)[:, None]

        if np.any(jumped):
            pj = psi_t[jumped]
            outs = [pj @ j.T for j in self.jumps]
            probs = np.stack([np.sum(np.abs(o) ** 2, axis=1) for o in outs], axis=1)
            total = probs.sum(axis=1)
            cum = np.cumsum(probs, axis=1)
            pick = np.sum(cum < (u_chan[jumped] * total)[:, None], axis=1)
            pick = np.minimum(pick, len(self.jumps) - 1)
            after = np.stack(outs, axis=0)[pick, np.arange(len(pick))]
            new_psi[jumped] = after / np.linalg.norm(after, axis=1)[:, None]
            channel[jumped] = pick
        return jumped, t_now + tau, channel, new_psi


@dataclass
class BatchResult:
    """Trajectory outcomes for a contiguous block of stream indices."""

    indices: np.ndarray
    n_events: np.ndarray
    times: np.ndarray  # (n, k) padded with nan
    channels: np.ndarray  # (n, k) padded with -1
    final: np.ndarray  # (n, dim) normalized states at t_max

    def record(self, i: int, dims=GLOBAL_DIMS) -> TrajectoryRecord:
        k = int(self.n_events[i])
        events = tuple(EmissionEvent(float(self.times[i, j]), Channel(int(self.channels[i, j]))) for j in range(k))
        return TrajectoryRecord(events, StateVector(dims, self.final[i]))

    @staticmethod
    def concat(parts: Sequence["BatchResult"]) -> "BatchResult":
        width = max(p.times.shape[1] for p in parts)

        def pad(a, fill):
            out = np.full((a.shape[0], width), fill, dtype=a.dtype)
            out[:, : a.shape[1]] = a
            return out

        return BatchResult(
            indices=np.concatenate([p.indices for p in parts]),
            n_events=np.concatenate([p.n_events for p in parts]),
            times=np.concatenate([pad(p.times, np.nan) for p in parts]),
            channels=np.concatenate([pad(p.channels, -1) for p in parts]),
            final=np.concatenate([p.final for p in parts]),
        )


def simulate_batch(initial, p: DecayParams, t_max: float, master_seed: int, indices, jumps=None, engine=None) -> BatchResult:
    """Run one trajectory per stream index, all starting from ``initial``.

    ``initial`` is a single state (broadcast to every trajectory) or an
    ``(n, dim)`` array with one starting state per index.
    """
    eng = engine or DecayEngine(p, jumps)
    indices = np.asarray(indices, dtype=np.int64)
    n = len(indices)
    init = initial.amplitudes if isinstance(initial, StateVector) else np.asarray(initial, dtype=complex)
    psi = np.broadcast_to(init, (n, eng.dim)).astype(complex).copy()
    t_now = np.zeros(n)
    active = np.ones(n, dtype=bool)
    n_events = np.zeros(n, dtype=int)
    times, chans = [], []
    for k in range(MAX_EVENTS + 1):
        if not np.any(active):
            break
        if k == MAX_EVENTS:
            raise RuntimeError("trajectory exceeded the event limit")
        idx = indices[active]
        u_wait = rngmod.uniforms(master_seed, idx, rngmod.WAIT, k)
        u_chan = rngmod.uniforms(master_seed, idx, rngmod.CHANNEL, k)
        jumped, t_new, ch, new_psi = eng.step(psi[active], t_now[active], t_max, u_wait, u_chan)
        col_t = np.full(n, np.nan)
        col_c = np.full(n, -1, dtype=int)
        act_idx = np.flatnonzero(active)
        col_t[act_idx[jumped]] = t_new[jumped]
        col_c[act_idx[jumped]] = ch[jumped]
        times.append(col_t)
        chans.append(col_c)
        psi[act_idx] = new_psi
        t_now[act_idx] = t_new
        n_events[act_idx[jumped]] += 1
        active[act_idx[~jumped]] = False
    k_max = max(1, int(n_events.max()) if n else 1)
    t_arr = np.stack(times, axis=1)[:, :k_max] if times else np.full((n, 1), np.nan)
    c_arr = np.stack(chans, axis=1)[:, :k_max] if chans else np.full((n, 1), -1)
    return BatchResult(indices, n_events, t_arr, c_arr, psi)


def sample_next_event(state: StateVector, p: DecayParams, t_now: float, t_max: float, rng: rngmod.RngStream, jumps=None, engine=None):
    """Draw the next emission of a single trajectory.

    Returns ``(event_or_None, new_state)``.
    """
    eng = engine or DecayEngine(p, jumps)
    u_wait = np.array([rng.uniform(rngmod.WAIT)])
    u_chan = np.array([rng.uniform(rngmod.CHANNEL)])
    jumped, t_new, ch, new_psi = eng.step(state.amplitudes[None, :], np.array([float(t_now)]), t_max, u_wait, u_chan)
    out = StateVector(state.dims, new_psi[0])
    if not jumped[0]:
        return None, out
    return EmissionEvent(float(t_new[0]), Channel(int(ch[0]))), out


def run_trajectory(initial: StateVector, p: DecayParams, t_max: float, rng: rngmod.RngStream, jumps=None) -> TrajectoryRecord:
    if abs(initial.norm - 1.0) > 1e-10:
        raise ValueError("initial state must be normalized")
    eng = DecayEngine(p, jumps)
    state, t, events = initial, 0.0, []
    while True:
        if len(events) >= MAX_EVENTS:
            raise RuntimeError("trajectory exceeded the event limit")
        ev, state = sample_next_event(state, p, t, t_max, rng, engine=eng)
        if ev is None:
            return TrajectoryRecord(tuple(events), state)
        events.append(ev)
        t = ev.time


def chunk_ranges(n: int, chunk_size: int = DEFAULT_CHUNK, offset: int = 0) -> list[tuple[int, int]]:
    """Fixed partition of trajectory indices; independent of worker count."""
    return [(offset + a, offset + min(a + chunk_size, n)) for a in range(0, n, chunk_size)]


def _batch_task(args):
    initial, p, t_max, seed, lo, hi, jumps = args
    return simulate_batch(initial, p, t_max, seed, np.arange(lo, hi), jumps=jumps)


def _density_task(args):
    res = _batch_task(args)
    f = res.final
    return f.T @ f.conj()


def _map(fn, tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, tasks))


def simulate_ensemble(initial, p: DecayParams, t_max: float, n: int, seed: int, workers: int = 1,
                      chunk_size: int = DEFAULT_CHUNK, jumps=None) -> BatchResult:
    """``n`` trajectories with stream indices 0..n-1, gathered in index order."""
    init = initial.amplitudes if isinstance(initial, StateVector) else np.asarray(initial, dtype=complex)
    tasks = [(init, p, t_max, seed, lo, hi, jumps) for lo, hi in chunk_ranges(n, chunk_size)]
    return BatchResult.concat(_map(_batch_task, tasks, workers))


def ensemble_density(initial: StateVector, p: DecayParams, t: float, n: int, seed: int, workers: int = 1,
                     chunk_size: int = DEFAULT_CHUNK, jumps=None) -> DensityMatrix:
    """Average of trajectory projectors at time ``t``."""
    if n < 1:
        raise ValueError("need at least one trajectory")
    tasks = [(initial.amplitudes, p, t, seed, lo, hi, jumps) for lo, hi in chunk_ranges(n, chunk_size)]
    acc = np.zeros((len(initial.amplitudes),) * 2, dtype=complex)
    for part in _map(_density_task, tasks, workers):
        acc = acc + part
    return DensityMatrix(initial.dims, acc / n)


def lindblad_rhs(rho: np.ndarray, jumps: Sequence[np.ndarray], kdag: np.ndarray) -> np.ndarray:
    out = -0.5 * (kdag @ rho + rho @ kdag)
    for j in jumps:
        out = out + j @ rho @ j.conj().T
    return out


def master_equation_evolve(rho0: DensityMatrix, p: DecayParams, t: float, dt: float = 0.01, jumps=None) -> DensityMatrix:
    """Fixed-step RK4 integration of the collective-decay Lindblad equation (H = 0)."""
    js = tuple(jumps) if jumps is not None else jump_operators(p)
    kdag = sum(j.conj().T @ j for j in js)
    max_rate = float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (kdag + kdag.conj().T)))))
    if dt <= 0:
        raise ValueError("dt must be positive")
    if dt * max_rate > 2.5:
        raise ValueError(f"step too large: dt * max_rate = {dt * max_rate:.3g} exceeds RK4 stability")
    n_steps = max(1, int(math.ceil(t / dt - 1e-12))) if t > 0 else 0
    h = t / n_steps if n_steps else 0.0
    rho = rho0.matrix.copy()
    tr0 = np.trace(rho).real
    for _ in range(n_steps):
        k1 = lindblad_rhs(rho, js, kdag)
        k2 = lindblad_rhs(rho + 0.5 * h * k1, js, kdag)
        k3 = lindblad_rhs(rho + 0.5 * h * k2, js, kdag)
        k4 = lindblad_rhs(rho + h * k3, js, kdag)
        rho = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    if abs(np.trace(rho).real - tr0) > 1e-8:
        raise ValueError("trace drift beyond tolerance; reduce dt")
    return DensityMatrix(rho0.dims, rho)
