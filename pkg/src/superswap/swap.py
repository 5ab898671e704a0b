"""Post-selection of single-photon records and the closed-form swapped states.

A single detected photon heralds an entangled cavity pair. Super-radiant
emissions (which favour early times) leave the cavities in psi+, and those
are phase-corrected to psi-; sub-radiant emissions leave psi- directly. The
two are told apart statistically by comparing the emission time with the
crossover time t1*.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import rng as rngmod
from .model import CAVITIES, GLOBAL_DIMS, DecayParams, cavity_ket, psi_minus, psi_plus
from .qmath import DensityMatrix, partial_trace
from .trajectories import BatchResult, Channel, TrajectoryRecord

CAVITY_DIMS = (2, 2)
# sigma_z on cavity 2 in the (cavity1, cavity2) basis: maps psi+ to psi-
PHASE_CORRECTION = np.diag([1.0, -1.0, 1.0, -1.0]).astype(complex)


class OutcomeKind(str, enum.Enum):
    SUCCESS_PSI_MINUS = "success_psi_minus"
    SUCCESS_PSI_PLUS_CORRECTED = "success_psi_plus_corrected"
    FAILURE_ZERO_PHOTONS = "failure_zero_photons"
    FAILURE_TWO_PHOTONS = "failure_two_photons"
    DISCARDED_INEFFICIENCY = "discarded_inefficiency"

    @property
    def success(self) -> bool:
        return self in (OutcomeKind.SUCCESS_PSI_MINUS, OutcomeKind.SUCCESS_PSI_PLUS_CORRECTED)


@dataclass(frozen=True)
class SwapOutcome:
    kind: OutcomeKind
    cavity_state: DensityMatrix
    emission_time: Optional[float] = None
    # set when the sub/super-radiant densities cannot be told apart (Gamma = 0)
    ambiguous: bool = False


@dataclass(frozen=True)
class EfficiencyModel:
    eta: float

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta}")


# below this fraction of gamma the two channels are treated as degenerate
GAMMA_TOL = 1e-12


def _check_domain(p: DecayParams):
    if not GAMMA_TOL * p.gamma < p.Gamma < p.gamma:
        raise ValueError(f"need 0 < Gamma < gamma, got Gamma = {p.Gamma}, gamma = {p.gamma}")


def crossover_time(p: DecayParams) -> float:
    """Time at which the super- and sub-radiant waiting densities cross.

    Solves (gamma+Gamma) exp(-(gamma+Gamma) t) = (gamma-Gamma) exp(-(gamma-Gamma) t).
    """
    _check_domain(p)
    g, G = p.gamma, p.Gamma
    return math.log((g + G) / (g - G)) / (2.0 * G)


def superradiant_posterior(p: DecayParams, t: float) -> float:
    """P(super-radiant | single emission at t) with equal branch priors."""
    a = p.rate_super * math.exp(-p.rate_super * t)
    b = p.rate_sub * math.exp(-p.rate_sub * t)
    return a / (a + b)


def cavity_state_of(psi: np.ndarray) -> np.ndarray:
    """Reduced (cavity1, cavity2) density matrix of a global state vector."""
    return partial_trace(np.outer(psi, psi.conj()), CAVITIES, GLOBAL_DIMS)


def _cavity_states_batch(final: np.ndarray) -> np.ndarray:
    f = final.reshape(final.shape[0], 4, 4)  # (atoms, cavities)
    return np.einsum("nac,nad->ncd", f, f.conj())


def classify_and_correct(rec: TrajectoryRecord, p: DecayParams, T: float, use_channel_labels: bool = False) -> SwapOutcome:
    """Sort one (detected) emission record into a protocol outcome.

    With ``use_channel_labels`` the simulator's channel label replaces the
    time-based guess; that is a debugging aid, not the protocol.
    """
    n = len(rec.events)
    if n > 2:
        raise ValueError(f"record has {n} events; the protocol allows at most 2")
    rho = cavity_state_of(rec.final_state.amplitudes)
    if n == 0:
        kind = OutcomeKind.DISCARDED_INEFFICIENCY if rec.missed else OutcomeKind.FAILURE_ZERO_PHOTONS
        return SwapOutcome(kind, DensityMatrix(CAVITY_DIMS, rho))
    if n == 2:
        return SwapOutcome(OutcomeKind.FAILURE_TWO_PHOTONS, DensityMatrix(CAVITY_DIMS, rho))

    t1 = rec.events[0].time
    if use_channel_labels:
        superradiant, ambiguous = rec.events[0].channel == Channel.SYMMETRIC, False
    else:
        try:
            superradiant, ambiguous = t1 < crossover_time(p), False
        except ValueError:
            superradiant, ambiguous = False, True
    if superradiant:
        rho = PHASE_CORRECTION @ rho @ PHASE_CORRECTION
        kind = OutcomeKind.SUCCESS_PSI_PLUS_CORRECTED
    else:
        kind = OutcomeKind.SUCCESS_PSI_MINUS
    return SwapOutcome(kind, DensityMatrix(CAVITY_DIMS, rho), emission_time=t1, ambiguous=ambiguous)


def apply_efficiency(rec: TrajectoryRecord, eff: EfficiencyModel, rng: rngmod.RngStream) -> TrajectoryRecord:
    """Keep each emission independently with probability eta."""
    kept = tuple(e for e in rec.events if rng.uniform(rngmod.DETECT) < eff.eta)
    return TrajectoryRecord(kept, rec.final_state, rec.weight, rec.missed + len(rec.events) - len(kept))


def detection_mask(batch: BatchResult, eta: float, master_seed: int) -> np.ndarray:
    """Which emissions of a batch are detected; uses the same draws as :func:`apply_efficiency`."""
    k = batch.times.shape[1]
    u = rngmod.uniforms(master_seed, batch.indices[:, None], rngmod.DETECT, np.arange(k)[None, :])
    return (u < eta) & (np.arange(k)[None, :] < batch.n_events[:, None])


@dataclass
class PostSelected:
    """Classified single-photon outcomes of an ensemble."""

    n_total: int
    cavity_states: np.ndarray  # (m, 4, 4) per retained record, corrected
    emission_times: np.ndarray
    corrected: np.ndarray  # bool per retained record

    @property
    def n_retained(self) -> int:
        return len(self.emission_times)

    @property
    def success_prob(self) -> float:
        return self.n_retained / self.n_total

    def mixture(self) -> DensityMatrix:
        if self.n_retained == 0:
            raise ValueError("no single-photon records were retained")
        return DensityMatrix(CAVITY_DIMS, self.cavity_states.mean(axis=0))


def post_select(batch: BatchResult, p: DecayParams, eta: float, master_seed: int, use_channel_labels: bool = False) -> PostSelected:
    """Vectorized :func:`classify_and_correct` over a batch, keeping single detections."""
    det = detection_mask(batch, eta, master_seed)
    keep = det.sum(axis=1) == 1
    col = np.argmax(det[keep], axis=1)
    times = batch.times[keep][np.arange(keep.sum()), col]
    if use_channel_labels:
        corr = batch.channels[keep][np.arange(keep.sum()), col] == int(Channel.SYMMETRIC)
    else:
        try:
            corr = times < crossover_time(p)
        except ValueError:
            corr = np.zeros(len(times), dtype=bool)
    rho = _cavity_states_batch(batch.final[keep])
    rho[corr] = PHASE_CORRECTION @ rho[corr] @ PHASE_CORRECTION
    return PostSelected(len(batch.n_events), rho, times, corr)


def _proj(v: np.ndarray) -> np.ndarray:
    return np.outer(v, v.conj())


def two_photon_probability(p: DecayParams, T: float) -> float:
    """P(both excitations of |T1> emitted within T)."""
    g, G, k = p.gamma, p.Gamma, p.kappa
    one = (math.exp(-(g + G) * T) - math.exp(-2 * g * T)) / k + k * (math.exp(-(g - G) * T) - math.exp(-2 * g * T))
    return 1.0 - math.exp(-2 * g * T) - one


def branch_weights(p: DecayParams, T: float) -> dict[str, float]:
    """Weights of vacuum, psi- and psi+ in the sub-normalized single-photon state.

    For T >= t1* the crossover exponentials are written as powers of kappa.
    Earlier than t1* every emission counts as super-radiant, so the cutoff
    is min(T, t1*).
    """
    _check_domain(p)
    g, G, k = p.gamma, p.Gamma, p.kappa
    ts = crossover_time(p)
    e_sup_T = math.exp(-(g + G) * T)
    e_sub_T = math.exp(-(g - G) * T)
    e2 = math.exp(-2 * g * T)
    if T >= ts:
        e_sup_c = k ** ((g + G) / (2 * G))
        e_sub_c = k ** ((g - G) / (2 * G))
    else:
        e_sup_c, e_sub_c = e_sup_T, e_sub_T
    vac = (e_sup_T - e2) / (4 * k) + k * (e_sub_T - e2) / 4
    right = 0.25 * (1 - e_sup_c + e_sub_c - e_sub_T)
    wrong = 0.25 * (1 - e_sub_c + e_sup_c - e_sup_T)
    return {"vacuum": vac, "psi_minus": right, "psi_plus": wrong}


def analytic_rho_c(p: DecayParams, T: float) -> DensityMatrix:
    """Sub-normalized two-cavity state after a single detected photon (perfect detector)."""
    if not T > 0:
        raise ValueError(f"waiting time must be positive, got {T}")
    w = branch_weights(p, T)
    m = w["vacuum"] * _proj(cavity_ket(0, 0)) + w["psi_minus"] * _proj(psi_minus()) + w["psi_plus"] * _proj(psi_plus())
    return DensityMatrix(CAVITY_DIMS, m)


def vacuum_bracket(p: DecayParams, T: float) -> float:
    """Curly-bracket weight multiplying eta(1-eta)/4 |00><00| (twice the two-photon probability)."""
    g, G, k = p.gamma, p.Gamma, p.kappa
    e2 = math.exp(-2 * g * T)
    return (
        2 * (g * g + G * G) / (g * g - G * G) * (1 + e2)
        - 2 / k * math.exp(-(g + G) * T)
        - 2 * k * math.exp(-(g - G) * T)
        - 4 * G * G / (g * g - G * G) * (1 - e2)
    )


def analytic_rho_c_eta(p: DecayParams, T: float, eff: EfficiencyModel | float) -> DensityMatrix:
    """Sub-normalized single-detection state with detector efficiency eta.

    Adds the two-photon events in which only one photon was registered; their
    cavities are left in |00>.
    """
    eta = eff.eta if isinstance(eff, EfficiencyModel) else EfficiencyModel(float(eff)).eta
    base = analytic_rho_c(p, T).matrix
    m = eta * base + eta * (1 - eta) / 4 * vacuum_bracket(p, T) * _proj(cavity_ket(0, 0))
    return DensityMatrix(CAVITY_DIMS, m)


def success_probability(p: DecayParams, T: float, eff: EfficiencyModel | float) -> float:
    return analytic_rho_c_eta(p, T, eff).trace
