"""Delayed-choice swapping and the three-time ("steering into the past") scenario.

Both scenarios measure the cavities of the pre-decay state, let the atoms
decay collectively afterwards, and sort the cavity data by the photon record
("Eve's" outcome). The measurement settings follow a fixed cycle over
trajectory indices; the cycle order is derived from the master seed and
reported.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .. import rng as rngmod
from ..model import DecayParams, prepare_swap_input
from ..swap import crossover_time, detection_mask
from ..trajectories import BatchResult, _batch_task, _map, chunk_ranges
from .config import DISTANCE_SWEEP_T, TIME_SWEEP_D, ConfigError, ExperimentConfig

MIN_SUBSET = 500
MIN_TRAJECTORIES = 10_000
N_BOOTSTRAP = 400
STORAGE_DELAY = 1.0  # atoms held in metastable states between t1 and the start of decay
READOUT_DELAY = 1.0  # Bob reads out this long after the decay window closes

X = np.array([1.0, 0.0, 0.0])
Y = np.array([0.0, 1.0, 0.0])
Z = np.array([0.0, 0.0, 1.0])
CHSH_ALICE = (X, Z)
CHSH_BOB = (-(X + Z) / math.sqrt(2.0), (Z - X) / math.sqrt(2.0))
PAULI_AXES = (X, Y, Z)
AXIS_NAMES = ("x", "y", "z")

CAVITY1 = 2
CAVITY2 = 3


class EveOutcome(enum.IntEnum):
    ZERO_PHOTONS = 0
    ONE_PHOTON_SUB = 1
    ONE_PHOTON_SUPER = 2
    TWO_PHOTONS = 3

    @property
    def label(self) -> str:
        return self.name.lower()


# ---------------------------------------------------------------- helpers


def _spin_batch(axes: np.ndarray) -> np.ndarray:
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    return axes[:, 0, None, None] * sx + axes[:, 1, None, None] * sy + axes[:, 2, None, None] * sz


def measure_qubit(psi: np.ndarray, subsystem: int, axes: np.ndarray, u: np.ndarray):
    """Projective +/-1 measurement of one qubit of each global state along per-row axes.

    Returns ``(outcomes, post_states)``.
    """
    n = psi.shape[0]
    t = psi.reshape(n, 2, 2, 2, 2)
    proj_plus = 0.5 * (np.eye(2) + _spin_batch(axes))
    letters = "abcd"
    src = "n" + letters
    dst = "n" + letters.replace(letters[subsystem], "y")
    applied = np.einsum(f"nyx,{src.replace(letters[subsystem], 'x')}->{dst}", proj_plus, t)
    p_plus = np.sum(np.abs(applied.reshape(n, -1)) ** 2, axis=1)
    outcome = np.where(u < p_plus, 1, -1)
    proj = np.where(outcome[:, None, None] == 1, proj_plus, np.eye(2) - proj_plus)
    post = np.einsum(f"nyx,{src.replace(letters[subsystem], 'x')}->{dst}", proj, t).reshape(n, -1)
    post /= np.linalg.norm(post, axis=1)[:, None]
    return outcome, post


def _reflection_map(axes) -> list[tuple[int, int]]:
    """How the phase correction (sigma_z on cavity 2) acts on a set of Bob axes.

    sigma_z v.sigma sigma_z = v'.sigma with v' = (-vx, -vy, vz); each axis must map
    to +/- another axis of the set. Returns ``(new_index, outcome_sign)`` per axis.
    """
    out = []
    for v in axes:
        r = np.array([-v[0], -v[1], v[2]])
        for k, w in enumerate(axes):
            if np.allclose(r, w, atol=1e-12):
                out.append((k, 1))
                break
            if np.allclose(r, -w, atol=1e-12):
                out.append((k, -1))
                break
        else:
            raise ValueError("axis set is not closed under the phase correction")
    return out


def _simulate_from(states: np.ndarray, p: DecayParams, T: float, seed: int, offset: int, workers: int) -> BatchResult:
    tasks = [
        (states[lo - offset : hi - offset], p, T, seed, lo, hi, None)
        for lo, hi in chunk_ranges(len(states), offset=offset)
    ]
    return BatchResult.concat(_map(_batch_task, tasks, workers))


def _eve(batch: BatchResult, p: DecayParams, eta: float, seed: int):
    """Eve's outcome per trajectory and the time of her last detected photon (nan if none)."""
    det = detection_mask(batch, eta, seed)
    n_det = det.sum(axis=1)
    t_det = np.where(det, batch.times, np.nan)
    last = np.full(len(n_det), np.nan)
    has = n_det > 0
    last[has] = np.nanmax(t_det[has], axis=1)
    out = np.full(len(n_det), int(EveOutcome.ZERO_PHOTONS))
    out[n_det >= 2] = int(EveOutcome.TWO_PHOTONS)
    single = n_det == 1
    try:
        early = last < crossover_time(p)
    except ValueError:
        early = np.zeros(len(n_det), dtype=bool)
    out[single & early] = int(EveOutcome.ONE_PHOTON_SUPER)
    out[single & ~early] = int(EveOutcome.ONE_PHOTON_SUB)
    return out, last


def _scenario_params(cfg: ExperimentConfig):
    if cfg.n_trajectories < MIN_TRAJECTORIES:
        raise ConfigError(f"scenarios need at least {MIN_TRAJECTORIES} trajectories")
    d = cfg.d_over_lambda[0] if cfg.d_over_lambda else TIME_SWEEP_D
    T = cfg.T[0] if cfg.T else DISTANCE_SWEEP_T
    return DecayParams(d, cfg.gamma), T, cfg.eta[0]


def cycle_order(master_seed: int, period: int) -> np.ndarray:
    """Pre-registered setting cycle: a permutation of the setting indices fixed by the seed."""
    return np.random.default_rng([int(master_seed), period]).permutation(period)


# ---------------------------------------------------------- statistics


@dataclass
class SteeringEstimate:
    s3: float
    stderr: float
    counts: np.ndarray  # (3 axes, Alice +/-, Bob +/-)

    @property
    def sigmas_above_bound(self) -> float:
        return (self.s3 - 1.0) / self.stderr if self.stderr > 0 else math.inf


def steering_from_counts(counts: np.ndarray) -> float:
    """S3 from per-axis joint counts; ``counts[i, a, b]`` with index 0 = +1, 1 = -1."""
    c = np.asarray(counts, dtype=float)
    n_axis = c.sum(axis=(1, 2))
    n_b = c.sum(axis=1)  # (axis, b)
    diff = c[:, 0, :] - c[:, 1, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        terms = np.where(n_b > 0, diff**2 / (n_axis[:, None] * n_b), 0.0)
    return float(terms.sum())


def estimate_steering(alice_axis, alice_out, bob_out, seed_key) -> SteeringEstimate:
    counts = np.zeros((3, 2, 2))
    for i in range(3):
        sel = alice_axis == i
        for ia, a in enumerate((1, -1)):
            for ib, b in enumerate((1, -1)):
                counts[i, ia, ib] = np.sum(sel & (alice_out == a) & (bob_out == b))
    s3 = steering_from_counts(counts)
    gen = np.random.default_rng(seed_key)
    boots = []
    for _ in range(N_BOOTSTRAP):
        rc = np.stack([gen.multinomial(int(c.sum()), (c / c.sum()).ravel()).reshape(2, 2) if c.sum() else c for c in counts])
        boots.append(steering_from_counts(rc))
    return SteeringEstimate(s3, float(np.std(boots, ddof=1)), counts)


@dataclass
class ChshEstimate:
    value: float
    stderr: float
    correlators: np.ndarray  # E[alice setting, bob setting]
    counts: np.ndarray  # trials per setting pair

    @property
    def sigmas_above_bound(self) -> float:
        return (abs(self.value) - 2.0) / self.stderr if self.stderr > 0 else math.inf


def estimate_chsh(alice_setting, bob_setting, alice_out, bob_out) -> ChshEstimate:
    e = np.zeros((2, 2))
    n = np.zeros((2, 2))
    for i in range(2):
        for j in range(2):
            sel = (alice_setting == i) & (bob_setting == j)
            n[i, j] = sel.sum()
            e[i, j] = np.mean(alice_out[sel] * bob_out[sel]) if n[i, j] else 0.0
    value = e[0, 0] + e[0, 1] + e[1, 0] - e[1, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        var = np.where(n > 0, (1 - e**2) / n, np.inf)
    return ChshEstimate(float(value), float(math.sqrt(var.sum())), e, n)


@dataclass
class SubsetStats:
    name: str
    n: int
    chsh: ChshEstimate | None
    steering: SteeringEstimate | None
    flagged: bool  # fewer than MIN_SUBSET samples

    def summary(self) -> dict:
        out = {"subset": self.name, "n": self.n, "flagged": self.flagged}
        if self.chsh is not None:
            out.update(chsh=self.chsh.value, chsh_stderr=self.chsh.stderr)
        if self.steering is not None:
            out.update(s3=self.steering.s3, s3_stderr=self.steering.stderr)
        return out


# ------------------------------------------------------- delayed choice


@dataclass
class DelayedChoiceReport:
    params: DecayParams
    T: float
    eta: float
    cycle: list[int]
    subsets: dict[str, SubsetStats]
    unsorted: SubsetStats

    def summary_rows(self) -> list[dict]:
        return [s.summary() for s in self.subsets.values()] + [self.unsorted.summary()]


def _chsh_block(cfg, p, T, eta, seed):
    n = cfg.n_trajectories
    idx = np.arange(n)
    order = cycle_order(seed, 4)
    pair = order[idx % 4]
    a_set, b_set = pair // 2, pair % 2
    psi = np.broadcast_to(prepare_swap_input().amplitudes, (n, 16)).copy()
    a_axes = np.array(CHSH_ALICE)[a_set]
    b_axes = np.array(CHSH_BOB)[b_set]
    a_out, psi = measure_qubit(psi, CAVITY1, a_axes, rngmod.uniforms(seed, idx, rngmod.MEASURE_ALICE, 0))
    b_out, psi = measure_qubit(psi, CAVITY2, b_axes, rngmod.uniforms(seed, idx, rngmod.MEASURE_BOB, 0))
    batch = _simulate_from(psi, p, T, seed, 0, cfg.workers)
    eve, _ = _eve(batch, p, eta, seed)
    return order, a_set, b_set, a_out, b_out, eve


def _steer_block(cfg, p, T, eta, seed, offset, correct_before_bob: bool):
    """Matched-axis block; Bob measures after the decay, optionally after the phase correction."""
    n = cfg.n_trajectories
    idx = np.arange(offset, offset + n)
    order = cycle_order(seed, 3)
    axis = order[idx % 3]
    psi = np.broadcast_to(prepare_swap_input().amplitudes, (n, 16)).copy()
    axes = np.array(PAULI_AXES)[axis]
    a_out, psi = measure_qubit(psi, CAVITY1, axes, rngmod.uniforms(seed, idx, rngmod.MEASURE_ALICE, 0))
    batch = _simulate_from(psi, p, T, seed, offset, cfg.workers)
    eve, last = _eve(batch, p, eta, seed)
    post = batch.final.copy()
    if correct_before_bob:
        sup = eve == int(EveOutcome.ONE_PHOTON_SUPER)
        # sigma_z on cavity 2: sign flip on components with cavity 2 in |1>
        post[sup] = post[sup] * np.tile([1.0, -1.0], 8)
    b_out, _ = measure_qubit(post, CAVITY2, axes, rngmod.uniforms(seed, idx, rngmod.MEASURE_BOB, 0))
    return order, axis, a_out, b_out, eve, last


def delayed_choice_experiment(cfg: ExperimentConfig) -> DelayedChoiceReport:
    """Alice and Bob measure first; the later collective decay sorts their data.

    Single-photon subsets are phase-bookkept: for super-radiant records Bob's
    setting and outcome are relabelled as if the correction had been applied
    before his measurement.
    """
    p, T, eta = _scenario_params(cfg)
    seed = int(cfg.master_seed)
    order, a_set, b_set, a_out, b_out, eve = _chsh_block(cfg, p, T, eta, seed)
    _, s_axis, s_a, s_b, s_eve, _ = _steer_block(cfg, p, T, eta, seed, cfg.n_trajectories, correct_before_bob=False)

    chsh_map = _reflection_map(CHSH_BOB)
    pauli_map = _reflection_map(PAULI_AXES)
    subsets = {}
    for outcome in EveOutcome:
        sel = eve == int(outcome)
        ssel = s_eve == int(outcome)
        bs, bo = b_set[sel].copy(), b_out[sel].copy()
        sb = s_b[ssel].copy()
        if outcome == EveOutcome.ONE_PHOTON_SUPER:
            new_set = np.array([chsh_map[j][0] for j in range(2)])[bs]
            sign = np.array([chsh_map[j][1] for j in range(2)])[bs]
            bs, bo = new_set, bo * sign
            sb = sb * np.array([pauli_map[j][1] for j in range(3)])[s_axis[ssel]]
        n = int(sel.sum())
        subsets[outcome.label] = SubsetStats(
            outcome.label,
            n,
            estimate_chsh(a_set[sel], bs, a_out[sel], bo),
            estimate_steering(s_axis[ssel], s_a[ssel], sb, [seed, rngmod.BOOTSTRAP, 10 + int(outcome)]),
            flagged=n < MIN_SUBSET,
        )
    unsorted = SubsetStats(
        "unsorted",
        cfg.n_trajectories,
        estimate_chsh(a_set, b_set, a_out, b_out),
        estimate_steering(s_axis, s_a, s_b, [seed, rngmod.BOOTSTRAP, 19]),
        flagged=False,
    )
    return DelayedChoiceReport(p, T, eta, [int(x) for x in order], subsets, unsorted)


# ------------------------------------------------------ three-time scenario


@dataclass(frozen=True)
class ThreeTimeRecord:
    alice_setting: str
    alice_outcome: int
    alice_time: float
    eve_outcome: EveOutcome
    eve_time: float
    bob_setting: str
    bob_outcome: int
    bob_time: float

    def __post_init__(self):
        if not self.alice_time < self.eve_time < self.bob_time:
            raise ValueError("three-time records need t1 < t2 < t3")


@dataclass
class ThreeTimeReport:
    params: DecayParams
    T: float
    eta: float
    cycle: list[int]
    axis: np.ndarray
    alice_out: np.ndarray
    bob_out: np.ndarray
    eve: np.ndarray
    t1: np.ndarray
    t2: np.ndarray
    t3: np.ndarray
    groups: dict[str, SubsetStats] = field(default_factory=dict)

    def records(self) -> Iterator[ThreeTimeRecord]:
        for i in range(len(self.eve)):
            yield ThreeTimeRecord(
                AXIS_NAMES[self.axis[i]], int(self.alice_out[i]), float(self.t1[i]),
                EveOutcome(int(self.eve[i])), float(self.t2[i]),
                AXIS_NAMES[self.axis[i]], int(self.bob_out[i]), float(self.t3[i]),
            )

    def ordering_ok(self) -> bool:
        return bool(np.all(self.t1 < self.t2) and np.all(self.t2 < self.t3))

    def summary_rows(self) -> list[dict]:
        return [g.summary() for g in self.groups.values()]


def steering_into_past(cfg: ExperimentConfig) -> ThreeTimeReport:
    """Alice measures at t1, the atoms decay at t2, Bob measures at t3.

    Super-radiant single-photon records get the phase correction on cavity 2
    before Bob's measurement.
    """
    p, T, eta = _scenario_params(cfg)
    seed = int(cfg.master_seed)
    order, axis, a_out, b_out, eve, last = _steer_block(cfg, p, T, eta, seed, 0, correct_before_bob=True)
    n = len(eve)
    t1 = np.zeros(n)
    t2 = STORAGE_DELAY + np.where(np.isnan(last), T, last)
    t3 = np.full(n, STORAGE_DELAY + T + READOUT_DELAY)

    groups = {}
    masks = {o.label: eve == int(o) for o in EveOutcome}
    masks["single_photon"] = masks["one_photon_sub"] | masks["one_photon_super"]
    for k, (name, sel) in enumerate(masks.items()):
        cnt = int(sel.sum())
        groups[name] = SubsetStats(
            name, cnt, None,
            estimate_steering(axis[sel], a_out[sel], b_out[sel], [seed, rngmod.BOOTSTRAP, 20 + k]),
            flagged=cnt < MIN_SUBSET,
        )
    return ThreeTimeReport(p, T, eta, [int(x) for x in order], axis, a_out, b_out, eve, t1, t2, t3, groups)
