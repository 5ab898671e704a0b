"""Steering and CHSH witnesses for two-qubit states.

Alice holds the first qubit (cavity 1), Bob the second (cavity 2). Bob's
outcome conditions Alice's expectation values in the steering parameter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .qmath import IDENTITY2, PAULIS, DensityMatrix, eigh_sym

AXES = {"x": 0, "y": 1, "z": 2}
STEERING_AXES = {2: ("x", "z"), 3: ("x", "y", "z")}
TSIRELSON = 2.0 * math.sqrt(2.0)
NORM_TOL = 1e-9


@dataclass(frozen=True)
class MeasurementSetting:
    axis: tuple[float, float, float]

    def __post_init__(self):
        a = np.asarray(self.axis, dtype=float)
        if a.shape != (3,) or abs(np.linalg.norm(a) - 1.0) > 1e-12:
            raise ValueError(f"measurement axis must be a unit 3-vector, got {self.axis}")
        object.__setattr__(self, "axis", tuple(float(x) for x in a))

    @classmethod
    def along(cls, v) -> "MeasurementSetting":
        v = np.asarray(v, dtype=float)
        return cls(tuple(v / np.linalg.norm(v)))

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.axis)


@dataclass(frozen=True)
class WitnessResult:
    s2: float
    s3: float
    b_max: float
    settings: tuple[MeasurementSetting, ...]

    @property
    def steering_violated(self) -> bool:
        return self.s3 > 1.0

    @property
    def chsh_violated(self) -> bool:
        return self.b_max > 2.0


def _matrix(rho) -> np.ndarray:
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if m.shape != (4, 4):
        raise ValueError(f"expected a two-qubit state, got shape {m.shape}")
    if abs(np.trace(m).real - 1.0) > NORM_TOL:
        raise ValueError(f"state must be normalized, trace = {np.trace(m).real}")
    return m


def spin(v) -> np.ndarray:
    """v . sigma for a real 3-vector."""
    v = v.vector if isinstance(v, MeasurementSetting) else np.asarray(v, dtype=float)
    return v[0] * PAULIS[0] + v[1] * PAULIS[1] + v[2] * PAULIS[2]


def _axis_index(i) -> int:
    return AXES[i] if isinstance(i, str) else int(i)


def conditional_expectation(rho, i, b: int) -> tuple[float, float]:
    """(P(B_i = b), <A_i> given B_i = b) for Pauli axis ``i``."""
    m = _matrix(rho)
    if b not in (1, -1):
        raise ValueError("Bob's outcome must be +1 or -1")
    s = PAULIS[_axis_index(i)]
    proj = 0.5 * (IDENTITY2 + b * s)
    prob = float(np.trace(np.kron(IDENTITY2, proj) @ m).real)
    if prob <= 1e-15:
        return 0.0, 0.0
    expect = float(np.trace(np.kron(s, proj) @ m).real) / prob
    return prob, expect


def steering_parameter(rho, n: int = 3) -> float:
    """S_N summed over the Pauli axes {x, z} (N = 2) or {x, y, z} (N = 3)."""
    if n not in STEERING_AXES:
        raise ValueError("n must be 2 or 3")
    total = 0.0
    for ax in STEERING_AXES[n]:
        for b in (1, -1):
            prob, e = conditional_expectation(rho, ax, b)
            total += prob * e * e
    return total


def correlation_matrix(rho) -> np.ndarray:
    """T_ij = Tr[rho (sigma_i x sigma_j)]."""
    m = _matrix(rho)
    return np.array([[np.trace(m @ np.kron(si, sj)).real for sj in PAULIS] for si in PAULIS])


def chsh_operator(a, a2, b, b2) -> np.ndarray:
    sb, sb2 = spin(b), spin(b2)
    return np.kron(spin(a), sb + sb2) + np.kron(spin(a2), sb - sb2)


def chsh_value(rho, a, a2, b, b2) -> float:
    m = _matrix(rho)
    for v in (a, a2, b, b2):
        vec = v.vector if isinstance(v, MeasurementSetting) else np.asarray(v, dtype=float)
        if abs(np.linalg.norm(vec) - 1.0) > 1e-9:
            raise ValueError("measurement directions must be unit vectors")
    return float(np.trace(m @ chsh_operator(a, a2, b, b2)).real)


def _unit_or(v: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    return v / n if n > 1e-12 else fallback


def chsh_max(rho) -> tuple[float, tuple[MeasurementSetting, ...]]:
    """Maximal CHSH value 2 sqrt(u1 + u2) from the correlation matrix, with optimal settings."""
    t = correlation_matrix(rho)
    u, vecs = eigh_sym(t.T @ t)
    u1, u2 = max(u[0], 0.0), max(u[1], 0.0)
    b_max = 2.0 * math.sqrt(u1 + u2)
    c1, c2 = vecs[:, 0], vecs[:, 1]
    theta = math.atan2(math.sqrt(u2), math.sqrt(u1))
    b = math.cos(theta) * c1 + math.sin(theta) * c2
    b2 = math.cos(theta) * c1 - math.sin(theta) * c2
    a = _unit_or(t @ c1, np.array([1.0, 0.0, 0.0]))
    a2 = _unit_or(t @ c2, np.cross(a, [0.0, 0.0, 1.0]) if abs(a[2]) < 0.9 else np.cross(a, [1.0, 0.0, 0.0]))
    settings = tuple(MeasurementSetting.along(v) for v in (a, a2, b, b2))
    return b_max, settings


def _unpack(x: np.ndarray):
    vs = x.reshape(4, 3)
    return vs / np.linalg.norm(vs, axis=1)[:, None]


def chsh_max_numeric(rho, n_starts: int = 8, seed: int = 0) -> float:
    """Direct multi-start maximization of the CHSH expectation over four directions.

    Uses Tr[rho (a.sigma x b.sigma)] = a^T T b so each evaluation is cheap,
    with the exact gradient through the normalization of the four vectors.
    The best local optimum is re-evaluated through :func:`chsh_value`.
    """
    m = _matrix(rho)
    t = correlation_matrix(m)

    def neg(x):
        vs = x.reshape(4, 3)
        norms = np.linalg.norm(vs, axis=1)
        a, a2, b, b2 = vs / norms[:, None]
        f = a @ t @ (b + b2) + a2 @ t @ (b - b2)
        g_units = np.array([t @ (b + b2), t @ (b - b2), t.T @ (a + a2), t.T @ (a - a2)])
        units = vs / norms[:, None]
        g = (g_units - np.sum(g_units * units, axis=1)[:, None] * units) / norms[:, None]
        return -f, -g.ravel()

    best, best_x = -np.inf, None
    for k in range(n_starts):
        x0 = np.random.default_rng([seed, k]).normal(size=12)
        res = scipy.optimize.minimize(neg, x0, jac=True, method="BFGS", options={"gtol": 1e-12, "maxiter": 1000})
        if -res.fun > best:
            best, best_x = -res.fun, res.x
    return chsh_value(m, *_unpack(best_x))


def evaluate(rho) -> WitnessResult:
    """S2, S3 and B_max of a (normalized) two-qubit state."""
    if isinstance(rho, DensityMatrix):
        rho = rho.normalized()
    b_max, settings = chsh_max(rho)
    return WitnessResult(steering_parameter(rho, 2), steering_parameter(rho, 3), b_max, settings)


def werner(p: float) -> np.ndarray:
    """p |psi-><psi-| + (1 - p) I/4."""
    s = np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2.0)
    return p * np.outer(s, s.conj()) + (1 - p) * np.eye(4) / 4
