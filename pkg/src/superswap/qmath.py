"""Dense complex linear algebra for small Hilbert spaces (dimension <= 16).

Subsystem ordering is fixed across the package as
(atom 1, atom 2, cavity 1, cavity 2).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

MAX_DIM = 16

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10


def _as_array(m) -> np.ndarray:
    if isinstance(m, DensityMatrix):
        return m.matrix
    if isinstance(m, StateVector):
        return m.amplitudes
    return np.asarray(m, dtype=complex)


@dataclass(frozen=True)
class StateVector:
    """A pure state on a labeled tensor-product space."""

    dims: tuple[int, ...]
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        dims = tuple(int(d) for d in self.dims)
        if int(np.prod(dims)) != amps.size:
            raise ValueError(f"state of length {amps.size} does not match dims {dims}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("state amplitudes must be finite")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        n = self.norm
        if n == 0.0:
            raise ValueError("cannot normalize a zero vector")
        return StateVector(self.dims, self.amplitudes / n)

    def projector(self) -> "DensityMatrix":
        return DensityMatrix(self.dims, np.outer(self.amplitudes, self.amplitudes.conj()))

    def overlap(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, _as_array(other)))


@dataclass(frozen=True)
class DensityMatrix:
    """A (possibly sub-normalized) mixed state on a labeled tensor-product space."""

    dims: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        dims = tuple(int(d) for d in self.dims)
        n = int(np.prod(dims))
        if m.shape != (n, n):
            raise ValueError(f"matrix of shape {m.shape} does not match dims {dims}")
        if not np.all(np.isfinite(m)):
            raise ValueError("density matrix entries must be finite")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", m)

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def normalized(self) -> "DensityMatrix":
        tr = self.trace
        if tr <= 0.0:
            raise ValueError("cannot normalize a state with non-positive trace")
        return DensityMatrix(self.dims, self.matrix / tr)

    def is_valid(self, atol: float = PSD_TOL) -> bool:
        """Hermitian, positive semidefinite and trace in (0, 1]."""
        m = self.matrix
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL * max(1.0, np.max(np.abs(m))):
            return False
        if np.min(np.linalg.eigvalsh(0.5 * (m + m.conj().T))) < -atol:
            return False
        tr = self.trace
        return 0.0 < tr <= 1.0 + 1e-12


def kron(a, b) -> np.ndarray:
    """Kronecker product; ``(a⊗b)[i*rb + k, j*cb + l] = a[i, j] * b[k, l]``."""
    return np.kron(_as_array(a), _as_array(b))


def kron_all(ops: Iterable) -> np.ndarray:
    return functools.reduce(np.kron, [_as_array(op) for op in ops])


def partial_trace(rho, keep: Sequence[int], dims: Sequence[int] | None = None):
    """Reduce ``rho`` onto the subsystems listed in ``keep``.

    ``rho`` may be a :class:`DensityMatrix` (its dims are used) or a raw
    matrix together with ``dims``. The result has the same type as the input
    and keeps subsystems in their original order.
    """
    if isinstance(rho, DensityMatrix):
        dims = rho.dims
        m = rho.matrix
    else:
        if dims is None:
            raise ValueError("dims are required for a raw matrix")
        m = np.asarray(rho, dtype=complex)
    dims = tuple(int(d) for d in dims)
    n_sub = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep must be non-empty")
    if keep[0] < 0 or keep[-1] >= n_sub:
        raise ValueError(f"subsystem index out of range for dims {dims}: {keep}")

    t = m.reshape(dims + dims)
    traced = [k for k in range(n_sub) if k not in keep]
    # trace from the highest index so remaining axis numbers stay valid
    for k in reversed(traced):
        n_now = t.ndim // 2
        t = np.trace(t, axis1=k, axis2=k + n_now)
    kept_dims = tuple(dims[k] for k in keep)
    d = int(np.prod(kept_dims))
    out = t.reshape(d, d)
    if isinstance(rho, DensityMatrix):
        return DensityMatrix(kept_dims, out)
    return out


def permute_subsystems(state: np.ndarray, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder the tensor factors of a state vector (``order[i]`` = old index of new slot i)."""
    t = np.asarray(state, dtype=complex).reshape(tuple(dims))
    return np.transpose(t, tuple(order)).reshape(-1)


def is_normal(m: np.ndarray, tol: float = 1e-12) -> bool:
    m = np.asarray(m, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(m))) ** 2)
    return bool(np.max(np.abs(m @ m.conj().T - m.conj().T @ m)) <= tol * scale)


def _expm_taylor(a: np.ndarray) -> np.ndarray:
    # scaling and squaring with a truncated Taylor series
    norm = np.linalg.norm(a, 1)
    s = max(0, int(np.ceil(np.log2(norm))) + 1) if norm > 0.5 else 0
    a = a / (2.0**s)
    n = a.shape[0]
    term = np.eye(n, dtype=complex)
    out = np.eye(n, dtype=complex)
    for k in range(1, 30):
        term = term @ a / k
        out = out + term
        if np.max(np.abs(term)) < 1e-18:
            break
    for _ in range(s):
        out = out @ out
    return out


def expm(m, scale: complex = 1.0) -> np.ndarray:
    """Matrix exponential ``exp(scale * m)``.

    Normal matrices go through a complex Schur form, which is diagonal for
    them; anything else uses scaled Taylor series with repeated squaring.
    """
    m = _as_array(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expm needs a square matrix, got shape {m.shape}")
    if m.shape[0] > MAX_DIM:
        raise ValueError(f"dimension {m.shape[0]} exceeds the supported maximum {MAX_DIM}")
    a = complex(scale) * m
    if is_normal(a):
        t, z = scipy.linalg.schur(a, output="complex")
        return (z * np.exp(np.diag(t))) @ z.conj().T
    return _expm_taylor(a)


def eig_sym(m, tol: float = 1e-10) -> np.ndarray:
    """Eigenvalues of a real symmetric 3x3 matrix, sorted descending."""
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got {m.shape}")
    if np.max(np.abs(m - m.T)) > tol * max(1.0, float(np.max(np.abs(m)))):
        raise ValueError("matrix is not symmetric")
    return np.linalg.eigvalsh(0.5 * (m + m.T))[::-1]


def eigh_sym(m) -> tuple[np.ndarray, np.ndarray]:
    """Like :func:`eig_sym` but also returns eigenvectors (as columns)."""
    eig_sym(m)
    m = np.asarray(m, dtype=float)
    w, v = np.linalg.eigh(0.5 * (m + m.T))
    return w[::-1], v[:, ::-1]


def trace_distance(a, b) -> float:
    """Half the trace norm of ``a - b``."""
    ma, mb = _as_array(a), _as_array(b)
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix) and a.dims != b.dims:
        raise ValueError(f"dimension mismatch: {a.dims} vs {b.dims}")
    if ma.shape != mb.shape:
        raise ValueError(f"dimension mismatch: {ma.shape} vs {mb.shape}")
    d = ma - mb
    d = 0.5 * (d + d.conj().T)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(d))))


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


# Pauli matrices in the basis where index 0 is the +1 eigenstate of sigma_z
IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)
