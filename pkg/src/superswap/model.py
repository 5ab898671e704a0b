"""Physical building blocks: decay parameters, Dicke states, collective jump
operators, the no-jump Hamiltonian, and atom-cavity state preparation.

Conventions: hbar = 1, gamma sets the time unit, distances are in units of
the emitted wavelength. Atom basis index 0 is the excited state |+>, index 1
the ground state |->; cavity basis index n is the n-photon Fock state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .qmath import StateVector, expm, kron_all, permute_subsystems

ATOM_DIM = 2
CAVITY_DIM = 2
GLOBAL_DIMS = (ATOM_DIM, ATOM_DIM, CAVITY_DIM, CAVITY_DIM)  # atom1, atom2, cavity1, cavity2
ATOMS = (0, 1)
CAVITIES = (2, 3)

SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)  # |-><+|
SIGMA_PLUS = SIGMA_MINUS.T.copy()
I2 = np.eye(2, dtype=complex)

EXCITED = np.array([1, 0], dtype=complex)
GROUND = np.array([0, 1], dtype=complex)
FOCK0 = np.array([1, 0], dtype=complex)
FOCK1 = np.array([0, 1], dtype=complex)


def collective_rate(d_over_lambda: float, gamma: float = 1.0) -> float:
    """Cross-damping rate of two atoms a distance ``d_over_lambda`` apart."""
    if not d_over_lambda > 0:
        raise ValueError(f"d_over_lambda must be positive, got {d_over_lambda}")
    x = 2.0 * math.pi * d_over_lambda
    return gamma * math.sin(x) / x


@dataclass(frozen=True)
class DecayParams:
    d_over_lambda: float
    gamma: float = 1.0
    Gamma: float = field(init=False)
    kappa: float = field(init=False)

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        G = collective_rate(self.d_over_lambda, self.gamma)
        object.__setattr__(self, "Gamma", G)
        kappa = (self.gamma - G) / (self.gamma + G) if self.gamma + G > 0 else math.inf
        object.__setattr__(self, "kappa", kappa)

    @property
    def rate_super(self) -> float:
        return self.gamma + self.Gamma

    @property
    def rate_sub(self) -> float:
        return self.gamma - self.Gamma


@dataclass(frozen=True)
class CouplingParams:
    g: float
    t: float

    def __post_init__(self):
        if self.g < 0 or self.t < 0:
            raise ValueError("coupling strength and interaction time must be non-negative")


@dataclass(frozen=True)
class DickeBasis:
    T1: StateVector
    T0: StateVector
    S0: StateVector
    Tm1: StateVector

    def as_columns(self) -> np.ndarray:
        """4x4 unitary whose columns are T1, T0, S0, T-1 in the product basis."""
        return np.column_stack([s.amplitudes for s in (self.T1, self.T0, self.S0, self.Tm1)])


def dicke_basis() -> DickeBasis:
    pp = np.kron(EXCITED, EXCITED)
    pm = np.kron(EXCITED, GROUND)
    mp = np.kron(GROUND, EXCITED)
    mm = np.kron(GROUND, GROUND)
    r = 1.0 / math.sqrt(2.0)
    dims = (ATOM_DIM, ATOM_DIM)
    return DickeBasis(
        T1=StateVector(dims, pp),
        T0=StateVector(dims, r * (pm + mp)),
        S0=StateVector(dims, r * (pm - mp)),
        Tm1=StateVector(dims, mm),
    )


def embed_atoms(op_atoms: np.ndarray) -> np.ndarray:
    """Extend a two-atom operator by the identity on both cavities."""
    return np.kron(op_atoms, np.eye(CAVITY_DIM * CAVITY_DIM, dtype=complex))


def atom_jump_operators(p: DecayParams) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric and antisymmetric collective lowering operators on the atoms only."""
    s1 = np.kron(SIGMA_MINUS, I2)
    s2 = np.kron(I2, SIGMA_MINUS)
    j1 = math.sqrt(p.rate_super / 2.0) * (s1 + s2)
    j2 = math.sqrt(max(p.rate_sub, 0.0) / 2.0) * (s1 - s2)
    return j1, j2


def jump_operators(p: DecayParams) -> tuple[np.ndarray, np.ndarray]:
    """(J1, J2) on the full atoms-cavities space."""
    j1, j2 = atom_jump_operators(p)
    return embed_atoms(j1), embed_atoms(j2)


def effective_hamiltonian(p: DecayParams, jumps=None) -> np.ndarray:
    """No-jump generator ``-(i/2) * sum_k J_k^dag J_k``.

    Uses the half-normalized Lindblad convention so that |T0> survives with
    probability exp(-(gamma + Gamma) t) and |T1> with exp(-2 gamma t).
    """
    if jumps is None:
        jumps = jump_operators(p)
    k = sum(j.conj().T @ j for j in jumps)
    return -0.5j * k


def jc_hamiltonian(g: float, n_fock: int = 2) -> np.ndarray:
    """Resonant Jaynes-Cummings coupling on atom (x) cavity, cavity truncated at ``n_fock`` levels."""
    b = np.diag(np.sqrt(np.arange(1, n_fock)), k=1).astype(complex)  # annihilation
    return g * (np.kron(SIGMA_PLUS, b) + np.kron(SIGMA_MINUS, b.conj().T))


def jc_evolve(state: StateVector, c: CouplingParams, tol: float = 1e-10) -> StateVector:
    """Evolve an (atom, cavity) state under the Jaynes-Cummings coupling.

    The evolution is carried out with a three-level cavity and projected back
    to {|0>, |1>}; leakage into |2> above ``tol`` means the input was outside
    the zero/one-excitation sector and is reported as an error.
    """
    if state.dims != (ATOM_DIM, CAVITY_DIM):
        raise ValueError(f"expected (atom, cavity) dims (2, 2), got {state.dims}")
    if abs(state.norm - 1.0) > 1e-12:
        raise ValueError("state must be normalized")
    big = np.zeros(ATOM_DIM * 3, dtype=complex)
    amps = state.amplitudes.reshape(ATOM_DIM, CAVITY_DIM)
    big.reshape(ATOM_DIM, 3)[:, :CAVITY_DIM] = amps
    u = expm(jc_hamiltonian(c.g, n_fock=3), -1j * c.t)
    out = (u @ big).reshape(ATOM_DIM, 3)
    kept = out[:, :CAVITY_DIM].reshape(-1)
    loss = 1.0 - float(np.vdot(kept, kept).real)
    if loss > tol:
        raise ValueError(f"norm loss {loss:.3e} outside the single-excitation sector")
    return StateVector((ATOM_DIM, CAVITY_DIM), kept)


# local phase on the cavity |1> component turning the -i of a quarter Rabi
# cycle into the -1 of the target singlet
_CAVITY_PHASE_FIX = np.diag([1.0, -1j]).astype(complex)


def prepare_atom_cavity_singlet(j: int = 1) -> StateVector:
    """``(|0>_c|+> - |1>_c|->)/sqrt(2)`` for atom-cavity pair ``j``, in (atom, cavity) order."""
    if j not in (1, 2):
        raise ValueError(f"system index must be 1 or 2, got {j}")
    start = StateVector((ATOM_DIM, CAVITY_DIM), np.kron(EXCITED, FOCK0))
    g = 1.0
    rotated = jc_evolve(start, CouplingParams(g=g, t=math.pi / (4.0 * g)))
    fixed = np.kron(I2, _CAVITY_PHASE_FIX) @ rotated.amplitudes
    return StateVector((ATOM_DIM, CAVITY_DIM), fixed)


def prepare_swap_input() -> StateVector:
    """Product of the two atom-cavity singlets in (atom1, atom2, cavity1, cavity2) order."""
    s1 = prepare_atom_cavity_singlet(1).amplitudes
    s2 = prepare_atom_cavity_singlet(2).amplitudes
    joint = np.kron(s1, s2)  # (atom1, cavity1, atom2, cavity2)
    amps = permute_subsystems(joint, (2, 2, 2, 2), (0, 2, 1, 3))
    return StateVector(GLOBAL_DIMS, amps)


def cavity_ket(n1: int, n2: int) -> np.ndarray:
    """|n1>_{c,1} |n2>_{c,2} on the two-cavity space."""
    return kron_all([FOCK1 if n1 else FOCK0, FOCK1 if n2 else FOCK0])


def psi_minus() -> np.ndarray:
    """(|1>_{c,1}|0>_{c,2} - |0>_{c,1}|1>_{c,2}) / sqrt(2)."""
    return (cavity_ket(1, 0) - cavity_ket(0, 1)) / math.sqrt(2.0)


def psi_plus() -> np.ndarray:
    return (cavity_ket(1, 0) + cavity_ket(0, 1)) / math.sqrt(2.0)


def swap_input_bell_expansion() -> StateVector:
    """The four-branch Dicke expansion of the pre-decay state, built term by term."""
    db = dicke_basis()
    c00, c11 = cavity_ket(0, 0), cavity_ket(1, 1)
    c10, c01 = cavity_ket(1, 0), cavity_ket(0, 1)
    # atoms occupy the leading factors, cavities the trailing ones
    amps = 0.5 * (
        np.kron(db.T1.amplitudes, c00)
        + np.kron(db.Tm1.amplitudes, c11)
        + np.kron(db.S0.amplitudes, c10 - c01) / math.sqrt(2.0)
        - np.kron(db.T0.amplitudes, c10 + c01) / math.sqrt(2.0)
    )
    return StateVector(GLOBAL_DIMS, amps)
