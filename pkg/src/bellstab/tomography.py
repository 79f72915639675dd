"""Joint-readout two-qubit tomography by linear inversion.

Each qubit gets one of four pre-rotations (Id, Rx(pi), Rx(pi/2), Ry(pi/2))
and the only observable read out is the projector |gg><gg|. The 16 settings
map the Pauli vector linearly onto the 16 outcome probabilities; inverting
that map recovers the averages.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .analysis import PAULI_BASIS, PauliVector, two_qubit
from .hilbert import SIGMA_X, SIGMA_Y


def rx(theta: float) -> np.ndarray:
    return expm(-0.5j * theta * SIGMA_X)


def ry(theta: float) -> np.ndarray:
    return expm(-0.5j * theta * SIGMA_Y)


ROTATIONS: dict[str, np.ndarray] = {
    "Id": np.eye(2, dtype=complex),
    "Rx(pi)": rx(np.pi),
    "Rx(pi/2)": rx(np.pi / 2),
    "Ry(pi/2)": ry(np.pi / 2),
}

P_GG = np.diag([1.0, 0.0, 0.0, 0.0]).astype(complex)


@dataclass(frozen=True)
class DesignMatrix:
    """Rows: rotation pairs (A, B); columns: Pauli labels II..ZZ."""

    matrix: np.ndarray = field(repr=False)
    settings: tuple[tuple[str, str], ...]
    unitaries: np.ndarray = field(repr=False)  # 16 x 4 x 4

    @property
    def condition_number(self) -> float:
        return float(np.linalg.cond(self.matrix))

    def row(self, a: str, b: str) -> np.ndarray:
        return self.matrix[self.settings.index((a, b))]


def build_design_matrix(rotations: dict[str, np.ndarray] | None = None) -> DesignMatrix:
    """Row (i, j) holds the Pauli coefficients of (U_i (x) U_j)^dag P_gg (U_i (x) U_j) / 4."""
    rotations = ROTATIONS if rotations is None else rotations
    settings, unitaries, rows = [], [], []
    for (na, ua), (nb, ub) in itertools.product(rotations.items(), repeat=2):
        u = np.kron(ua, ub)
        measured = u.conj().T @ P_GG @ u
        rows.append(np.real(np.einsum("kij,ji->k", PAULI_BASIS, measured)) / 4.0)
        settings.append((na, nb))
        unitaries.append(u)
    matrix = np.array(rows)
    if np.linalg.matrix_rank(matrix) < matrix.shape[1]:
        raise np.linalg.LinAlgError("rotation set does not give an informationally complete design")
    return DesignMatrix(matrix, tuple(settings), np.array(unitaries))


_DEFAULT_DESIGN = None


def default_design() -> DesignMatrix:
    global _DEFAULT_DESIGN
    if _DEFAULT_DESIGN is None:
        _DEFAULT_DESIGN = build_design_matrix()
    return _DEFAULT_DESIGN


def simulate_tomography(rho_2q: np.ndarray, readout=None, shots: int | None = None,
                        rng: np.random.Generator | int | None = None,
                        design: DesignMatrix | None = None) -> np.ndarray:
    """The 16 measured |gg> frequencies.

    Without ``readout`` and ``shots`` these are the exact probabilities
    Tr[U rho U^dag P_gg]. A ``readout`` model mixes in its assignment errors;
    ``shots`` repeats each setting that many times and returns binomial
    frequencies.
    """
    design = design or default_design()
    rho = two_qubit(rho_2q)
    row = design.unitaries[:, 0, :]  # <gg| U
    probs = np.real(np.einsum("rj,jk,rk->r", row, rho, row.conj()))
    if readout is not None:
        right = readout.assignment_fidelity()
        probs = probs * right["gg"] + (1.0 - probs) * (1.0 - right["not"])
    if shots is None:
        return probs
    if shots < 1:
        raise ValueError("shots must be positive")
    probs = np.clip(probs, 0.0, 1.0)
    rng = np.random.default_rng(rng)
    return rng.binomial(int(shots), probs) / float(shots)


def reconstruct(outcomes, design: DesignMatrix | None = None) -> PauliVector:
    """Linear inversion with <II> pinned to one.

    Noise-free outcomes are reproduced exactly; with shot noise this is the
    least-squares solution of the remaining 15 unknowns.
    """
    design = design or default_design()
    y = np.asarray(outcomes, dtype=float)
    if y.shape != (design.matrix.shape[0],):
        raise ValueError(f"expected {design.matrix.shape[0]} outcomes, got shape {y.shape}")
    rest, *_ = np.linalg.lstsq(design.matrix[:, 1:], y - design.matrix[:, 0], rcond=None)
    return PauliVector(np.concatenate([[1.0], rest]))


CARDINAL_STATES: dict[str, np.ndarray] = {
    "+X": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "-X": np.array([1, -1], dtype=complex) / np.sqrt(2),
    "+Y": np.array([1, 1j], dtype=complex) / np.sqrt(2),
    "-Y": np.array([1, -1j], dtype=complex) / np.sqrt(2),
    "+Z": np.array([1, 0], dtype=complex),
    "-Z": np.array([0, 1], dtype=complex),
}


def clifford_states() -> dict[str, np.ndarray]:
    """The 36 product states |a, b> of single-qubit Pauli eigenstates."""
    return {f"{a},{b}": np.kron(ka, kb)
            for (a, ka), (b, kb) in itertools.product(CARDINAL_STATES.items(), repeat=2)}


def clifford_suite(readout=None, shots: int | None = None, seed: int | None = None,
                   design: DesignMatrix | None = None) -> dict[str, float]:
    """Tomography fidelity for each of the 36 product states.

    Each state gets an independent random stream derived from ``seed``.
    """
    states = clifford_states()
    streams = np.random.SeedSequence(seed).spawn(len(states))
    out = {}
    for (label, ket), ss in zip(states.items(), streams):
        rho = np.outer(ket, ket.conj())
        outcomes = simulate_tomography(rho, readout, shots, np.random.default_rng(ss), design)
        out[label] = reconstruct(outcomes, design).fidelity(ket)
    return out
