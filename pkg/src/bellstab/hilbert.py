"""Dense operators on the two-qubit + cavity space.

Factor order is fixed as (qubit A, qubit B, cavity). Qubit index 0 is |g>,
index 1 is |e>, and sigma_z|g> = +|g>. A basis state |i_A, i_B, n> sits at
flat index ``(2 * i_A + i_B) * n_cavity + n``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# |e><g| and |g><e| with g at index 0
SIGMA_PLUS = np.array([[0, 0], [1, 0]], dtype=complex)
SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)

for _m in (IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z, SIGMA_PLUS, SIGMA_MINUS):
    _m.setflags(write=False)

SUBSYSTEMS = ("A", "B", "cavity")


def kron(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of any number of matrices, left to right."""
    if not ops:
        raise ValueError("kron needs at least one operand")
    return reduce(np.kron, (np.asarray(op) for op in ops))


def annihilation(n_levels: int) -> np.ndarray:
    """Truncated ladder operator, ``a|n> = sqrt(n)|n-1>``.

    No correction is applied at the truncation edge, so ``[a, a^dag]`` is
    the identity except for the last level.
    """
    if int(n_levels) != n_levels or n_levels < 2:
        raise ValueError(f"cavity truncation must be an integer >= 2, got {n_levels!r}")
    return np.diag(np.sqrt(np.arange(1, int(n_levels))), k=1).astype(complex)


def number(n_levels: int) -> np.ndarray:
    return np.diag(np.arange(int(n_levels))).astype(complex)


@dataclass(frozen=True)
class HilbertSpace:
    """Qubit A (x) qubit B (x) cavity truncated at ``n_cavity`` Fock levels."""

    n_cavity: int = 15

    def __post_init__(self):
        if int(self.n_cavity) != self.n_cavity or self.n_cavity < 2:
            raise ValueError(f"n_cavity must be an integer >= 2, got {self.n_cavity!r}")

    @property
    def dim(self) -> int:
        return 4 * self.n_cavity

    @property
    def dims(self) -> tuple[int, int, int]:
        return (2, 2, self.n_cavity)

    def index(self, i_a: int, i_b: int, n: int) -> int:
        if i_a not in (0, 1) or i_b not in (0, 1) or not 0 <= n < self.n_cavity:
            raise IndexError(f"no basis state ({i_a}, {i_b}, {n}) in {self}")
        return (2 * i_a + i_b) * self.n_cavity + n

    def basis_ket(self, i_a: int, i_b: int, n: int = 0) -> np.ndarray:
        ket = np.zeros(self.dim, dtype=complex)
        ket[self.index(i_a, i_b, n)] = 1.0
        return ket

    def ket(self, qubits: np.ndarray, n: int = 0) -> np.ndarray:
        """Product ket ``|qubits> (x) |n>`` from a 4-component two-qubit ket."""
        qubits = np.asarray(qubits, dtype=complex)
        if qubits.shape != (4,):
            raise ValueError(f"two-qubit ket must have shape (4,), got {qubits.shape}")
        fock = np.zeros(self.n_cavity, dtype=complex)
        fock[n] = 1.0
        return np.kron(qubits, fock)

    def embed(self, op: np.ndarray, which: str) -> np.ndarray:
        return embed(op, which, self)

    def identity(self) -> np.ndarray:
        return np.eye(self.dim, dtype=complex)

    def annihilation(self) -> np.ndarray:
        return embed(annihilation(self.n_cavity), "cavity", self)


def embed(op: np.ndarray, which: str, space: HilbertSpace) -> np.ndarray:
    """Lift a single-subsystem operator to the full space.

    ``which`` is one of ``"A"``, ``"B"`` or ``"cavity"``.
    """
    op = np.asarray(op, dtype=complex)
    if which not in SUBSYSTEMS:
        raise ValueError(f"unknown subsystem {which!r}; expected one of {SUBSYSTEMS}")
    size = space.dims[SUBSYSTEMS.index(which)]
    if op.shape != (size, size):
        raise ValueError(f"operator of shape {op.shape} does not act on subsystem "
                         f"{which!r} of dimension {size}")
    factors = [np.eye(d, dtype=complex) for d in space.dims]
    factors[SUBSYSTEMS.index(which)] = op
    return kron(*factors)


def expectation(rho: np.ndarray, op: np.ndarray) -> complex:
    """Tr(rho @ op) without forming the product."""
    rho = np.asarray(rho)
    op = np.asarray(op)
    if rho.shape != op.shape or rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"shape mismatch: state {rho.shape} vs operator {op.shape}")
    return complex(np.einsum("ij,ji->", rho, op))


def partial_trace_cavity(rho: np.ndarray, n_cavity: int | None = None) -> np.ndarray:
    """Reduce a full-space density matrix to the 4x4 two-qubit state."""
    rho = np.asarray(rho)
    dim = rho.shape[0]
    if n_cavity is None:
        if dim % 4:
            raise ValueError(f"dimension {dim} is not 4 * n_cavity")
        n_cavity = dim // 4
    if rho.shape != (4 * n_cavity, 4 * n_cavity):
        raise ValueError(f"state of shape {rho.shape} is not on a space with n_cavity={n_cavity}")
    return np.einsum("ikjk->ij", rho.reshape(4, n_cavity, 4, n_cavity))


def projector(ket: np.ndarray) -> np.ndarray:
    ket = np.asarray(ket, dtype=complex)
    return np.outer(ket, ket.conj())


def is_hermitian(m: np.ndarray, atol: float = 1e-12) -> bool:
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= atol)
