"""Scalar diagnostics: fidelity, Pauli averages, concurrence, fits, error budget."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import curve_fit

from .hilbert import IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z, partial_trace_cavity
from .model import PHI_MINUS, PHI_PLUS, DriveParams, SystemParams, bell_state, build_model

PAULI_NAMES = ("I", "X", "Y", "Z")
PAULIS = (IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z)
PAULI_LABELS = tuple(p + q for p, q in itertools.product(PAULI_NAMES, repeat=2))
# 16 x 4 x 4 stack in label order II, IX, ..., ZZ
PAULI_BASIS = np.array([np.kron(p, q) for p, q in itertools.product(PAULIS, repeat=2)])
PAULI_BASIS.setflags(write=False)

_YY = np.kron(SIGMA_Y, SIGMA_Y)


def two_qubit(rho: np.ndarray) -> np.ndarray:
    """Return the 4x4 qubit state, tracing out the cavity if present."""
    rho = np.asarray(rho)
    if rho.shape == (4, 4):
        return rho
    return partial_trace_cavity(rho)


@dataclass(frozen=True)
class PauliVector:
    """Sixteen averages <PQ> indexed by label ("XX") or position."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (16,):
            raise ValueError(f"expected 16 Pauli averages, got shape {values.shape}")
        object.__setattr__(self, "values", values)

    def __getitem__(self, key) -> float:
        if isinstance(key, str):
            key = PAULI_LABELS.index(key.upper())
        return float(self.values[key])

    def as_dict(self) -> dict[str, float]:
        return {label: float(v) for label, v in zip(PAULI_LABELS, self.values)}

    def to_density_matrix(self) -> np.ndarray:
        """rho = (1/4) sum <PQ> P (x) Q, with no physicality projection."""
        return np.tensordot(self.values, PAULI_BASIS, axes=1) / 4.0

    def fidelity(self, target: np.ndarray = PHI_MINUS) -> float:
        target = np.asarray(target, dtype=complex)
        return float(np.real(target.conj() @ self.to_density_matrix() @ target))


def pauli_averages(rho_2q: np.ndarray) -> PauliVector:
    rho_2q = two_qubit(rho_2q)
    return PauliVector(np.real(np.einsum("kij,ji->k", PAULI_BASIS, rho_2q)))


def fidelity(rho: np.ndarray, target: np.ndarray = PHI_MINUS) -> float:
    """<target| Tr_cavity(rho) |target>; |phi-> unless told otherwise."""
    target = np.asarray(target, dtype=complex)
    return float(np.real(target.conj() @ two_qubit(rho) @ target))


def concurrence(rho_2q: np.ndarray) -> float:
    """Wootters concurrence max(0, l1 - l2 - l3 - l4).

    The l_i are the decreasing square roots of the eigenvalues of
    rho (Y(x)Y) rho* (Y(x)Y), obtained here as singular values of
    sqrt(rho) sqrt(rho~) which keeps small ones accurate. Slightly negative
    eigenvalues of ``rho`` (linear-inversion tomography) are clipped to zero
    for this purpose only.
    """
    rho = two_qubit(rho_2q)
    rho = 0.5 * (rho + rho.conj().T)
    w, v = np.linalg.eigh(rho)
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    root_flip = _YY @ root.conj() @ _YY
    lam = np.linalg.svd(root @ root_flip, compute_uv=False)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


BELL_BASIS_LABELS = ("gg", "ee", "phi+", "phi-")


def basis_weights(rho_2q: np.ndarray) -> dict[str, float]:
    """Populations in {|gg>, |ee>, |phi+>, |phi->}."""
    rho = two_qubit(rho_2q)
    gg = np.array([1, 0, 0, 0], dtype=complex)
    ee = np.array([0, 0, 0, 1], dtype=complex)
    kets = (gg, ee, PHI_PLUS, PHI_MINUS)
    return {name: float(np.real(k.conj() @ rho @ k)) for name, k in zip(BELL_BASIS_LABELS, kets)}


def bell_diagonal_state(gg: float, ee: float, phi_plus: float, phi_minus: float) -> np.ndarray:
    """Mixture of |gg>, |ee>, |phi+>, |phi-> with the given weights."""
    weights = np.array([gg, ee, phi_plus, phi_minus], dtype=float)
    if np.any(weights < 0) or not math.isclose(weights.sum(), 1.0, abs_tol=1e-9):
        raise ValueError(f"weights must be non-negative and sum to one, got {weights}")
    kets = (np.eye(4)[0], np.eye(4)[3], bell_state(+1), bell_state(-1))
    return sum(w * np.outer(k, k.conj()) for w, k in zip(weights, kets)).astype(complex)


class FitError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExponentialFit:
    f_inf: float
    f_0: float
    tau: float  # us
    rms: float

    def __call__(self, t):
        return _exp_rise(np.asarray(t, dtype=float), self.f_inf, self.f_0, self.tau)


def _exp_rise(t, f_inf, f_0, tau):
    return f_inf - (f_inf - f_0) * np.exp(-t / tau)


def fit_exponential(times, values) -> ExponentialFit:
    """Least-squares fit of F(T) = F_inf - (F_inf - F_0) exp(-T / tau)."""
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise ValueError("times and values must be 1-d arrays of equal length")
    if t.size < 4:
        raise FitError(f"need at least 4 points for a 3-parameter fit, got {t.size}")
    if np.any(np.diff(t) <= 0):
        raise FitError("times must be strictly increasing")
    span = t[-1] - t[0]
    if np.ptp(y) <= 1e-9 * max(1.0, np.max(np.abs(y))):
        raise FitError("series is constant; the time constant is unidentifiable")
    p0 = (y[-1], y[0], span / 2.0)
    try:
        popt, pcov = curve_fit(_exp_rise, t, y, p0=p0, maxfev=20000)
    except (RuntimeError, ValueError) as exc:
        raise FitError(f"exponential fit did not converge from p0={p0}: {exc}") from exc
    f_inf, f_0, tau = map(float, popt)
    if not (np.all(np.isfinite(pcov)) and tau > 0):
        raise FitError(f"ill-conditioned fit: F_inf={f_inf:.4g}, F_0={f_0:.4g}, tau={tau:.4g}")
    rms = float(np.sqrt(np.mean((_exp_rise(t, *popt) - y) ** 2)))
    return ExponentialFit(f_inf, f_0, tau, rms)


BUDGET_CONFIGURATIONS = ("ideal", "chi mismatch", "T1 only", "Tphi only", "full")


def budget_systems(sys: SystemParams) -> dict[str, SystemParams]:
    """The five parameter sets: matched chi at chi_B with no decoherence, then
    one imperfection at a time, then everything."""
    inf = math.inf
    ideal = replace(sys, chi_A=sys.chi_B, T1_A=inf, T1_B=inf, Tphi_A=inf, Tphi_B=inf)
    return {
        "ideal": ideal,
        "chi mismatch": replace(ideal, chi_A=sys.chi_A),
        "T1 only": replace(ideal, T1_A=sys.T1_A, T1_B=sys.T1_B),
        "Tphi only": replace(ideal, Tphi_A=sys.Tphi_A, Tphi_B=sys.Tphi_B),
        "full": sys,
    }


@dataclass
class ErrorBudget:
    entries: list[tuple[str, float]] = field(default_factory=list)

    def __post_init__(self):
        if not any(name == "ideal" for name, _ in self.entries):
            raise ValueError("an error budget needs its ideal entry")

    @property
    def ideal(self) -> float:
        return dict(self.entries)["ideal"]

    def fidelity(self, name: str) -> float:
        return dict(self.entries)[name]

    def delta(self, name: str) -> float:
        return self.ideal - self.fidelity(name)

    def rows(self) -> list[tuple[str, float, float]]:
        return [(name, f, self.ideal - f) for name, f in self.entries]


def _budget_point(args):
    from .solver import steady_state

    sys, drives, t_final, tol = args
    return fidelity(steady_state(build_model(sys, drives), t_final, tol=tol).rho)


def error_budget(sys: SystemParams, drives: DriveParams, *, t_final: float = 10.0,
                 tol: float = 1e-6, workers: int = 1) -> ErrorBudget:
    """Steady-state fidelity for each budget configuration at fixed drives."""
    from .parallel import parallel_map

    systems = budget_systems(sys)
    tasks = [(s, drives, t_final, tol) for s in systems.values()]
    values = parallel_map(_budget_point, tasks, workers=workers)
    return ErrorBudget(list(zip(systems, values)))
