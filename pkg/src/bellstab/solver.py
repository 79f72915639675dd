"""Time integration of the Lindblad equation.

The density matrix is integrated directly as a dense complex matrix with an
adaptive Dormand-Prince 5(4) pair. The steady state is whatever the
trajectory reaches at ``t_final`` (10 us by default); since H(t) is periodic
the asymptote is a Floquet cycle, so :func:`steady_state` also reports how
far the state moved over the last drive period.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sparse

from .model import DriveParams, LindbladModel, build_model

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    """Integration failed: step-size underflow or a broken state invariant."""


class LindbladGenerator:
    """Right-hand side of the master equation for one model.

    The anticommutator parts of the dissipators are folded into a
    non-Hermitian H_eff, and the jump terms sum(g L rho L^dag) are applied as
    one sparse superoperator on the row-major flattened state.
    """

    def __init__(self, model: LindbladModel):
        self.model = model
        dim = model.space.dim
        self.dim = dim
        decay = np.zeros((dim, dim), dtype=complex)
        jump = sparse.csr_matrix((dim * dim, dim * dim), dtype=complex)
        for ch in model.channels:
            if ch.rate == 0:
                continue
            op = ch.operator
            decay += ch.rate * (op.conj().T @ op)
            lop = sparse.csr_matrix(op)
            jump = jump + ch.rate * sparse.kron(lop, lop.conj(), format="csr")
        jump = jump.tocsr()
        # purely diagonal superoperator entries (dephasing) go elementwise
        diag = jump.diagonal()
        self.jump_diag = diag.reshape(dim, dim)
        self.jump = (jump - sparse.diags(diag)).tocsr()
        self.jump.eliminate_zeros()
        rep = model.repump
        # H_eff(t) = sum_i coeff_i(t) * terms[i] with real coefficients
        self.terms = np.stack([
            model.static - 0.5j * decay,
            model.cavity_drive,
            rep + rep.conj().T,
            1j * (rep - rep.conj().T),
        ]).reshape(4, dim * dim)
        self.nu = model.nu
        self.n = model.repump_index
        self.n_evals = 0

    def h_eff(self, t: float) -> np.ndarray:
        theta = self.n * self.nu * t
        coeffs = np.array([1.0, math.cos(self.nu * t), math.cos(theta), math.sin(theta)])
        return (coeffs @ self.terms).reshape(self.dim, self.dim)

    def _jumps(self, rho: np.ndarray) -> np.ndarray:
        out = (self.jump @ rho.ravel()).reshape(self.dim, self.dim)
        out += self.jump_diag * rho
        return out

    def __call__(self, t: float, rho: np.ndarray) -> np.ndarray:
        """d rho / dt for Hermitian ``rho`` (one dense matmul).

        The result is Hermitian by construction: the map used here amplifies
        any anti-Hermitian rounding residue, so none may be produced.
        """
        self.n_evals += 1
        half = self._jumps(rho)
        half *= 0.5
        m = self.h_eff(t) @ rho
        m *= -1j
        half += m
        half += half.conj().T
        return half

    def general(self, t: float, rho: np.ndarray) -> np.ndarray:
        """d rho / dt without assuming Hermiticity."""
        h = self.h_eff(t)
        return -1j * (h @ rho - rho @ h.conj().T) + self._jumps(rho)


def lindblad_rhs(rho: np.ndarray, t: float, model: LindbladModel) -> np.ndarray:
    """-i[H(t), rho] + sum_k rate_k D[L_k] rho, in 1/us."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (model.space.dim, model.space.dim):
        raise ValueError(f"state of shape {rho.shape} does not match model dimension {model.space.dim}")
    return LindbladGenerator(model).general(t, rho)


@dataclass
class StepStats:
    accepted: int = 0
    rejected: int = 0
    n_evals: int = 0
    max_error: float = 0.0  # largest normalized error among accepted steps
    min_step: float = math.inf
    max_step: float = 0.0


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray = field(repr=False)
    stats: StepStats

    def __len__(self):
        return len(self.times)

    def at(self, t: float) -> np.ndarray:
        i = int(np.argmin(np.abs(self.times - t)))
        if not math.isclose(self.times[i], t, rel_tol=1e-9, abs_tol=1e-12):
            raise KeyError(f"no snapshot at t={t}")
        return self.states[i]

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [0.0],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array(_A[6] + [0.0])
_A = [np.array(row[:i] if i else [], dtype=complex) for i, row in enumerate(_A)]
_B_LOW = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = (_B - _B_LOW).astype(complex)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


def _error_norm(err, y, y_new, rtol, atol):
    scale = np.maximum(np.abs(y), np.abs(y_new))
    scale *= rtol
    scale += atol
    if atol == 0:
        np.maximum(scale, np.finfo(float).tiny, out=scale)
    ratio = np.abs(err)
    ratio /= scale
    return math.sqrt(float(np.vdot(ratio, ratio).real) / ratio.size)


def _snapshot_grid(t_start, t_end, snapshot_every, times):
    if times is not None:
        grid = np.asarray(sorted(set(float(t) for t in times)))
        if grid.size and (grid[0] < t_start - 1e-12 or grid[-1] > t_end + 1e-12):
            raise ValueError("snapshot times must lie inside [t_start, t_end]")
        return grid
    if snapshot_every is None or snapshot_every <= 0:
        return np.array([t_start, t_end])
    n = int(math.floor((t_end - t_start) / snapshot_every + 1e-9))
    grid = t_start + snapshot_every * np.arange(n + 1)
    if t_end - grid[-1] > 1e-9 * max(1.0, abs(t_end)):
        grid = np.append(grid, t_end)
    else:
        grid[-1] = t_end
    return grid


def evolve(model: LindbladModel, rho0: np.ndarray, t_end: float, *, t_start: float = 0.0,
           tol: float = 1e-6, atol: float | None = None, snapshot_every: float | None = 0.1,
           times=None, first_step: float = 1e-3, max_step: float | None = None,
           check: bool = True) -> Trajectory:
    """Integrate rho from ``t_start`` to ``t_end`` (us).

    Snapshots are taken on a grid of spacing ``snapshot_every`` (both ends
    included) or at explicit ``times``; steps are shortened to land on them
    exactly. ``tol`` is the relative tolerance of the embedded error
    estimate; the absolute floor defaults to ``tol / 100`` since entries of a
    unit-trace state are bounded by one.
    """
    rho = np.array(rho0, dtype=complex)
    dim = model.space.dim
    if rho.shape != (dim, dim):
        raise ValueError(f"initial state of shape {rho.shape} does not match model dimension {dim}")
    if t_end < t_start:
        raise ValueError("t_end must not precede t_start")
    atol = tol * 1e-2 if atol is None else atol
    limit = 10.0 * tol
    trace0 = np.trace(rho).real

    grid = _snapshot_grid(t_start, t_end, snapshot_every, times)
    f = LindbladGenerator(model)
    stats = StepStats()
    out_t, out_s = [], []
    t = t_start
    k = np.empty((7, dim, dim), dtype=complex)
    k_flat = k.reshape(7, dim * dim)
    k[0] = f(t, rho)
    h = min(first_step, max_step or math.inf)
    gi = 0

    def record():
        if check:
            _check_state(rho, trace0, limit, t)
        out_t.append(t)
        out_s.append(rho.copy())

    while gi < len(grid) and grid[gi] <= t + 1e-12:
        record()
        gi += 1

    while gi < len(grid):
        target = grid[gi]
        step = min(h, target - t)
        landing = step >= target - t - 1e-12
        if step < 1e-12 * max(1.0, abs(t)):
            raise SolverError(f"step size underflow at t={t:.9g} us (step {step:.3g}, "
                              f"last local error {stats.max_error:.3g})")
        for s in range(1, 7):
            acc = ((step * _A[s]) @ k_flat[:s]).reshape(dim, dim)
            acc += rho
            k[s] = f(t + _C[s] * step, acc)
        y_new = acc  # stage 7 argument is the 5th-order solution (FSAL)
        err = ((step * _E) @ k_flat).reshape(dim, dim)
        en = _error_norm(err, rho, y_new, tol, atol)
        if en <= 1.0:
            stats.accepted += 1
            stats.max_error = max(stats.max_error, en)
            stats.min_step = min(stats.min_step, step)
            stats.max_step = max(stats.max_step, step)
            t = target if landing else t + step
            rho = y_new
            k[0] = k[6]
            factor = _MAX_FACTOR if en == 0 else min(_MAX_FACTOR, _SAFETY * en ** -0.2)
            # a step clipped to hit a snapshot says little about the next one
            if not landing or step >= h:
                h = step * factor
            if max_step:
                h = min(h, max_step)
            while gi < len(grid) and grid[gi] <= t + 1e-12:
                record()
                gi += 1
        else:
            stats.rejected += 1
            h = step * max(_MIN_FACTOR, _SAFETY * en ** -0.2)
            if not math.isfinite(en):
                h = step * _MIN_FACTOR
    stats.n_evals = f.n_evals
    traj = Trajectory(np.array(out_t), np.array(out_s), stats)
    if check:
        lowest = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])
        if lowest < -limit:
            raise SolverError(f"state lost positivity at t={t:.9g} us (min eigenvalue {lowest:.3g})")
    log.debug("evolve %.3g -> %.3g us: %d accepted, %d rejected steps", t_start, t_end,
              stats.accepted, stats.rejected)
    return traj


def _check_state(rho, trace0, limit, t):
    trace_err = abs(np.trace(rho).real - trace0)
    herm_err = float(np.max(np.abs(rho - rho.conj().T)))
    if not (trace_err <= limit and herm_err <= limit):
        raise SolverError(f"state invariant violated at t={t:.9g} us: trace drift {trace_err:.3g}, "
                          f"Hermiticity error {herm_err:.3g}")


@dataclass
class SteadyState:
    rho: np.ndarray = field(repr=False)
    time: float
    residual: float  # ||rho(t) - rho(t - T_d)||_F
    stats: StepStats
    rho_period_mean: np.ndarray | None = field(default=None, repr=False)


def steady_state(model: LindbladModel, t_final: float = 10.0, *, tol: float = 1e-6,
                 rho0: np.ndarray | None = None, period_average: bool = False,
                 samples_per_period: int = 16) -> SteadyState:
    """Long-time state rho(t_final) from rho0 (default: thermal/ground start)."""
    from .model import initial_state

    if rho0 is None:
        rho0 = initial_state(model.sys, model.space)
    period = model.drive_period
    t_back = max(0.0, t_final - period)
    if period_average:
        grid = np.linspace(t_back, t_final, samples_per_period + 1)
    else:
        grid = np.array([t_back, t_final])
    traj = evolve(model, rho0, t_final, tol=tol, times=grid)
    rho = traj.states[-1]
    residual = float(np.linalg.norm(rho - traj.states[0]))
    mean = traj.states[:-1].mean(axis=0) if period_average else None
    return SteadyState(rho=rho, time=t_final, residual=residual, stats=traj.stats, rho_period_mean=mean)


def free_decay(rho: np.ndarray, model: LindbladModel, duration: float, *, tol: float = 1e-6) -> np.ndarray:
    """Evolve with all drives off and dissipators on (pre-tomography wait)."""
    if duration <= 0:
        return np.array(rho, dtype=complex)
    idle = build_model(model.sys, DriveParams.off(), model.space)
    return evolve(idle, rho, duration, tol=tol, snapshot_every=None).final
