"""Physical parameters and the rotating-frame Lindblad model.

Configuration values are ordinary frequencies in MHz (nu = omega / 2 pi) and
times in microseconds. The factor 2 pi is applied once, in
:func:`build_model`; everything downstream works in rad/us.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .hilbert import (
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_X,
    SIGMA_Z,
    HilbertSpace,
    annihilation,
    embed,
    number,
)

TWO_PI = 2.0 * math.pi


def tphi_from_t1_t2(t1: float, t2: float) -> float:
    """Pure dephasing time from 1/T_phi = 1/T2 - 1/(2 T1).

    Returns ``inf`` at the T2 = 2 T1 limit.
    """
    if t1 <= 0 or t2 <= 0:
        raise ValueError(f"T1 and T2 must be positive, got T1={t1}, T2={t2}")
    if t2 > 2 * t1 * (1 + 1e-12):
        raise ValueError(f"unphysical coherence: T2={t2} us exceeds 2*T1={2 * t1} us")
    rate = 1.0 / t2 - 1.0 / (2.0 * t1)
    if rate <= 1e-15 / t2:
        return math.inf
    return 1.0 / rate


def epsilon_from_nbar(kappa: float, nbar: float) -> float:
    """Cavity drive amplitude kappa * sqrt(nbar) / 2, in the units of kappa."""
    if nbar < 0:
        raise ValueError(f"mean photon number must be non-negative, got {nbar}")
    return kappa * math.sqrt(nbar) / 2.0


@dataclass(frozen=True)
class SystemParams:
    """Qubit-qubit-cavity constants (MHz and us).

    ``Tphi_*`` may be ``math.inf`` to switch dephasing off, likewise ``T1_*``.
    The lab-frame carrier frequencies and anharmonicities are kept for
    reference only; the simulation never reads them.
    """

    chi_A: float = 6.5
    chi_B: float = 5.9
    kappa: float = 1.7
    T1_A: float = 16.0
    T1_B: float = 9.0
    Tphi_A: float = 32.0 / 3.0  # from T1 = 16 us, T2 = 8 us
    Tphi_B: float = 36.0
    n_cavity: int = 15
    p_e_A: float = 0.0
    p_e_B: float = 0.0
    # reference only
    omega_A0_GHz: float = 5.238
    omega_B0_GHz: float = 6.304
    omega_c_gg_GHz: float = 7.453
    alpha_A_MHz: float = 220.0
    alpha_B_MHz: float = 200.0

    def __post_init__(self):
        for name in ("chi_A", "chi_B", "kappa", "T1_A", "T1_B", "Tphi_A", "Tphi_B"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value}")
        if int(self.n_cavity) != self.n_cavity or self.n_cavity < 2:
            raise ValueError(f"n_cavity must be an integer >= 2, got {self.n_cavity}")
        for name in ("p_e_A", "p_e_B"):
            value = getattr(self, name)
            if not 0 <= value < 0.5:
                raise ValueError(f"{name} must lie in [0, 0.5), got {value}")

    @classmethod
    def ideal(cls, **overrides) -> "SystemParams":
        """Matched couplings at chi_B and no qubit decoherence."""
        base = cls()
        values = dict(chi_A=base.chi_B, chi_B=base.chi_B, T1_A=math.inf, T1_B=math.inf,
                      Tphi_A=math.inf, Tphi_B=math.inf)
        values.update(overrides)
        return replace(base, **values)

    @property
    def space(self) -> HilbertSpace:
        return HilbertSpace(self.n_cavity)

    @property
    def drive_frequency(self) -> float:
        """Cavity-drive modulation (chi_A + chi_B) / 2 in MHz."""
        return 0.5 * (self.chi_A + self.chi_B)

    @property
    def drive_period(self) -> float:
        """Period of H(t) in us."""
        return 1.0 / self.drive_frequency


@dataclass(frozen=True)
class DriveParams:
    """The six stabilization tones.

    ``omega0`` and ``omegan`` are the zero- and n-photon Rabi amplitudes in
    MHz; ``nbar`` sets the two cavity tones through ``epsilon_from_nbar``.
    ``n_repump`` defaults to ``round(nbar)``. ``phase_n`` is the phase of
    Bob's n-photon tone relative to Alice's and ``phase_0`` that of his
    zero-photon tone. The defaults (pi, 0) stabilize |phi->; (0, pi) is the
    same loop seen through sigma_z on Bob and stabilizes |phi+>.
    """

    nbar: float = 3.0
    omega0: float = 0.85
    omegan: float = 0.85
    n_repump: int | None = None
    phase_n: float = math.pi
    phase_0: float = 0.0

    def __post_init__(self):
        if not self.nbar >= 0:
            raise ValueError(f"nbar must be non-negative, got {self.nbar}")
        if not (self.omega0 >= 0 and self.omegan >= 0):
            raise ValueError("Rabi amplitudes must be non-negative")
        if self.n_repump is not None and (int(self.n_repump) != self.n_repump or self.n_repump < 0):
            raise ValueError(f"n_repump must be a non-negative integer, got {self.n_repump}")

    @classmethod
    def off(cls) -> "DriveParams":
        return cls(nbar=0.0, omega0=0.0, omegan=0.0)

    @classmethod
    def relative(cls, kappa: float, nbar: float = 3.0, omega0: float = 0.5, omegan: float = 0.5,
                 **kwargs) -> "DriveParams":
        """Rabi amplitudes given as fractions of kappa."""
        return cls(nbar=nbar, omega0=omega0 * kappa, omegan=omegan * kappa, **kwargs)

    @property
    def repump_index(self) -> int:
        if self.n_repump is not None:
            return int(self.n_repump)
        return int(round(self.nbar))


@dataclass(frozen=True)
class CollapseChannel:
    name: str
    operator: np.ndarray = field(repr=False)
    rate: float  # 1/us

    def __post_init__(self):
        if not self.rate >= 0:
            raise ValueError(f"collapse rate must be non-negative, got {self.rate}")


def collapse_channels(sys: SystemParams, space: HilbertSpace | None = None) -> list[CollapseChannel]:
    """Dissipators of the model, each applied as ``rate * D[operator]``.

    kappa is converted to rad/us; T1 and T_phi rates are plain inverse times.
    Channels with an infinite time constant are left out.
    """
    space = space or sys.space
    channels = [CollapseChannel("cavity decay", space.annihilation(), TWO_PI * sys.kappa)]
    for q, t1 in (("A", sys.T1_A), ("B", sys.T1_B)):
        if math.isfinite(t1):
            channels.append(CollapseChannel(f"relaxation {q}", embed(SIGMA_MINUS, q, space), 1.0 / t1))
    for q, tphi in (("A", sys.Tphi_A), ("B", sys.Tphi_B)):
        if math.isfinite(tphi):
            channels.append(CollapseChannel(f"dephasing {q}", embed(SIGMA_Z, q, space), 1.0 / (2.0 * tphi)))
    return channels


@dataclass(frozen=True, eq=False)
class LindbladModel:
    """Rotating-frame generator, split into static and modulated pieces.

    H(t) = static + cos(nu t) * cavity_drive + e^{i n nu t} * repump + h.c.
    All operators in rad/us.
    """

    sys: SystemParams
    drives: DriveParams
    space: HilbertSpace
    static: np.ndarray = field(repr=False)
    cavity_drive: np.ndarray = field(repr=False)
    repump: np.ndarray = field(repr=False)
    nu: float
    repump_index: int
    channels: tuple[CollapseChannel, ...] = field(repr=False)

    @property
    def drive_period(self) -> float:
        return TWO_PI / self.nu

    def hamiltonian(self, t: float) -> np.ndarray:
        phase = np.exp(1j * self.repump_index * self.nu * t)
        rep = phase * self.repump
        return self.static + math.cos(self.nu * t) * self.cavity_drive + rep + rep.conj().T

    def with_drives(self, drives: DriveParams) -> "LindbladModel":
        return build_model(self.sys, drives, self.space)


def build_model(sys: SystemParams, drives: DriveParams, space: HilbertSpace | None = None) -> LindbladModel:
    space = space or sys.space
    if space.n_cavity != sys.n_cavity:
        raise ValueError(f"space truncation {space.n_cavity} disagrees with parameters ({sys.n_cavity})")
    chi_a, chi_b = TWO_PI * sys.chi_A, TWO_PI * sys.chi_B
    a = annihilation(space.n_cavity)
    n_op = embed(number(space.n_cavity), "cavity", space)
    dispersive = (0.5 * chi_a * embed(SIGMA_Z, "A", space) + 0.5 * chi_b * embed(SIGMA_Z, "B", space)) @ n_op
    bob0 = np.exp(1j * drives.phase_0) * embed(SIGMA_PLUS, "B", space)
    rabi0 = TWO_PI * drives.omega0 * (embed(SIGMA_X, "A", space) + bob0 + bob0.conj().T)
    eps = TWO_PI * epsilon_from_nbar(sys.kappa, drives.nbar)
    cavity_drive = 2.0 * eps * embed(a + a.conj().T, "cavity", space)
    # Tones at omega^0 - n nu sit on the n-photon lines once the qubit splitting
    # is lowered by chi * n, which needs e^{+i n nu t} on |e><g| in this frame.
    repump = TWO_PI * drives.omegan * (embed(SIGMA_PLUS, "A", space)
                                       + np.exp(1j * drives.phase_n) * embed(SIGMA_PLUS, "B", space))
    return LindbladModel(
        sys=sys,
        drives=drives,
        space=space,
        static=dispersive + rabi0,
        cavity_drive=cavity_drive,
        repump=repump,
        nu=0.5 * (chi_a + chi_b),
        repump_index=drives.repump_index,
        channels=tuple(collapse_channels(sys, space)),
    )


def hamiltonian_at(t: float, sys: SystemParams, drives: DriveParams,
                   space: HilbertSpace | None = None) -> np.ndarray:
    """Rotating-frame H(t) in rad/us. Builds the model on every call."""
    return build_model(sys, drives, space).hamiltonian(t)


def bell_state(sign: int = -1) -> np.ndarray:
    """(|ge> + sign |eg>) / sqrt 2 as a 4-component ket."""
    if sign not in (-1, 1):
        raise ValueError("sign must be +1 or -1")
    ket = np.zeros(4, dtype=complex)
    ket[1] = 1.0
    ket[2] = sign
    return ket / math.sqrt(2.0)


PHI_MINUS = bell_state(-1)
PHI_PLUS = bell_state(+1)


def bell_projector(space: HilbertSpace, sign: int = -1) -> np.ndarray:
    """|phi-><phi-| (x) I_cavity (or |phi+> with ``sign=+1``)."""
    ket = bell_state(sign)
    return np.kron(np.outer(ket, ket.conj()), np.eye(space.n_cavity, dtype=complex))


def zeno_parameter(drives: DriveParams, sys: SystemParams) -> float:
    """Parity-measurement rate nbar * kappa / 2 over the Rabi amplitude."""
    if drives.omega0 <= 0:
        raise ValueError("Zeno parameter is undefined for a zero Rabi amplitude")
    return drives.nbar * sys.kappa / 2.0 / drives.omega0


def initial_state(sys: SystemParams, space: HilbertSpace | None = None) -> np.ndarray:
    """Thermal product state of the qubits with an empty cavity.

    With ``p_e_A = p_e_B = 0`` this is |gg, 0><gg, 0|.
    """
    space = space or sys.space
    qa = np.diag([1.0 - sys.p_e_A, sys.p_e_A])
    qb = np.diag([1.0 - sys.p_e_B, sys.p_e_B])
    vac = np.zeros((space.n_cavity, space.n_cavity))
    vac[0, 0] = 1.0
    return np.kron(np.kron(qa, qb), vac).astype(complex)
