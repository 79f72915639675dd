"""Single-shot dispersive readout of |gg><gg| and post-selection on it.

Outcomes I_m are in units of sigma, the mean of the two Gaussian widths. An
outcome above the threshold is assigned GG, below it not-GG. Assignment
errors beyond the Gaussian overlap are modelled as label flips applied before
the Gaussian draw.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .analysis import two_qubit


@dataclass(frozen=True)
class ReadoutModel:
    mu_gg: float
    mu_not: float
    sigma_gg_ratio: float = 0.75  # width of the GG Gaussian relative to the other
    threshold: float = 0.0
    eps_gg: float = 0.0  # P(gg reads as not-GG) from flips
    eps_not: float = 0.0  # P(not-gg reads as GG) from flips

    def __post_init__(self):
        if not self.separation > 0:
            raise ValueError("the two outcome distributions must be separated")
        if not self.sigma_gg_ratio > 0:
            raise ValueError("sigma_gg_ratio must be positive")
        for name in ("eps_gg", "eps_not"):
            if not 0 <= getattr(self, name) < 0.5:
                raise ValueError(f"{name} must lie in [0, 0.5)")

    @classmethod
    def balanced(cls, separation: float, threshold: float, sigma_gg_ratio: float = 0.75,
                 eps_gg: float = 0.0, eps_not: float = 0.0) -> "ReadoutModel":
        """GG above not-GG, means placed so both overlap errors are equal at ``threshold``."""
        s_gg, s_not = _widths(sigma_gg_ratio)
        return cls(mu_gg=threshold + separation * s_gg / (s_gg + s_not),
                   mu_not=threshold - separation * s_not / (s_gg + s_not),
                   sigma_gg_ratio=sigma_gg_ratio, threshold=threshold,
                   eps_gg=eps_gg, eps_not=eps_not)

    @classmethod
    def tomography(cls) -> "ReadoutModel":
        """5.5 sigma separation, threshold at 5 sigma, 4 % / 3 % flips."""
        return cls.balanced(5.5, 5.0, 0.75, eps_gg=0.04, eps_not=0.03)

    @classmethod
    def m1(cls) -> "ReadoutModel":
        """In-loop record: equal-width Gaussians 2 sigma apart, GG at +1."""
        return cls(mu_gg=1.0, mu_not=-1.0, sigma_gg_ratio=1.0, threshold=-2.2)

    @property
    def separation(self) -> float:
        return abs(self.mu_gg - self.mu_not)

    @property
    def sigma_gg(self) -> float:
        return _widths(self.sigma_gg_ratio)[0]

    @property
    def sigma_not(self) -> float:
        return _widths(self.sigma_gg_ratio)[1]

    def below(self, threshold: float | None = None) -> dict[str, float]:
        """P(I_m < threshold) for each true class, flips included."""
        th = self.threshold if threshold is None else threshold
        low_gg = float(ndtr((th - self.mu_gg) / self.sigma_gg))
        low_not = float(ndtr((th - self.mu_not) / self.sigma_not))
        return {
            "gg": (1 - self.eps_gg) * low_gg + self.eps_gg * low_not,
            "not": (1 - self.eps_not) * low_not + self.eps_not * low_gg,
        }

    def assignment_fidelity(self) -> dict[str, float]:
        return assignment_fidelity(self)


def _widths(ratio: float) -> tuple[float, float]:
    return 2.0 * ratio / (1.0 + ratio), 2.0 / (1.0 + ratio)


def assignment_fidelity(model: ReadoutModel) -> dict[str, float]:
    """P(correct assignment) per basis state; ``"not"`` is shared by ge, eg, ee."""
    low = model.below()
    right_gg = 1.0 - low["gg"]
    right_not = low["not"]
    return {"gg": right_gg, "ge": right_not, "eg": right_not, "ee": right_not, "not": right_not}


def overlap_fidelity(model: ReadoutModel) -> float:
    """1 - P(not|gg) - P(GG|not) from the Gaussian overlap alone."""
    bare = ReadoutModel(model.mu_gg, model.mu_not, model.sigma_gg_ratio, model.threshold)
    right = assignment_fidelity(bare)
    return right["gg"] + right["not"] - 1.0


def sample_outcomes(rho_2q: np.ndarray, model: ReadoutModel, shots: int,
                    seed: int | np.random.Generator | None = None) -> np.ndarray:
    """Draw ``shots`` values of I_m for the state ``rho_2q``."""
    if shots < 1:
        raise ValueError("shots must be positive")
    rng = np.random.default_rng(seed)
    p = np.clip(np.real(np.diag(two_qubit(rho_2q))), 0.0, None)
    labels = rng.choice(4, size=int(shots), p=p / p.sum())
    is_gg = labels == 0
    flip = rng.random(int(shots)) < np.where(is_gg, model.eps_gg, model.eps_not)
    reads_gg = is_gg ^ flip
    z = rng.standard_normal(int(shots))
    return np.where(reads_gg, model.mu_gg + model.sigma_gg * z, model.mu_not + model.sigma_not * z)


@dataclass
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    total: int

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])


def histogram(samples, bin_width: float) -> Histogram:
    """Bins aligned to integer multiples of ``bin_width``."""
    if not bin_width > 0:
        raise ValueError("bin_width must be positive")
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        return Histogram(np.empty(0), np.empty(0, dtype=int), 0)
    lo = math.floor(x.min() / bin_width)
    hi = math.floor(x.max() / bin_width) + 1
    edges = bin_width * np.arange(lo, hi + 1)
    counts, _ = np.histogram(x, bins=edges)
    return Histogram(edges, counts, int(x.size))


def fit_gaussian(hist: Histogram, lower: float = -np.inf, upper: float = np.inf) -> tuple[float, float]:
    """Mean and standard deviation of the binned counts inside [lower, upper)."""
    c = hist.centers
    mask = (c >= lower) & (c < upper)
    w = hist.counts[mask].astype(float)
    if w.sum() == 0:
        raise ValueError("no counts in the selected window")
    mean = float(np.average(c[mask], weights=w))
    var = float(np.average((c[mask] - mean) ** 2, weights=w))
    width = hist.edges[1] - hist.edges[0]
    return mean, math.sqrt(max(var - width ** 2 / 12.0, 0.0))  # Sheppard correction


@dataclass
class Conditioned:
    rho: np.ndarray = field(repr=False)
    kept_fraction: float
    usable: bool
    keep_gg: float
    keep_not: float


def condition_on_m1(rho: np.ndarray, model: ReadoutModel, threshold: float | None = None,
                    floor: float = 1e-6) -> Conditioned:
    """Keep the runs whose M1 record falls below ``threshold`` (read not-GG).

    M1 only tells gg from the rest, so the kept state is
    (p_gg Pi_gg rho Pi_gg + p_not Pi_not rho Pi_not) / kept with
    Pi_gg = |gg><gg| (x) I_cavity and p_x the tail mass below the threshold.
    Coherence inside the not-gg block survives. A kept fraction below
    ``floor`` marks the result unusable rather than raising.
    """
    rho = np.asarray(rho, dtype=complex)
    dim = rho.shape[0]
    if rho.shape != (dim, dim) or dim % 4:
        raise ValueError(f"state of shape {rho.shape} is not on a (2 x 2 x n) space")
    n_cav = dim // 4
    keep = model.below(threshold)
    mask = np.zeros(dim, dtype=bool)
    mask[:n_cav] = True  # qubits in gg
    gg_block = np.outer(mask, mask)
    not_block = np.outer(~mask, ~mask)
    out = keep["gg"] * np.where(gg_block, rho, 0) + keep["not"] * np.where(not_block, rho, 0)
    kept = float(np.real(np.trace(out)))
    usable = kept >= floor
    if kept > 0:
        out = out / kept
    return Conditioned(out, kept, usable, keep["gg"], keep["not"])


def reweighted_fidelity(weights: dict[str, float], model: ReadoutModel,
                        threshold: float | None = None) -> float:
    """Fidelity after conditioning a Bell-diagonal mixture, in closed form."""
    keep = model.below(threshold)
    num = keep["not"] * weights["phi-"]
    den = keep["gg"] * weights["gg"] + keep["not"] * (weights["ee"] + weights["phi+"] + weights["phi-"])
    return num / den
