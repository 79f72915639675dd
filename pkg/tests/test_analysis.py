import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bellstab.analysis import (
    BUDGET_CONFIGURATIONS,
    PAULI_LABELS,
    ErrorBudget,
    FitError,
    PauliVector,
    basis_weights,
    bell_diagonal_state,
    budget_systems,
    concurrence,
    error_budget,
    fidelity,
    fit_exponential,
    pauli_averages,
    two_qubit,
)
from bellstab.hilbert import HilbertSpace, expectation
from bellstab.model import PHI_MINUS, PHI_PLUS, DriveParams, SystemParams, bell_projector
from helpers import random_density, random_ket, random_unitary

seeds = st.integers(0, 2**32 - 1)
MIXTURE_WEIGHTS = dict(gg=0.15, ee=0.10, phi_plus=0.08, phi_minus=0.67)


def with_vacuum(rho_2q, n_c=5):
    vac = np.zeros((n_c, n_c))
    vac[0, 0] = 1
    return np.kron(rho_2q, vac)


def test_fidelity_examples():
    assert fidelity(with_vacuum(np.outer(PHI_MINUS, PHI_MINUS.conj()))) == pytest.approx(1.0)
    gg = np.zeros((4, 4))
    gg[0, 0] = 1
    assert fidelity(with_vacuum(gg)) == 0
    assert fidelity(with_vacuum(np.eye(4) / 4)) == pytest.approx(0.25)


@given(seeds)
def test_fidelity_matches_projector_and_paulis(seed):
    rng = np.random.default_rng(seed)
    rho_q = random_density(rng, 4)
    full = with_vacuum(rho_q)
    f = fidelity(full)
    p = pauli_averages(full)
    assert abs(f - expectation(full, bell_projector(HilbertSpace(5))).real) <= 1e-12
    assert abs(f - (1 - p["XX"] - p["YY"] - p["ZZ"]) / 4) <= 1e-12


def test_pauli_singlet():
    p = pauli_averages(np.outer(PHI_MINUS, PHI_MINUS.conj()))
    for label in PAULI_LABELS:
        expected = {"II": 1, "XX": -1, "YY": -1, "ZZ": -1}.get(label, 0)
        assert p[label] == pytest.approx(expected, abs=1e-15)


def test_pauli_ground():
    gg = np.zeros((4, 4))
    gg[0, 0] = 1
    p = pauli_averages(gg)
    assert p["ZI"] == p["IZ"] == p["ZZ"] == 1
    assert p["XI"] == 0


def test_pauli_thermal():
    q = np.diag([0.93, 0.07])
    p = pauli_averages(np.kron(q, q))
    assert p["ZI"] == pytest.approx(0.86)
    assert p["IZ"] == pytest.approx(0.86)
    assert p["ZZ"] == pytest.approx(0.86 ** 2)
    assert round(p["ZZ"], 2) == 0.74


@given(seeds)
def test_pauli_round_trip(seed):
    rho = random_density(np.random.default_rng(seed), 4)
    vec = pauli_averages(rho)
    assert vec["II"] == pytest.approx(1.0)
    assert np.all(np.abs(vec.values) <= 1 + 1e-12)
    assert np.max(np.abs(vec.to_density_matrix() - rho)) <= 1e-14


def test_pauli_vector_api():
    with pytest.raises(ValueError):
        PauliVector(np.zeros(15))
    vec = PauliVector(np.arange(16.0))
    assert vec["zz"] == 15.0
    assert vec[5] == 5.0
    assert list(vec.as_dict()) == list(PAULI_LABELS)


def test_concurrence_examples():
    assert concurrence(np.outer(PHI_MINUS, PHI_MINUS.conj())) == pytest.approx(1.0, abs=1e-7)
    assert concurrence(np.eye(4) / 4) == 0
    gg = np.zeros((4, 4))
    gg[0, 0] = 1
    assert concurrence(gg) == pytest.approx(0.0, abs=1e-7)


def test_concurrence_reference_mixture():
    rho = bell_diagonal_state(**MIXTURE_WEIGHTS)
    # closed form for this family: 2 max(0, |rho_ge,eg| - sqrt(rho_gg rho_ee))
    coherence = abs(rho[1, 2])
    oracle = 2 * max(0.0, coherence - math.sqrt(rho[0, 0].real * rho[3, 3].real))
    assert coherence == pytest.approx((0.67 - 0.08) / 2)
    assert oracle == pytest.approx(0.345, abs=5e-4)
    assert concurrence(rho) == pytest.approx(oracle, abs=1e-9)


@pytest.mark.parametrize("p", [0.0, 0.2, 1 / 3, 0.5, 0.8, 1.0])
def test_concurrence_werner(p):
    rho = p * np.outer(PHI_MINUS, PHI_MINUS.conj()) + (1 - p) * np.eye(4) / 4
    assert concurrence(rho) == pytest.approx(max(0.0, (3 * p - 1) / 2), abs=1e-7)


@given(seeds)
def test_concurrence_local_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, 4, rank=2)
    u = np.kron(random_unitary(rng, 2), random_unitary(rng, 2))
    assert abs(concurrence(u @ rho @ u.conj().T) - concurrence(rho)) <= 1e-10


@given(seeds)
def test_concurrence_zero_for_products(seed):
    rng = np.random.default_rng(seed)
    ket = np.kron(random_ket(rng, 2), random_ket(rng, 2))
    assert concurrence(np.outer(ket, ket.conj())) <= 1e-7


def test_basis_weights_examples():
    w = basis_weights(np.outer(PHI_MINUS, PHI_MINUS.conj()))
    assert w == pytest.approx({"gg": 0, "ee": 0, "phi+": 0, "phi-": 1})
    ge = np.zeros(4)
    ge[1] = 1
    w = basis_weights(np.outer(ge, ge))
    assert w == pytest.approx({"gg": 0, "ee": 0, "phi+": 0.5, "phi-": 0.5})


@given(seeds)
def test_basis_weights_normalized(seed):
    w = basis_weights(random_density(np.random.default_rng(seed), 4))
    assert sum(w.values()) == pytest.approx(1.0, abs=1e-10)
    assert all(-1e-12 <= v <= 1 + 1e-12 for v in w.values())


def test_basis_weights_of_full_steady_state(full_steady):
    w = basis_weights(full_steady.rho)
    assert abs(w["phi-"] - fidelity(full_steady.rho)) <= 0.01
    assert sum(w.values()) == pytest.approx(1.0, abs=1e-10)


def test_bell_diagonal_validation():
    with pytest.raises(ValueError):
        bell_diagonal_state(0.5, 0.5, 0.5, 0.5)
    with pytest.raises(ValueError):
        bell_diagonal_state(-0.1, 0.4, 0.4, 0.3)
    rho = bell_diagonal_state(0, 0, 1, 0)
    assert np.allclose(rho, np.outer(PHI_PLUS, PHI_PLUS.conj()))


def test_two_qubit_passthrough():
    rho = np.eye(4) / 4
    assert two_qubit(rho) is rho


def test_fit_exponential_round_trip():
    t = np.linspace(0, 10, 20)
    y = 0.67 - (0.67 - 0.05) * np.exp(-t / 0.96)
    fit = fit_exponential(t, y)
    assert fit.f_inf == pytest.approx(0.67, abs=1e-6)
    assert fit.f_0 == pytest.approx(0.05, abs=1e-6)
    assert fit.tau == pytest.approx(0.96, abs=1e-6)
    assert fit.rms < 1e-8
    assert np.allclose(fit(t), y, atol=1e-8)


@given(st.floats(0.2, 5), st.floats(0.3, 0.99), st.floats(0, 0.2), seeds)
def test_fit_exponential_noisy(tau, f_inf, f_0, seed):
    rng = np.random.default_rng(seed)
    t = np.linspace(0, 8 * tau, 60)
    y = f_inf - (f_inf - f_0) * np.exp(-t / tau) + 1e-4 * rng.standard_normal(t.size)
    fit = fit_exponential(t, y)
    assert fit.tau == pytest.approx(tau, rel=0.05)
    assert fit.f_inf == pytest.approx(f_inf, abs=2e-3)


def test_fit_exponential_errors():
    t = np.linspace(0, 1, 10)
    with pytest.raises(FitError, match="constant"):
        fit_exponential(t, np.full(10, 0.5))
    with pytest.raises(FitError, match="4 points"):
        fit_exponential(t[:3], t[:3])
    with pytest.raises(FitError, match="increasing"):
        fit_exponential(t[::-1], t)
    with pytest.raises(ValueError):
        fit_exponential(t, t[:5])


def test_budget_systems():
    systems = budget_systems(SystemParams())
    assert tuple(systems) == BUDGET_CONFIGURATIONS
    ideal = systems["ideal"]
    assert ideal.chi_A == ideal.chi_B == 5.9
    assert math.isinf(ideal.T1_A) and math.isinf(ideal.Tphi_B)
    assert systems["chi mismatch"].chi_A == 6.5 and math.isinf(systems["chi mismatch"].T1_A)
    assert systems["T1 only"].T1_B == 9 and math.isinf(systems["T1 only"].Tphi_A)
    assert systems["Tphi only"].Tphi_A == pytest.approx(32 / 3) and math.isinf(systems["Tphi only"].T1_A)
    assert systems["full"] == SystemParams()


def test_error_budget_record():
    with pytest.raises(ValueError):
        ErrorBudget([("full", 0.7)])
    b = ErrorBudget([("ideal", 0.97), ("full", 0.7)])
    assert b.delta("full") == pytest.approx(0.27)
    assert b.rows()[0] == ("ideal", 0.97, 0.0)


def test_error_budget_parallel_matches_serial():
    sys = SystemParams(n_cavity=4)
    serial = error_budget(sys, DriveParams(), t_final=0.3)
    parallel = error_budget(sys, DriveParams(), t_final=0.3, workers=2)
    assert serial.entries == parallel.entries
    assert [name for name, _ in serial.entries] == list(BUDGET_CONFIGURATIONS)
