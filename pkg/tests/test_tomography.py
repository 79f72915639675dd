import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bellstab.analysis import PAULI_BASIS, PAULI_LABELS, pauli_averages
from bellstab.model import PHI_MINUS
from bellstab.readout import ReadoutModel
from bellstab.tomography import (
    CARDINAL_STATES,
    P_GG,
    ROTATIONS,
    build_design_matrix,
    clifford_states,
    clifford_suite,
    default_design,
    reconstruct,
    rx,
    simulate_tomography,
)
from helpers import random_density

seeds = st.integers(0, 2**32 - 1)


def pauli_row(terms):
    row = np.zeros(16)
    for label, coeff in terms.items():
        row[PAULI_LABELS.index(label)] = coeff / 4
    return row


def test_rotations_unitary():
    for u in ROTATIONS.values():
        assert np.max(np.abs(u.conj().T @ u - np.eye(2))) <= 1e-12
    assert np.allclose(rx(np.pi) @ rx(np.pi), -np.eye(2))


def test_design_rows():
    d = default_design()
    assert np.allclose(d.row("Id", "Id"), pauli_row({"II": 1, "ZI": 1, "IZ": 1, "ZZ": 1}))
    assert np.allclose(d.row("Rx(pi)", "Id"), pauli_row({"II": 1, "ZI": -1, "IZ": 1, "ZZ": -1}))


def test_design_matches_direct_traces():
    # independent construction: Tr[P_gg U sigma U^dag] / 4 for each setting and Pauli
    d = default_design()
    for (a, b), row in zip(itertools.product(ROTATIONS, repeat=2), d.matrix):
        u = np.kron(ROTATIONS[a], ROTATIONS[b])
        direct = [np.trace(P_GG @ u @ p @ u.conj().T).real / 4 for p in PAULI_BASIS]
        assert np.allclose(row, direct, atol=1e-14)


def test_design_condition_number():
    assert default_design().condition_number == pytest.approx(10.404, abs=1e-3)
    assert default_design().condition_number <= 20


def test_singular_rotation_set():
    with pytest.raises(np.linalg.LinAlgError):
        build_design_matrix({"Id": np.eye(2), "Rx(pi)": rx(np.pi)})


def test_exact_outcomes_examples():
    d = default_design()
    gg = np.zeros((4, 4))
    gg[0, 0] = 1
    assert simulate_tomography(gg)[d.settings.index(("Id", "Id"))] == pytest.approx(1.0)
    singlet = np.outer(PHI_MINUS, PHI_MINUS.conj())
    y = simulate_tomography(singlet)
    assert y[d.settings.index(("Id", "Id"))] == pytest.approx(0.0, abs=1e-15)
    # the singlet is invariant under identical rotations on both qubits
    assert y[d.settings.index(("Rx(pi/2)", "Rx(pi/2)"))] == pytest.approx(0.0, abs=1e-15)
    assert y[d.settings.index(("Id", "Rx(pi/2)"))] == pytest.approx(0.25)


@given(seeds)
def test_exact_outcomes_match_amplitudes(seed):
    rho = random_density(np.random.default_rng(seed), 4)
    d = default_design()
    direct = [np.real((d.unitaries[i] @ rho @ d.unitaries[i].conj().T)[0, 0]) for i in range(16)]
    assert np.allclose(simulate_tomography(rho), direct, atol=1e-14)


@given(seeds)
def test_round_trip_exact(seed):
    rho = random_density(np.random.default_rng(seed), 4)
    recon = reconstruct(simulate_tomography(rho))
    assert np.max(np.abs(recon.values - pauli_averages(rho).values)) <= 1e-10
    assert recon["II"] == 1.0


def test_reconstruct_examples():
    gg = np.zeros((4, 4))
    gg[0, 0] = 1
    p = reconstruct(simulate_tomography(gg))
    expected = pauli_row({"II": 1, "ZI": 1, "IZ": 1, "ZZ": 1}) * 4
    assert np.allclose(p.values, expected, atol=1e-12)
    s = reconstruct(simulate_tomography(np.outer(PHI_MINUS, PHI_MINUS.conj())))
    assert s["XX"] == pytest.approx(-1) and s["YY"] == pytest.approx(-1) and s["ZZ"] == pytest.approx(-1)


def test_reconstruct_full_space_state(full_steady):
    recon = reconstruct(simulate_tomography(full_steady.rho))
    assert np.allclose(recon.values, pauli_averages(full_steady.rho).values, atol=1e-10)


def test_reconstruct_shape_check():
    with pytest.raises(ValueError):
        reconstruct(np.zeros(15))


@given(seeds)
def test_ii_pinned_under_noise(seed):
    rng = np.random.default_rng(seed)
    noisy = rng.random(16)
    assert reconstruct(noisy)["II"] == 1.0


def test_shot_noise_rate():
    rho = random_density(np.random.default_rng(11), 4)
    exact = pauli_averages(rho).values
    err = {}
    for shots in (1_000, 100_000):
        rng = np.random.default_rng(5)
        runs = [reconstruct(simulate_tomography(rho, shots=shots, rng=rng)).values for _ in range(20)]
        err[shots] = np.sqrt(np.mean((np.array(runs) - exact) ** 2))
    # Monte Carlo rate: 100x the shots, 10x smaller error
    assert 5 < err[1_000] / err[100_000] < 20


def test_shot_mode_seeded():
    rho = random_density(np.random.default_rng(2), 4)
    a = simulate_tomography(rho, shots=1000, rng=42)
    b = simulate_tomography(rho, shots=1000, rng=42)
    assert np.array_equal(a, b)
    assert np.all((a >= 0) & (a <= 1))
    with pytest.raises(ValueError):
        simulate_tomography(rho, shots=0)


def test_readout_errors_mix_outcomes():
    r = ReadoutModel.tomography()
    rho = random_density(np.random.default_rng(3), 4)
    right = r.assignment_fidelity()
    y = simulate_tomography(rho)
    y_err = simulate_tomography(rho, readout=r)
    assert np.allclose(y_err, right["gg"] * y + (1 - right["not"]) * (1 - y))


def test_clifford_states():
    states = clifford_states()
    assert len(states) == 36
    assert "+Z,-X" in states
    assert np.allclose(CARDINAL_STATES["+Z"], [1, 0])
    for ket in states.values():
        assert np.linalg.norm(ket) == pytest.approx(1.0)


def test_clifford_suite_ideal():
    fids = clifford_suite()
    assert len(fids) == 36
    assert all(abs(f - 1) <= 1e-10 for f in fids.values())


def test_clifford_suite_with_assignment_errors():
    fids = np.array(list(clifford_suite(ReadoutModel.tomography()).values()))
    assert fids.mean() == pytest.approx(0.94334, abs=1e-5)
    assert 0.9 < fids.min() and fids.max() < 0.96
    sampled = clifford_suite(ReadoutModel.tomography(), shots=500_000, seed=3)
    assert np.array(list(sampled.values())).mean() == pytest.approx(fids.mean(), abs=2e-3)
    assert clifford_suite(ReadoutModel.tomography(), shots=1000, seed=9) == \
        clifford_suite(ReadoutModel.tomography(), shots=1000, seed=9)
