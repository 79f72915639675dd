import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bellstab.hilbert import (
    IDENTITY,
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    HilbertSpace,
    annihilation,
    embed,
    expectation,
    is_hermitian,
    kron,
    number,
    partial_trace_cavity,
)
from helpers import random_density, random_hermitian

seeds = st.integers(0, 2**32 - 1)


def test_pauli_conventions():
    g, e = np.array([1, 0]), np.array([0, 1])
    assert np.allclose(SIGMA_Z @ g, g)
    assert np.allclose(SIGMA_Z @ e, -e)
    assert np.allclose(SIGMA_PLUS @ g, e)
    assert np.allclose(SIGMA_MINUS @ e, g)
    assert np.allclose(SIGMA_X @ SIGMA_Y, 1j * SIGMA_Z)


def test_constants_are_read_only():
    with pytest.raises(ValueError):
        SIGMA_X[0, 0] = 5


def test_kron_identity():
    assert np.array_equal(kron(np.eye(2), np.eye(3)), np.eye(6))


def test_kron_sigma_z_on_eg():
    op = kron(SIGMA_Z, IDENTITY)
    ket = np.zeros(4)
    ket[2] = 1.0  # |e>|g>
    assert np.allclose(op @ ket, -ket)


def test_kron_xx_involution():
    xx = kron(SIGMA_X, SIGMA_X)
    assert np.array_equal(xx @ xx, np.eye(4))


def test_kron_requires_operands():
    with pytest.raises(ValueError):
        kron()


def test_annihilation_two_levels():
    assert np.array_equal(annihilation(2), [[0, 1], [0, 0]])


def test_annihilation_sqrt_rule():
    assert annihilation(4)[2, 3] == pytest.approx(np.sqrt(3))


def test_number_operator():
    a = annihilation(7)
    assert np.allclose(a.conj().T @ a, number(7))
    assert np.array_equal(np.diag(number(7)).real, np.arange(7))


def test_commutator_boundary_defect():
    a = annihilation(10)
    comm = a @ a.conj().T - a.conj().T @ a
    expected = np.eye(10)
    expected[9, 9] = -9.0  # truncation leaves -(N-1) in the last level
    assert np.allclose(comm, expected, atol=1e-13)


@pytest.mark.parametrize("n", [0, 1, -3])
def test_annihilation_rejects_small(n):
    with pytest.raises(ValueError):
        annihilation(n)


def test_space_layout():
    space = HilbertSpace(15)
    assert space.dim == 60
    assert space.index(1, 0, 2) == (2 * 1 + 0) * 15 + 2
    assert space.index(1, 1, 14) == 59
    with pytest.raises(ValueError):
        HilbertSpace(1)


def test_embed_sigma_z_block_structure():
    space = HilbertSpace(3)
    op = embed(SIGMA_Z, "A", space)
    assert np.array_equal(np.diag(op).real, [1] * 6 + [-1] * 6)
    assert np.count_nonzero(op - np.diag(np.diag(op))) == 0


def test_embed_identity():
    space = HilbertSpace(5)
    assert np.array_equal(embed(IDENTITY, "B", space), np.eye(20))


def test_embed_number_spectrum():
    n_c = 6
    space = HilbertSpace(n_c)
    w = np.linalg.eigvalsh(embed(number(n_c), "cavity", space))
    assert np.allclose(np.sort(w), np.repeat(np.arange(n_c), 4))


def test_embed_errors():
    space = HilbertSpace(4)
    with pytest.raises(ValueError):
        embed(SIGMA_X, "C", space)
    with pytest.raises(ValueError):
        embed(np.eye(3), "A", space)
    with pytest.raises(ValueError):
        embed(SIGMA_X, "cavity", space)


def test_expectation_examples():
    space = HilbertSpace(5)
    rho = np.zeros((20, 20), dtype=complex)
    rho[space.index(0, 0, 0), space.index(0, 0, 0)] = 1
    assert expectation(rho, embed(SIGMA_Z, "A", space)) == pytest.approx(1.0)
    mixed = np.eye(20) / 20
    assert abs(expectation(mixed, embed(SIGMA_X, "B", space))) < 1e-15
    fock2 = np.zeros((20, 20), dtype=complex)
    fock2[space.index(0, 0, 2), space.index(0, 0, 2)] = 1
    assert expectation(fock2, embed(number(5), "cavity", space)) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        expectation(np.eye(4), np.eye(5))


def test_partial_trace_examples():
    space = HilbertSpace(4)
    phi = np.array([0, 1, -1, 0]) / np.sqrt(2)
    rho_q = np.outer(phi, phi)
    vac = np.zeros((4, 4))
    vac[0, 0] = 1
    assert np.allclose(partial_trace_cavity(np.kron(rho_q, vac)), rho_q, atol=1e-15)
    assert np.allclose(partial_trace_cavity(np.eye(16) / 16), np.eye(4) / 4)
    # (|gg,0> + |ee,1>)/sqrt2: the cavity carries the which-path information
    ket = np.zeros(16)
    ket[space.index(0, 0, 0)] = ket[space.index(1, 1, 1)] = 1 / np.sqrt(2)
    reduced = partial_trace_cavity(np.outer(ket, ket))
    assert np.allclose(reduced, np.diag([0.5, 0, 0, 0.5]), atol=1e-15)


def test_partial_trace_bad_shape():
    with pytest.raises(ValueError):
        partial_trace_cavity(np.eye(10))


@given(seeds)
def test_kron_associative(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3)) for _ in range(3))
    assert np.max(np.abs(kron(kron(a, b), c) - kron(a, kron(b, c)))) <= 1e-13


@given(seeds)
def test_kron_mixed_product(seed):
    rng = np.random.default_rng(seed)
    a, b, c, d = (rng.standard_normal((3, 3)) for _ in range(4))
    assert np.allclose(kron(a, b) @ kron(c, d), kron(a @ c, b @ d), atol=1e-12)


@given(seeds, st.integers(2, 6))
def test_disjoint_embeddings_commute(seed, n_c):
    rng = np.random.default_rng(seed)
    space = HilbertSpace(n_c)
    x = embed(random_hermitian(rng, 2), "A", space)
    y = embed(random_hermitian(rng, 2), "B", space)
    z = embed(random_hermitian(rng, n_c), "cavity", space)
    assert np.max(np.abs(x @ y - y @ x)) <= 1e-13
    assert np.max(np.abs(x @ z - z @ x)) <= 1e-13


@given(seeds, st.integers(2, 8))
def test_partial_trace_of_product(seed, n_c):
    rng = np.random.default_rng(seed)
    rho_q = random_density(rng, 4)
    rho_c = random_density(rng, n_c)
    full = np.kron(rho_q, rho_c)
    reduced = partial_trace_cavity(full)
    assert np.max(np.abs(reduced - rho_q)) <= 1e-12
    assert abs(np.trace(reduced) - np.trace(full)) <= 1e-12
    assert is_hermitian(reduced)
