import numpy as np
import pytest
from numpy.testing import assert_allclose

from pyFunctions.errors import DimensionMismatch, InvalidDensityMatrix, NotHermitian
from pyFunctions.quantum_core import (
    commutator_action,
    devectorize,
    evolve_exact,
    hermiticity_drift,
    liouvillian_matrix,
    make_density_matrix,
    pauli,
    random_density_matrix,
    random_hermitian,
    resymmetrize,
    unitary_propagators,
    unitary_superoperator,
    vectorize,
)


def test_vectorize_is_column_stacking():
    M = np.array([[1, 2], [3, 4]], dtype=complex)
    assert_allclose(vectorize(M), [1, 3, 2, 4])
    assert_allclose(devectorize(vectorize(M)), M)


def test_devectorize_rejects_non_square_length():
    with pytest.raises(DimensionMismatch):
        devectorize(np.zeros(5))


@pytest.mark.parametrize("dim", [2, 3, 4])
def test_liouvillian_matches_commutator(rng, dim):
    H = random_hermitian(dim, rng)
    X = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    assert_allclose(liouvillian_matrix(H) @ vectorize(X), vectorize(commutator_action(H, X)), atol=1e-12)


def test_unitary_superoperator_matches_conjugation(rng):
    H = random_hermitian(3, rng)
    U = unitary_propagators(H, 0.7)
    X = random_density_matrix(3, rng)
    assert_allclose(unitary_superoperator(U) @ vectorize(X), vectorize(U @ X @ U.conj().T), atol=1e-12)


def test_commutator_acts_on_stacks(rng):
    A = random_hermitian(2, rng)
    stack = np.stack([random_density_matrix(2, rng) for _ in range(3)])
    result = commutator_action(A, stack)
    for k in range(3):
        assert_allclose(result[k], A @ stack[k] - stack[k] @ A, atol=1e-14)


def test_commutator_dimension_mismatch(rng):
    with pytest.raises(DimensionMismatch):
        commutator_action(np.eye(2), np.eye(3))


def test_evolve_exact_preserves_trace_and_hermiticity(rng):
    H = random_hermitian(4, rng)
    rho = random_density_matrix(4, rng)
    out = evolve_exact(H, rho, 1.3)
    assert abs(np.trace(out) - 1) < 1e-12
    assert hermiticity_drift(out) < 1e-12
    assert_allclose(np.linalg.eigvalsh(resymmetrize(out)).sum(), 1.0, atol=1e-12)


def test_evolve_exact_rabi_flop():
    # H = J sigma_x moves |0> to |1> with probability sin^2(J t)
    rho0 = np.diag([1.0, 0.0]).astype(complex)
    out = evolve_exact(0.5 * pauli("x"), rho0, 1.0)
    assert out[1, 1].real == pytest.approx(np.sin(0.5) ** 2, abs=1e-13)


def test_evolve_exact_at_zero_returns_copy(rng):
    rho = random_density_matrix(2, rng)
    out = evolve_exact(random_hermitian(2, rng), rho, 0.0)
    assert_allclose(out, rho)
    assert out is not rho


def test_evolve_exact_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        evolve_exact(np.array([[0, 1], [0, 0]]), np.eye(2) / 2, 1.0)


def test_batched_propagators_are_unitary(rng):
    H = np.stack([random_hermitian(2, rng) for _ in range(5)])
    U = unitary_propagators(H, 0.3)
    for k in range(5):
        assert_allclose(U[k] @ U[k].conj().T, np.eye(2), atol=1e-13)


@pytest.mark.parametrize("matrix, message", [
    ([[1, 0], [0, 1]], "trace"),
    ([[0.5, 0.5], [0.1, 0.5]], "Hermitian"),
    ([[1.5, 0], [0, -0.5]], "negative"),
])
def test_make_density_matrix_rejects(matrix, message):
    with pytest.raises(InvalidDensityMatrix, match=message):
        make_density_matrix(matrix)


def test_make_density_matrix_accepts_pure_state():
    rho = make_density_matrix([[0.5, 0.5], [0.5, 0.5]])
    assert rho.dtype == np.complex128
