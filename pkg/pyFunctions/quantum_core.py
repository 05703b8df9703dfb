"""
Quantum core - dense complex linear algebra for states and superoperators

Units: hbar = 1, energies in rad/us, times in us. Vectorization uses column
stacking throughout, so liouvillian_matrix(H) @ vectorize(X) == vectorize([H, X]).
"""
import numpy as np
from scipy.linalg import eigh

from pyFunctions.errors import DimensionMismatch, InvalidDensityMatrix, NotHermitian

CONSTRUCTION_TOL = 1e-12
INTEGRATION_TOL = 1e-8
PSD_TOL = 1e-10


def as_matrix(M, name: str = "matrix") -> np.ndarray:
    """Coerce input to a finite square complex128 array"""
    arr = np.array(M, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise DimensionMismatch(f"{name} must be a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DimensionMismatch(f"{name} has non-finite entries")
    return arr


def _check_same_dim(A: np.ndarray, X: np.ndarray) -> None:
    if A.shape[-2:] != X.shape[-2:]:
        raise DimensionMismatch(f"dimension mismatch: {A.shape[-2:]} vs {X.shape[-2:]}")


def max_abs(M) -> float:
    return float(np.max(np.abs(M))) if np.size(M) else 0.0


def spectral_norm(M) -> float:
    return float(np.linalg.norm(np.asarray(M), 2))


def hermiticity_drift(M) -> float:
    """max |M - M^dagger|, works on stacks of matrices too"""
    M = np.asarray(M)
    return max_abs(M - np.conj(np.swapaxes(M, -1, -2)))


def is_hermitian(M, tol: float = CONSTRUCTION_TOL) -> bool:
    return hermiticity_drift(M) <= tol


def resymmetrize(M) -> np.ndarray:
    M = np.asarray(M)
    return 0.5 * (M + np.conj(np.swapaxes(M, -1, -2)))


def make_density_matrix(M, tol: float = CONSTRUCTION_TOL) -> np.ndarray:
    """Validated density matrix: Hermitian, unit trace, positive semidefinite"""
    rho = as_matrix(M, "density matrix")
    if not is_hermitian(rho, tol):
        raise InvalidDensityMatrix(f"density matrix is not Hermitian (drift {hermiticity_drift(rho):.3e})")
    trace = np.trace(rho)
    if abs(trace - 1.0) > tol:
        raise InvalidDensityMatrix(f"density matrix trace is {trace.real:.15g}, expected 1")
    min_eig = float(np.min(np.linalg.eigvalsh(resymmetrize(rho))))
    if min_eig < -PSD_TOL:
        raise InvalidDensityMatrix(f"density matrix has negative eigenvalue {min_eig:.3e}")
    return rho


def pauli(label: str) -> np.ndarray:
    table = {
        "x": [[0, 1], [1, 0]],
        "y": [[0, -1j], [1j, 0]],
        "z": [[1, 0], [0, -1]],
        "i": [[1, 0], [0, 1]],
    }
    return np.array(table[label.lower()], dtype=np.complex128)


def projector(index: int, dim: int) -> np.ndarray:
    P = np.zeros((dim, dim), dtype=np.complex128)
    P[index, index] = 1.0
    return P


# =============================================================================
# SUPEROPERATOR ACTIONS
# =============================================================================

def commutator_action(A, X) -> np.ndarray:
    """[A, X]; X may be a stack of matrices (..., d, d)"""
    A = np.asarray(A)
    X = np.asarray(X)
    _check_same_dim(A, X)
    return A @ X - X @ A


def vectorize(M) -> np.ndarray:
    return np.asarray(M).reshape(-1, order='F')


def devectorize(v, dim: int = None) -> np.ndarray:
    v = np.asarray(v)
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    if dim * dim != v.size:
        raise DimensionMismatch(f"vector of length {v.size} is not a vectorized square matrix")
    return v.reshape((dim, dim), order='F')


def liouvillian_matrix(H) -> np.ndarray:
    """1 (x) H - H^T (x) 1 under column stacking"""
    H = as_matrix(H, "H")
    eye = np.eye(H.shape[0], dtype=np.complex128)
    return np.kron(eye, H) - np.kron(H.T, eye)


def unitary_superoperator(U) -> np.ndarray:
    """conj(U) (x) U, so that vec(U X U^dagger) = (U* (x) U) vec(X)"""
    U = np.asarray(U)
    return np.kron(np.conj(U), U)


# =============================================================================
# EXACT EVOLUTION
# =============================================================================

def unitary_propagators(H_batch, t: float) -> np.ndarray:
    """e^{-iHt} for a stack of Hermitian matrices (..., d, d) via eigendecomposition"""
    energies, vectors = np.linalg.eigh(H_batch)
    phases = np.exp(-1j * energies * t)
    return (vectors * phases[..., None, :]) @ np.conj(np.swapaxes(vectors, -1, -2))


def evolve_exact(H, rho0, t: float) -> np.ndarray:
    """e^{-iHt} rho0 e^{+iHt}"""
    H = as_matrix(H, "H")
    rho0 = as_matrix(rho0, "rho0")
    _check_same_dim(H, rho0)
    if not is_hermitian(H):
        raise NotHermitian(f"Hamiltonian is not Hermitian (drift {hermiticity_drift(H):.3e})")
    if t == 0:
        return rho0.copy()
    energies, vectors = eigh(resymmetrize(H))
    U = (vectors * np.exp(-1j * energies * t)) @ np.conj(vectors.T)
    return U @ rho0 @ np.conj(U.T)


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * resymmetrize(A)


def random_density_matrix(dim: int, rng: np.random.Generator) -> np.ndarray:
    A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = A @ np.conj(A.T)
    rho = resymmetrize(rho / np.trace(rho).real)
    return rho
