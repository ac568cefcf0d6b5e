"""
Dense Linear Algebra Core

Hermitian eigendecomposition, PSD square roots, trace norms and Kronecker
products at qubit scale (up to 2^10 x 2^10). Everything is a pure function of
its inputs; matrices are plain complex numpy arrays.
"""

import logging
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass
from typing import Iterator, Tuple

import numpy as np
import numpy.typing as npt
import scipy.linalg

from errors import BadInput, NoConvergence, NotHermitian, NotPSD

logger = logging.getLogger(__name__)

ComplexMatrix = npt.NDArray[np.complex128]

# --- Settings ---
HERMITIAN_TOL = 1e-12   # max |M - M^dagger| entrywise
PSD_CLIP_TOL = 1e-10    # eigenvalues in [-PSD_CLIP_TOL, 0] are clipped silently
PSD_FAIL_TOL = 1e-8     # below -PSD_FAIL_TOL the matrix is not PSD
MAX_QUBITS = 10

PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_YY = np.kron(PAULI_Y, PAULI_Y)


@dataclass(frozen=True)
class SolverSettings:
    """
    Eigen-solver knobs.

    Attributes:
        driver: scipy.linalg.eigh LAPACK driver ('evr', 'evd', 'ev', 'evx')
        eig_floor: eigenvalues at or below this are treated as exact zeros
                   before square roots are taken
    """
    driver: str = "evr"
    eig_floor: float = 1e-14


DEFAULT_SOLVER = SolverSettings()
TIGHT_SOLVER = SolverSettings(driver="ev", eig_floor=1e-15)

_solver: ContextVar[SolverSettings] = ContextVar("qmono_solver", default=DEFAULT_SOLVER)


def current_solver() -> SolverSettings:
    return _solver.get()


@contextmanager
def tight_solver() -> Iterator[SolverSettings]:
    """Run the enclosed block with the tightened eigen-solver settings"""
    token = _solver.set(TIGHT_SOLVER)
    try:
        yield TIGHT_SOLVER
    finally:
        _solver.reset(token)


def as_matrix(m: npt.ArrayLike) -> ComplexMatrix:
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2:
        raise BadInput(f"Expected a 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise BadInput("Matrix has non-finite entries")
    return arr


def dagger(m: npt.ArrayLike) -> ComplexMatrix:
    """Conjugate transpose"""
    return as_matrix(m).conj().T


def kron(a: npt.ArrayLike, b: npt.ArrayLike) -> ComplexMatrix:
    """Tensor product; dimensions multiply"""
    return np.kron(as_matrix(a), as_matrix(b))


def hermitian_error(m: ComplexMatrix) -> float:
    if m.shape[0] != m.shape[1]:
        return float("inf")
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def check_hermitian(m: npt.ArrayLike, tol: float = HERMITIAN_TOL) -> ComplexMatrix:
    """Return m as a symmetrized complex matrix, or raise NotHermitian"""
    arr = as_matrix(m)
    err = hermitian_error(arr)
    if err > tol:
        raise NotHermitian(f"Matrix of shape {arr.shape} is not Hermitian (max |M - M^dagger| = {err:.3e})")
    return 0.5 * (arr + arr.conj().T)


def herm_eigh(m: npt.ArrayLike) -> Tuple[np.ndarray, ComplexMatrix]:
    """
    Eigendecomposition of a Hermitian matrix.

    Returns:
        (eigenvalues in non-increasing order, matching eigenvector columns)
    """
    arr = check_hermitian(m)
    try:
        vals, vecs = scipy.linalg.eigh(arr, driver=current_solver().driver)
    except np.linalg.LinAlgError as e:
        raise NoConvergence(f"eigh failed on {arr.shape} matrix: {e}") from e
    return vals[::-1].copy(), vecs[:, ::-1].copy()


def herm_eigvals(m: npt.ArrayLike) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix in non-increasing order"""
    arr = check_hermitian(m)
    try:
        vals = scipy.linalg.eigvalsh(arr, driver=current_solver().driver)
    except np.linalg.LinAlgError as e:
        raise NoConvergence(f"eigvalsh failed on {arr.shape} matrix: {e}") from e
    return vals[::-1].copy()


def clip_psd_spectrum(vals: np.ndarray) -> np.ndarray:
    """
    Clip round-off negativity out of a PSD spectrum.

    Raises NotPSD below -PSD_FAIL_TOL. Values between -PSD_FAIL_TOL and
    -PSD_CLIP_TOL are clipped with a warning; everything at or below the
    solver's eigenvalue floor becomes an exact zero.
    """
    low = float(vals.min()) if vals.size else 0.0
    if low < -PSD_FAIL_TOL:
        raise NotPSD(f"Matrix has eigenvalue {low:.3e} < -{PSD_FAIL_TOL:g}")
    if low < -PSD_CLIP_TOL:
        logger.warning(f"Clipping eigenvalue {low:.3e} to 0 (beyond round-off level)")
    out = vals.copy()
    out[out <= current_solver().eig_floor] = 0.0
    return out


def mat_sqrt_psd(m: npt.ArrayLike) -> ComplexMatrix:
    """Principal square root of a Hermitian PSD matrix"""
    vals, vecs = herm_eigh(m)
    roots = np.sqrt(clip_psd_spectrum(vals))
    return (vecs * roots) @ vecs.conj().T


def singular_values(m: npt.ArrayLike) -> np.ndarray:
    """Singular values in non-increasing order"""
    arr = as_matrix(m)
    try:
        return scipy.linalg.svdvals(arr)
    except np.linalg.LinAlgError as e:
        raise NoConvergence(f"SVD failed on {arr.shape} matrix: {e}") from e


def trace_norm(m: npt.ArrayLike) -> float:
    """||X|| = Tr sqrt(X X^dagger), the sum of singular values"""
    arr = as_matrix(m)
    if arr.shape[0] != arr.shape[1]:
        raise BadInput(f"trace_norm needs a square matrix, got {arr.shape}")
    if arr.size == 0:
        return 0.0
    return float(np.sum(singular_values(arr)))


def haar_unitary(dim: int, rng: np.random.Generator) -> ComplexMatrix:
    """Haar-random unitary via QR of a complex Ginibre matrix with phase fix"""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * phases
