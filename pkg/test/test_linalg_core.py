"""
Test Dense Linear Algebra Core

Tests the qubit-scale linear algebra helpers:
1. Hermitian eigenvalues and eigenvectors
2. PSD square roots, including round-off clipping
3. Trace norm and its unitary invariance
4. Tight solver context
"""

import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from errors import NotHermitian, NotPSD
from linalg_core import (
    PAULI_Y,
    SIGMA_YY,
    TIGHT_SOLVER,
    current_solver,
    dagger,
    haar_unitary,
    herm_eigh,
    herm_eigvals,
    kron,
    mat_sqrt_psd,
    tight_solver,
    trace_norm,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def random_hermitian(rng, dim):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (g + g.conj().T) / 2


def random_psd(rng, dim, rank=None):
    g = rng.standard_normal((dim, rank or dim)) + 1j * rng.standard_normal((dim, rank or dim))
    return g @ g.conj().T


def test_herm_eigvals_examples():
    """Identity, diagonal and Pauli Y spectra"""
    assert np.allclose(herm_eigvals(np.eye(2)), [1, 1])
    assert np.allclose(herm_eigvals(np.diag([3.0, -1.0])), [3, -1])
    assert np.allclose(herm_eigvals(PAULI_Y), [1, -1])


def test_herm_eigvals_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        herm_eigvals(np.array([[1, 2], [0, 1]]))


@settings(max_examples=30, deadline=None)
@given(seed=seeds, dim=st.sampled_from([2, 4, 8, 16]))
def test_eigh_reconstructs_and_preserves_trace(seed, dim):
    rng = np.random.default_rng(seed)
    m = random_hermitian(rng, dim)
    vals, vecs = herm_eigh(m)
    assert np.all(np.diff(vals) <= 1e-12)
    assert abs(vals.sum() - np.trace(m).real) < 1e-10
    assert np.max(np.abs((vecs * vals) @ vecs.conj().T - m)) < 1e-9


def test_mat_sqrt_examples():
    assert np.allclose(mat_sqrt_psd(np.eye(4)), np.eye(4))
    assert np.allclose(mat_sqrt_psd(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))
    ghz_pair = np.diag([0.5, 0, 0, 0.5])
    assert np.allclose(mat_sqrt_psd(ghz_pair), np.diag([1, 0, 0, 1]) / np.sqrt(2))


@settings(max_examples=30, deadline=None)
@given(seed=seeds, dim=st.sampled_from([2, 4, 8]), rank=st.integers(min_value=1, max_value=8))
def test_mat_sqrt_squares_back(seed, dim, rank):
    rng = np.random.default_rng(seed)
    m = random_psd(rng, dim, min(rank, dim))
    m /= np.trace(m).real
    r = mat_sqrt_psd(m)
    assert np.max(np.abs(r - r.conj().T)) < 1e-12
    assert herm_eigvals(r)[-1] >= -1e-12
    assert np.max(np.abs(r @ r - m)) < 1e-9


def test_mat_sqrt_clips_roundoff_and_rejects_negative():
    assert np.allclose(mat_sqrt_psd(np.diag([1.0, -1e-11])), np.diag([1.0, 0.0]))
    with pytest.raises(NotPSD):
        mat_sqrt_psd(np.diag([1.0, -1e-6]))


def test_trace_norm_examples():
    assert trace_norm(np.eye(4)) == pytest.approx(4)
    assert trace_norm(np.zeros((4, 4))) == 0
    # partial transpose of the Bell projector: spectrum {1/2, 1/2, 1/2, -1/2}
    bell_pt = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]) / 2
    assert trace_norm(bell_pt) == pytest.approx(2)


@settings(max_examples=30, deadline=None)
@given(seed=seeds, dim=st.sampled_from([2, 4, 8]))
def test_trace_norm_unitary_invariance(seed, dim):
    rng = np.random.default_rng(seed)
    m = random_hermitian(rng, dim)
    u, v = haar_unitary(dim, rng), haar_unitary(dim, rng)
    assert abs(trace_norm(u @ m @ v) - trace_norm(m)) < 1e-9
    assert trace_norm(m) >= abs(np.trace(m)) - 1e-10


def test_kron_and_dagger():
    assert np.allclose(SIGMA_YY @ SIGMA_YY, np.eye(4))
    assert np.allclose(kron(np.eye(2), np.eye(2)), np.eye(4))
    m = np.arange(6).reshape(2, 3) + 1j
    assert np.allclose(dagger(dagger(m)), m)
    assert kron(np.ones((2, 3)), np.ones((3, 2))).shape == (6, 6)


def test_haar_unitary_is_unitary():
    u = haar_unitary(4, np.random.default_rng(3))
    assert np.allclose(u @ u.conj().T, np.eye(4))


def test_tight_solver_context_restores_default():
    default = current_solver()
    with tight_solver() as solver:
        assert solver == TIGHT_SOLVER
        assert current_solver().driver == "ev"
        assert np.allclose(herm_eigvals(PAULI_Y), [1, -1])
    assert current_solver() == default
