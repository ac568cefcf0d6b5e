"""
Test Qubit States

Tests state construction and bookkeeping:
1. PureState / DensityMatrix validation
2. Partial trace and partial transpose by label
3. Bipartitions, block groupings and their string forms
4. Schmidt coefficients and rank
5. JSON state files
"""

import json
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from errors import BadLabels, BadNormalization, BadSize, IOFailure, NotPSD, RecipeSyntax
from measures import linear_entropy
from qstate import (
    Bipartition,
    BlockGrouping,
    DensityMatrix,
    PureState,
    load_state,
    partial_trace,
    partial_transpose,
    save_state,
    schmidt_coefficients,
    schmidt_rank,
)
from states import bell_state, example2_state, haar_random_pure, product_state, random_mixed

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_pure_state_validation():
    with pytest.raises(BadNormalization):
        PureState(1, [1, 1])
    with pytest.raises(BadSize):
        PureState(2, [1, 0])
    state = PureState.from_amplitudes([1, 1e-9], renormalize_tol=1e-8)
    assert abs(np.linalg.norm(state.amplitudes) - 1) < 1e-12


def test_big_endian_kets():
    state = PureState.from_kets({"01": 1})
    assert state.amplitudes[1] == 1
    assert example2_state().amplitude("1011") == pytest.approx(1 / np.sqrt(3))


def test_density_matrix_validation():
    with pytest.raises(BadNormalization):
        DensityMatrix((0,), np.eye(2))
    with pytest.raises(NotPSD):
        DensityMatrix((0,), np.diag([1.5, -0.5]))
    with pytest.raises(BadLabels):
        DensityMatrix((1, 0), np.eye(4) / 4)


def test_partial_trace_examples():
    assert np.allclose(partial_trace(bell_state(), [0]).matrix, np.eye(2) / 2)

    reduced = partial_trace(PureState.from_kets({"01": 1}), [1])
    assert reduced.qubit_labels == (1,)
    assert np.allclose(reduced.matrix, np.diag([0, 1]))

    ab = partial_trace(example2_state(), [0, 1])
    assert np.allclose(ab.matrix, np.diag([2 / 3, 0, 1 / 3, 0]))


def test_partial_trace_bad_labels():
    with pytest.raises(BadLabels):
        partial_trace(bell_state(), [])
    with pytest.raises(BadLabels):
        partial_trace(bell_state(), [2])


@settings(max_examples=25, deadline=None)
@given(seed=seeds, n=st.integers(min_value=2, max_value=5))
def test_nested_partial_trace(seed, n):
    state = haar_random_pure(n, seed)
    rng = np.random.default_rng(seed)
    keep = sorted(rng.choice(n, size=rng.integers(1, n + 1), replace=False).tolist())
    inner = keep[: max(1, len(keep) - 1)]
    direct = partial_trace(state, inner)
    nested = partial_trace(partial_trace(state, keep), inner)
    assert direct.qubit_labels == nested.qubit_labels == tuple(inner)
    assert np.max(np.abs(direct.matrix - nested.matrix)) < 1e-10


@settings(max_examples=25, deadline=None)
@given(seed=seeds, n=st.integers(min_value=2, max_value=6))
def test_complementary_purities_match(seed, n):
    state = haar_random_pure(n, seed)
    side = list(range(np.random.default_rng(seed).integers(1, n)))
    rest = [q for q in range(n) if q not in side]
    assert abs(partial_trace(state, side).purity() - partial_trace(state, rest).purity()) < 1e-9


@settings(max_examples=25, deadline=None)
@given(seed=seeds, n=st.integers(min_value=2, max_value=5))
def test_linear_entropy_triangle(seed, n):
    """|T(A) - T(B)| <= T(AB) <= T(A) + T(B) on two-qubit reductions"""
    rho = partial_trace(haar_random_pure(n, seed), [0, 1])
    t_ab = linear_entropy(rho)
    t_a = linear_entropy(partial_trace(rho, [0]))
    t_b = linear_entropy(partial_trace(rho, [1]))
    assert abs(t_a - t_b) <= t_ab + 1e-9
    assert t_ab <= t_a + t_b + 1e-9


def test_partial_transpose_examples():
    rho = bell_state().density()
    assert np.allclose(partial_transpose(rho, []), rho.matrix)
    assert np.allclose(np.sort(np.linalg.eigvalsh(partial_transpose(rho, [0]))), [-0.5, 0.5, 0.5, 0.5])

    product = DensityMatrix((0, 1), np.kron(np.diag([0.3, 0.7]), np.array([[0.5, 0.2], [0.2, 0.5]])))
    assert np.linalg.eigvalsh(partial_transpose(product, [0]))[0] >= -1e-9


def test_partial_transpose_is_involution():
    rho = random_mixed(3, 4, seed=11)
    pt = partial_transpose(rho, [1])
    assert np.max(np.abs(pt - pt.conj().T)) < 1e-12
    assert np.trace(pt).real == pytest.approx(1)
    n = 3
    back = pt.reshape((2,) * (2 * n)).swapaxes(1, 1 + n).reshape(8, 8)
    assert np.allclose(back, rho.matrix)

    separable = DensityMatrix((0, 1), np.kron(np.diag([0.3, 0.7]), np.array([[0.5, 0.2j], [-0.2j, 0.5]])))
    once = DensityMatrix((0, 1), partial_transpose(separable, [1]))
    assert np.allclose(partial_transpose(once, [1]), separable.matrix)


def test_schmidt_examples():
    assert np.allclose(schmidt_coefficients(bell_state(), Bipartition((0,), (1,))), [0.5, 0.5])
    assert np.allclose(schmidt_coefficients(product_state(2), Bipartition((0,), (1,))), [1, 0])
    cut = Bipartition.parse("0,1|2,3")
    assert np.allclose(schmidt_coefficients(example2_state(), cut), [2 / 3, 1 / 3, 0, 0])
    assert schmidt_rank(example2_state(), cut) == 2
    assert schmidt_rank(bell_state(), Bipartition((0,), (1,))) == 2
    assert schmidt_rank(product_state(3), Bipartition.parse("0|1,2")) == 1


@settings(max_examples=25, deadline=None)
@given(seed=seeds, n=st.integers(min_value=2, max_value=6))
def test_schmidt_matches_reduced_spectrum(seed, n):
    state = haar_random_pure(n, seed)
    cut = Bipartition.of([0], range(n))
    lam = schmidt_coefficients(state, cut)
    assert abs(lam.sum() - 1) < 1e-10
    assert np.allclose(lam[:2], partial_trace(state, [0]).eigenvalues(), atol=1e-10)


def test_bipartition_and_grouping_parsing():
    cut = Bipartition.parse("2,0|1,3")
    assert cut.side_a == (0, 2) and str(cut) == "0,2|1,3"
    with pytest.raises(BadLabels):
        Bipartition((0, 1), (1, 2))
    with pytest.raises(RecipeSyntax):
        Bipartition.parse("0,1")
    with pytest.raises(BadLabels):
        cut.validate_for(range(5))

    grouping = BlockGrouping.parse(0, "1,2|3")
    assert grouping.blocks == ((1, 2), (3,))
    assert grouping.validate_for(range(4)) is grouping
    with pytest.raises(BadLabels):
        BlockGrouping.parse(0, "0,1|2")
    with pytest.raises(BadLabels):
        BlockGrouping.parse(0, "1|2").validate_for(range(4))
    assert BlockGrouping.singletons(1, range(4)).blocks == ((0,), (2,), (3,))


def test_state_file_round_trip(tmp_path):
    state = haar_random_pure(3, 42)
    path = tmp_path / "state.json"
    save_state(state, path)
    loaded = load_state(path)
    assert np.array_equal(loaded.amplitudes, state.amplitudes)

    rho = random_mixed(2, 2, 5)
    save_state(rho, tmp_path / "rho.json")
    assert np.allclose(load_state(tmp_path / "rho.json").matrix, rho.matrix)


def test_state_file_normalization(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"n_qubits": 1, "amplitudes": [[1.0 + 4e-9, 0.0], [0.0, 0.0]]}))
    assert abs(np.linalg.norm(load_state(path).amplitudes) - 1) < 1e-12
    path.write_text(json.dumps({"n_qubits": 1, "amplitudes": [[1.001, 0.0], [0.0, 0.0]]}))
    with pytest.raises(BadNormalization):
        load_state(path)
    with pytest.raises(IOFailure):
        load_state(tmp_path / "missing.json")


@pytest.mark.parametrize("scale, accepted", [(1 + 0.9e-8, True), (1 - 0.9e-8, True), (1 + 1.1e-8, False)])
def test_state_file_norm_tolerance(tmp_path, scale, accepted):
    """The file tolerance applies to the norm, not the squared norm"""
    amps = bell_state().amplitudes * scale
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"n_qubits": 2, "amplitudes": [[a.real, a.imag] for a in amps]}))
    if accepted:
        assert abs(np.linalg.norm(load_state(path).amplitudes) - 1) < 1e-12
    else:
        with pytest.raises(BadNormalization):
            load_state(path)
