"""
Entanglement Measures

Linear entropy, pure-state concurrence, two-qubit concurrence (Wootters) and
concurrence of assistance, negativity and its convex-roof variants, plus a
brute-force ensemble search that lower-bounds the concurrence of assistance
independently of the closed form.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Union

import numpy as np

from errors import BadInput, NotTwoQubit
from linalg_core import SIGMA_YY, haar_unitary, herm_eigh, mat_sqrt_psd, singular_values, trace_norm
from qstate import (
    Bipartition,
    DensityMatrix,
    PureState,
    State,
    partial_trace,
    partial_transpose,
    schmidt_coefficients,
    schmidt_rank,
)

logger = logging.getLogger(__name__)

# --- Settings ---
ORACLE_STEP = 0.3            # initial generator scale of the hill climb
ORACLE_MIN_STEP = 1e-4
ORACLE_PATIENCE = 20         # failed proposals before the step is halved
ORACLE_MAX_ITER = 2000
ORACLE_GROWTH = 1.25         # step growth after an accepted proposal, capped at ORACLE_STEP
ORACLE_STABLE_TOL = 1e-6     # restarts this close to the best count as agreeing
RANK_TOL = 1e-12


class MeasureKind(str, Enum):
    CONCURRENCE = "concurrence"
    COA = "coa"
    NEGATIVITY = "negativity"
    CREN = "cren"
    CRENOA = "crenoa"
    LINEAR_ENTROPY = "linear_entropy"
    SCHMIDT_RANK = "schmidt_rank"


@dataclass(frozen=True)
class MeasureValue:
    """One evaluated measure with a description of what it was evaluated on"""
    kind: MeasureKind
    value: float
    context: str = ""


@dataclass(frozen=True)
class OracleResult:
    """
    Best ensemble value found by coa_bruteforce_oracle

    Attributes:
        value: Largest average concurrence over all restarts (a lower bound on COA)
        restarts: Number of restarts run
        stabilized: At least two restarts landed within ORACLE_STABLE_TOL of value
        budget_exceeded: Search ran out of restarts before stabilizing
    """
    value: float
    restarts: int
    stabilized: bool
    budget_exceeded: bool


def _pairwise_product_sum(x: np.ndarray) -> float:
    """sum_{i<j} x_i x_j without the cancellation of ((sum x)^2 - sum x^2) / 2"""
    outer = np.outer(x, x)
    return float(np.sum(np.triu(outer, k=1)))


def _require_two_qubit(rho: DensityMatrix) -> None:
    if rho.n_qubits != 2:
        raise NotTwoQubit(f"Expected a two-qubit state, got labels {rho.qubit_labels}")


def linear_entropy(rho: DensityMatrix) -> float:
    """T(rho) = 1 - Tr(rho^2)"""
    return max(0.0, 1.0 - rho.purity())


def concurrence_pure(state: PureState, cut: Bipartition) -> float:
    """C = sqrt(2 (1 - Tr rho_A^2)), computed from the Schmidt coefficients"""
    lam = schmidt_coefficients(state, cut)
    return float(2.0 * np.sqrt(max(0.0, _pairwise_product_sum(lam))))


def wootters_lambdas(rho: DensityMatrix) -> np.ndarray:
    """
    Square roots of the eigenvalues of rho (sY x sY) rho* (sY x sY), non-increasing.

    Taken as the singular values of sqrt(rho) (sY x sY) conj(sqrt(rho)), whose
    Gram matrix is the Hermitian sqrt(rho) rho~ sqrt(rho).
    """
    _require_two_qubit(rho)
    root = mat_sqrt_psd(rho.matrix)
    return singular_values(root @ SIGMA_YY @ root.conj())


def wootters_concurrence(rho: DensityMatrix) -> float:
    lam = wootters_lambdas(rho)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def coa_two_qubit(rho: DensityMatrix) -> float:
    """Concurrence of assistance, the sum of the four Wootters lambdas"""
    return float(np.sum(wootters_lambdas(rho)))


def cren_two_qubit(rho: DensityMatrix) -> float:
    return wootters_concurrence(rho)


def crenoa_two_qubit(rho: DensityMatrix) -> float:
    return coa_two_qubit(rho)


def negativity(state: State, cut: Bipartition) -> float:
    """N = ||rho^{T_A}|| - 1"""
    rho = state.density() if isinstance(state, PureState) else state
    cut.validate_for(rho.qubit_labels)
    value = trace_norm(partial_transpose(rho, cut.side_a)) - 1.0
    return max(0.0, value)


def negativity_pure_schmidt(state: PureState, cut: Bipartition) -> float:
    """N = 2 sum_{i<j} sqrt(lambda_i lambda_j)"""
    roots = np.sqrt(schmidt_coefficients(state, cut))
    return 2.0 * max(0.0, _pairwise_product_sum(roots))


def _ensemble_objective(u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """sum_i |(U W U^T)_ii| for a stack of isometries U (rows = ensemble members)"""
    return np.sum(np.abs(np.einsum("bij,jk,bik->bi", u, w, u)), axis=1)


def _hill_climb(w: np.ndarray, m: int, rngs: List[np.random.Generator], max_iter: int) -> np.ndarray:
    """
    Run one hill climb per generator, all restarts advanced together.

    Each restart only ever draws from its own generator, so its result does
    not depend on how many other restarts run beside it.
    """
    r = w.shape[0]
    unitary = np.stack([haar_unitary(m, rng) for rng in rngs])
    best = _ensemble_objective(unitary[:, :, :r], w)
    step = np.full(len(rngs), ORACLE_STEP)
    fails = np.zeros(len(rngs), dtype=int)
    active = np.ones(len(rngs), dtype=bool)
    eye = np.eye(m)

    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        g = np.stack([rngs[i].standard_normal((2, m, m)) for i in idx])
        g = g[:, 0] + 1j * g[:, 1]
        generator = 0.5 * (g - np.conj(np.swapaxes(g, 1, 2)))
        q, r_fac = np.linalg.qr(eye + step[idx, None, None] * generator)
        d = np.diagonal(r_fac, axis1=1, axis2=2)
        candidate = unitary[idx] @ (q * (d / np.abs(d))[:, None, :])
        value = _ensemble_objective(candidate[:, :, :r], w)

        improved = value > best[idx]
        up, down = idx[improved], idx[~improved]
        unitary[up] = candidate[improved]
        best[up] = value[improved]
        step[up] = np.minimum(step[up] * ORACLE_GROWTH, ORACLE_STEP)
        fails[up] = 0

        fails[down] += 1
        shrink = down[fails[down] >= ORACLE_PATIENCE]
        step[shrink] /= 2
        fails[shrink] = 0
        active[shrink] = step[shrink] >= ORACLE_MIN_STEP
    return best


def coa_bruteforce_oracle(
    rho: DensityMatrix,
    ensemble_size: int = 4,
    restarts: int = 20,
    seed: int = 0,
    max_iter: int = ORACLE_MAX_ITER,
) -> OracleResult:
    """
    Maximize the average concurrence sum_i p_i C(psi_i) over pure-state ensembles of rho.

    Ensembles of size m come from m x m unitaries acting on the purification
    ancilla: with rho = V V^dagger (V = eigenvectors scaled by sqrt of
    eigenvalues), member i is sum_j U_ij v_j and contributes |(U W U^T)_ii|
    where W = V^T (sY x sY) V. Each restart is a random-restart hill climb
    seeded by (seed, restart index), so the result never decreases as
    restarts grow.

    Args:
        rho: Two-qubit density matrix
        ensemble_size: m, between 2 and 4 and at least the rank of rho
        restarts: Number of independent hill climbs
        seed: Master seed

    Returns:
        OracleResult; value is a lower bound on the concurrence of assistance
    """
    _require_two_qubit(rho)
    if ensemble_size not in (2, 3, 4):
        raise BadInput(f"ensemble_size must be 2, 3 or 4, got {ensemble_size}")
    if restarts < 1:
        raise BadInput(f"restarts must be >= 1, got {restarts}")

    vals, vecs = herm_eigh(rho.matrix)
    rank = int(np.count_nonzero(vals > RANK_TOL))
    if ensemble_size < rank:
        raise BadInput(f"ensemble_size {ensemble_size} is below the rank {rank} of rho")
    v = vecs[:, :rank] * np.sqrt(vals[:rank])
    w = v.T @ SIGMA_YY @ v

    rngs = [np.random.default_rng([seed, i]) for i in range(restarts)]
    results = _hill_climb(w, ensemble_size, rngs, max_iter)
    best = float(results.max())
    agreeing = int(np.count_nonzero(best - results <= ORACLE_STABLE_TOL))
    stabilized = agreeing >= 2
    if not stabilized:
        logger.debug(f"Oracle did not stabilize after {restarts} restarts (best {best:.9f})")
    return OracleResult(best, restarts, stabilized, not stabilized)


def _pair_state(source: State, pair: Sequence[int]) -> DensityMatrix:
    if len(pair) != 2:
        raise BadInput(f"A pair needs exactly two labels, got {list(pair)}")
    return partial_trace(source, pair)


def _two_qubit_source(source: State, pair: Optional[Sequence[int]]) -> DensityMatrix:
    if pair is not None:
        return _pair_state(source, pair)
    if isinstance(source, DensityMatrix):
        _require_two_qubit(source)
        return source
    if source.n_qubits == 2:
        return source.density()
    raise BadInput("A qubit pair is required for this measure")


def measure(
    source: State,
    kind: Union[MeasureKind, str],
    cut: Optional[Bipartition] = None,
    pair: Optional[Sequence[int]] = None,
) -> MeasureValue:
    """
    Evaluate one measure by name.

    Concurrence with a cut on a pure state is the pure-state formula; with a
    pair (or on a two-qubit density matrix) it is the Wootters formula.
    Negativity takes a cut, or a pair to evaluate the reduced pair state.
    Linear entropy is taken on cut.side_a, on a pair, or on the whole source.
    """
    kind = MeasureKind(kind)
    context = f"pair {pair[0]},{pair[1]}" if pair is not None else (f"cut {cut}" if cut is not None else "")

    if kind is MeasureKind.CONCURRENCE and cut is not None and pair is None:
        if not isinstance(source, PureState):
            raise BadInput("Concurrence across a cut needs a pure state; use a qubit pair for mixed states")
        value = concurrence_pure(source, cut)
    elif kind in (MeasureKind.CONCURRENCE, MeasureKind.CREN):
        value = wootters_concurrence(_two_qubit_source(source, pair))
    elif kind in (MeasureKind.COA, MeasureKind.CRENOA):
        value = coa_two_qubit(_two_qubit_source(source, pair))
    elif kind is MeasureKind.NEGATIVITY:
        if pair is not None:
            rho = _pair_state(source, pair)
            value = negativity(rho, Bipartition((rho.qubit_labels[0],), (rho.qubit_labels[1],)))
        elif cut is not None:
            value = negativity(source, cut)
        else:
            raise BadInput("Negativity needs a cut or a pair")
    elif kind is MeasureKind.LINEAR_ENTROPY:
        if cut is not None:
            rho = partial_trace(source, cut.side_a)
        elif pair is not None:
            rho = _pair_state(source, pair)
        else:
            rho = source.density() if isinstance(source, PureState) else source
        value = linear_entropy(rho)
    else:
        if cut is None or not isinstance(source, PureState):
            raise BadInput("Schmidt rank needs a pure state and a cut")
        value = float(schmidt_rank(source, cut))

    logger.debug(f"{kind.value} ({context}) = {value:.12g}")
    return MeasureValue(kind, float(value), context)
