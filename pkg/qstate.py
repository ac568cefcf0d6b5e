"""
Qubit States

Pure states and density matrices over labelled qubits, partial trace and
partial transpose by label, bipartitions, block groupings and Schmidt
decompositions.

Ket convention is big-endian: qubit 0 is the leftmost symbol of a ket string
and the most significant bit of the amplitude index, so |1011> is index 11.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ValidationError, model_validator

from errors import BadInput, BadLabels, BadNormalization, BadSize, IOFailure, NotPSD, RecipeSyntax
from linalg_core import MAX_QUBITS, ComplexMatrix, check_hermitian, herm_eigvals, singular_values

logger = logging.getLogger(__name__)

# --- Settings ---
NORM_TOL = 1e-10            # |<psi|psi> - 1| accepted without complaint
FILE_RENORM_TOL = 1e-8      # | ||psi|| - 1 | of state files: renormalized within, rejected beyond
TRACE_TOL = 1e-10
PSD_TOL = 1e-9              # construction-time floor on density-matrix eigenvalues
SCHMIDT_RANK_TOL = 1e-10

Labels = Tuple[int, ...]


def _labels(values: Iterable[int]) -> Labels:
    out = tuple(sorted(int(v) for v in values))
    if len(set(out)) != len(out):
        raise BadLabels(f"Repeated qubit labels in {list(values)}")
    return out


def _check_qubit_count(n_qubits: int) -> None:
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise BadSize(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")


@dataclass(frozen=True, eq=False)
class PureState:
    """
    Normalized state vector over qubits 0..n_qubits-1

    Attributes:
        n_qubits: Number of qubits
        amplitudes: Complex vector of length 2**n_qubits, big-endian indexing
    """
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        _check_qubit_count(self.n_qubits)
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape[0] != 2 ** self.n_qubits:
            raise BadSize(f"{self.n_qubits} qubits need {2 ** self.n_qubits} amplitudes, got {amps.shape[0]}")
        if not np.all(np.isfinite(amps)):
            raise BadInput("Amplitudes contain NaN or Inf")
        norm_sq = float(np.vdot(amps, amps).real)
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise BadNormalization(f"Squared norm is {norm_sq:.12g}, expected 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes: Sequence[complex], renormalize_tol: float = 0.0) -> "PureState":
        """
        Build a state from raw amplitudes, renormalizing small norm deviations.

        Args:
            amplitudes: Length-2^n vector
            renormalize_tol: Largest |norm^2 - 1| that is silently fixed
        """
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        size = amps.shape[0]
        n_qubits = size.bit_length() - 1
        if size < 2 or 2 ** n_qubits != size:
            raise BadSize(f"Amplitude count {size} is not a power of two >= 2")
        norm_sq = float(np.vdot(amps, amps).real)
        deviation = abs(norm_sq - 1.0)
        if NORM_TOL < deviation <= renormalize_tol:
            logger.warning(f"Renormalizing state (squared norm {norm_sq:.12g})")
            amps = amps / np.sqrt(norm_sq)
        return cls(n_qubits, amps)

    @classmethod
    def from_kets(cls, terms: Dict[str, complex], normalize: bool = True) -> "PureState":
        """Build from {"0101": amplitude, ...}; all ket strings must share one length"""
        if not terms:
            raise BadInput("No ket terms given")
        lengths = {len(k) for k in terms}
        if len(lengths) != 1:
            raise BadInput(f"Ket strings of mixed length: {sorted(terms)}")
        n_qubits = lengths.pop()
        _check_qubit_count(n_qubits)
        amps = np.zeros(2 ** n_qubits, dtype=complex)
        for ket, amp in terms.items():
            if set(ket) - {"0", "1"}:
                raise BadInput(f"Bad ket string '{ket}'")
            amps[int(ket, 2)] += amp
        if normalize:
            norm = np.linalg.norm(amps)
            if norm == 0:
                raise BadNormalization("All amplitudes are zero")
            amps = amps / norm
        return cls(n_qubits, amps)

    @property
    def labels(self) -> Labels:
        return tuple(range(self.n_qubits))

    @property
    def dim(self) -> int:
        return 2 ** self.n_qubits

    def tensor(self) -> np.ndarray:
        """Amplitudes as an n-axis (2, 2, ..., 2) array, axis q = qubit q"""
        return self.amplitudes.reshape((2,) * self.n_qubits)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.labels, np.outer(self.amplitudes, self.amplitudes.conj()))

    def amplitude(self, ket: str) -> complex:
        return complex(self.amplitudes[int(ket, 2)])


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """
    Hermitian, PSD, unit-trace matrix over a subset of original qubit labels

    Attributes:
        qubit_labels: Original qubit indices in ascending order
        matrix: 2^k x 2^k complex matrix, big-endian over qubit_labels
    """
    qubit_labels: Labels
    matrix: ComplexMatrix

    def __post_init__(self):
        labels = _labels(self.qubit_labels)
        if labels != tuple(int(l) for l in self.qubit_labels):
            raise BadLabels(f"qubit_labels must be ascending, got {self.qubit_labels}")
        if not labels:
            raise BadLabels("DensityMatrix needs at least one qubit label")
        _check_qubit_count(len(labels))
        dim = 2 ** len(labels)
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.shape != (dim, dim):
            raise BadSize(f"Labels {labels} need a {dim}x{dim} matrix, got {mat.shape}")
        mat = check_hermitian(mat)
        trace = float(np.trace(mat).real)
        if abs(trace - 1.0) > TRACE_TOL:
            raise BadNormalization(f"Density matrix trace is {trace:.12g}, expected 1")
        low = float(herm_eigvals(mat)[-1])
        if low < -PSD_TOL:
            raise NotPSD(f"Density matrix has eigenvalue {low:.3e}")
        mat.setflags(write=False)
        object.__setattr__(self, "qubit_labels", labels)
        object.__setattr__(self, "matrix", mat)

    @property
    def n_qubits(self) -> int:
        return len(self.qubit_labels)

    @property
    def dim(self) -> int:
        return 2 ** self.n_qubits

    @property
    def labels(self) -> Labels:
        return self.qubit_labels

    def purity(self) -> float:
        """Tr(rho^2)"""
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def eigenvalues(self) -> np.ndarray:
        return herm_eigvals(self.matrix)

    def positions(self, labels: Iterable[int]) -> List[int]:
        """Axis positions of the given original labels"""
        index = {lab: pos for pos, lab in enumerate(self.qubit_labels)}
        try:
            return [index[int(lab)] for lab in labels]
        except KeyError as e:
            raise BadLabels(f"Label {e.args[0]} not in {self.qubit_labels}") from None


State = Union[PureState, DensityMatrix]


@dataclass(frozen=True)
class Bipartition:
    """Split of a state's qubit labels into two disjoint non-empty sides"""
    side_a: Labels
    side_b: Labels

    def __post_init__(self):
        side_a, side_b = _labels(self.side_a), _labels(self.side_b)
        if not side_a or not side_b:
            raise BadLabels("Both sides of a bipartition must be non-empty")
        if set(side_a) & set(side_b):
            raise BadLabels(f"Sides overlap: {side_a} | {side_b}")
        object.__setattr__(self, "side_a", side_a)
        object.__setattr__(self, "side_b", side_b)

    @classmethod
    def of(cls, side_a: Iterable[int], labels: Iterable[int]) -> "Bipartition":
        """side_a against the rest of labels"""
        side_a = _labels(side_a)
        labels = _labels(labels)
        if not set(side_a) <= set(labels):
            raise BadLabels(f"{side_a} is not a subset of {labels}")
        return cls(side_a, tuple(l for l in labels if l not in side_a))

    @classmethod
    def parse(cls, spec: str) -> "Bipartition":
        """Parse '0,1|2,3'"""
        parts = spec.split("|")
        if len(parts) != 2:
            raise RecipeSyntax(f"Cut '{spec}' must have exactly one '|'")
        return cls(_parse_label_list(parts[0], spec), _parse_label_list(parts[1], spec))

    @property
    def labels(self) -> Labels:
        return _labels(self.side_a + self.side_b)

    def validate_for(self, labels: Iterable[int]) -> "Bipartition":
        if self.labels != _labels(labels):
            raise BadLabels(f"Cut {self} does not cover labels {tuple(labels)}")
        return self

    def __str__(self) -> str:
        return f"{','.join(map(str, self.side_a))}|{','.join(map(str, self.side_b))}"


@dataclass(frozen=True)
class BlockGrouping:
    """
    Focus qubit plus ordered disjoint blocks M_1..M_k of the remaining qubits
    """
    focus: int
    blocks: Tuple[Labels, ...]

    def __post_init__(self):
        blocks = tuple(_labels(b) for b in self.blocks)
        if not blocks:
            raise BadLabels("A block grouping needs at least one block")
        if any(not b for b in blocks):
            raise BadLabels("Blocks must be non-empty")
        flat = [l for b in blocks for l in b]
        if len(set(flat)) != len(flat):
            raise BadLabels(f"Blocks overlap: {blocks}")
        if int(self.focus) in flat:
            raise BadLabels(f"Focus qubit {self.focus} appears inside a block")
        object.__setattr__(self, "focus", int(self.focus))
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def singletons(cls, focus: int, labels: Iterable[int]) -> "BlockGrouping":
        """One block per non-focus qubit"""
        return cls(focus, tuple((l,) for l in _labels(labels) if l != focus))

    @classmethod
    def parse(cls, focus: int, spec: str) -> "BlockGrouping":
        """Parse '1,2|3' into blocks {1,2}, {3}"""
        return cls(focus, tuple(_parse_label_list(part, spec) for part in spec.split("|")))

    @property
    def k(self) -> int:
        return len(self.blocks)

    def members(self) -> Labels:
        return _labels(l for b in self.blocks for l in b)

    def validate_for(self, labels: Iterable[int]) -> "BlockGrouping":
        labels = _labels(labels)
        if self.focus not in labels:
            raise BadLabels(f"Focus {self.focus} not in {labels}")
        expected = tuple(l for l in labels if l != self.focus)
        if self.members() != expected:
            raise BadLabels(f"Blocks {self.blocks} do not cover {expected}")
        return self


def _parse_label_list(text: str, context: str) -> Labels:
    try:
        values = [int(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise RecipeSyntax(f"Bad qubit label list '{text}' in '{context}'") from None
    if not values:
        raise RecipeSyntax(f"Empty label group in '{context}'")
    if any(v < 0 for v in values):
        raise RecipeSyntax(f"Negative qubit label in '{context}'")
    return _labels(values)


def parse_labels(text: str) -> Labels:
    """Parse '0,2' into (0, 2)"""
    return _parse_label_list(text, text)


def _keep_positions(state_labels: Labels, keep: Iterable[int]) -> Tuple[Labels, List[int]]:
    keep = _labels(keep)
    if not keep:
        raise BadLabels("partial_trace needs a non-empty set of labels to keep")
    missing = set(keep) - set(state_labels)
    if missing:
        raise BadLabels(f"Labels {sorted(missing)} not in {state_labels}")
    index = {lab: pos for pos, lab in enumerate(state_labels)}
    return keep, [index[l] for l in keep]


def partial_trace(state: State, keep: Iterable[int]) -> DensityMatrix:
    """
    Reduced state on the kept labels.

    Args:
        state: PureState or DensityMatrix
        keep: Original qubit labels to keep

    Returns:
        DensityMatrix with qubit_labels = keep in ascending order
    """
    keep, pos = _keep_positions(state.labels, keep)
    n = len(state.labels)
    drop = [p for p in range(n) if p not in pos]
    dk, dd = 2 ** len(pos), 2 ** len(drop)

    if isinstance(state, PureState):
        m = np.transpose(state.tensor(), pos + drop).reshape(dk, dd)
        rho = m @ m.conj().T
    else:
        t = state.matrix.reshape((2,) * (2 * n))
        axes = pos + drop + [p + n for p in pos] + [p + n for p in drop]
        rho = np.einsum("ijkj->ik", np.transpose(t, axes).reshape(dk, dd, dk, dd))
    return DensityMatrix(keep, rho)


def partial_transpose(rho: DensityMatrix, side: Iterable[int]) -> ComplexMatrix:
    """Transpose the tensor factors of the given labels"""
    side = _labels(side)
    pos = rho.positions(side)
    n = rho.n_qubits
    axes = list(range(2 * n))
    for p in pos:
        axes[p], axes[p + n] = axes[p + n], axes[p]
    t = rho.matrix.reshape((2,) * (2 * n))
    return np.transpose(t, axes).reshape(rho.dim, rho.dim)


def _cut_matrix(state: PureState, cut: Bipartition) -> np.ndarray:
    cut.validate_for(state.labels)
    axes = list(cut.side_a) + list(cut.side_b)
    return np.transpose(state.tensor(), axes).reshape(2 ** len(cut.side_a), 2 ** len(cut.side_b))


def schmidt_coefficients(state: PureState, cut: Bipartition) -> np.ndarray:
    """
    Schmidt coefficients lambda_i of |psi> = sum sqrt(lambda_i) |i>|i>

    Returns:
        Non-increasing array of min(d_a, d_b) values summing to 1
    """
    lam = singular_values(_cut_matrix(state, cut)) ** 2
    return lam / lam.sum()


def schmidt_rank(state: PureState, cut: Bipartition, tol: float = SCHMIDT_RANK_TOL) -> int:
    return int(np.count_nonzero(schmidt_coefficients(state, cut) > tol))


def apply_local_unitary(state: PureState, qubit: int, u: ComplexMatrix) -> PureState:
    """Apply a 2x2 unitary to one qubit"""
    if qubit not in state.labels:
        raise BadLabels(f"Qubit {qubit} not in {state.labels}")
    t = np.tensordot(np.asarray(u, dtype=complex), state.tensor(), axes=([1], [qubit]))
    t = np.moveaxis(t, 0, qubit)
    return PureState.from_amplitudes(t.reshape(-1), renormalize_tol=1e-9)


def product_of(*states: PureState) -> PureState:
    """Tensor product, labels concatenated left to right"""
    amps = states[0].amplitudes
    for s in states[1:]:
        amps = np.kron(amps, s.amplitudes)
    return PureState.from_amplitudes(amps, renormalize_tol=1e-9)


# --- State files ---

class StateFile(BaseModel):
    """JSON layout of a saved state: exactly one of amplitudes / matrix"""
    n_qubits: int
    amplitudes: Optional[List[Tuple[float, float]]] = None
    matrix: Optional[List[List[Tuple[float, float]]]] = None
    qubit_labels: Optional[List[int]] = None

    @model_validator(mode="after")
    def _one_payload(self):
        if (self.amplitudes is None) == (self.matrix is None):
            raise ValueError("exactly one of 'amplitudes' or 'matrix' is required")
        return self


def load_state(path: Union[str, Path]) -> State:
    """
    Load a PureState or DensityMatrix from a JSON state file.

    Pure-state norm deviations up to 1e-8 are renormalized; larger ones raise
    BadNormalization.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise IOFailure(f"Cannot read state file {path}: {e}") from e
    try:
        doc = StateFile.model_validate_json(text)
    except ValidationError as e:
        raise BadInput(f"Malformed state file {path}: {e.errors()[0]['msg']}") from None

    if doc.amplitudes is not None:
        amps = np.array([complex(re, im) for re, im in doc.amplitudes])
        if amps.shape[0] != 2 ** doc.n_qubits:
            raise BadSize(f"{path}: n_qubits={doc.n_qubits} but {amps.shape[0]} amplitudes")
        norm_sq = float(np.vdot(amps, amps).real)
        if abs(np.sqrt(norm_sq) - 1.0) > FILE_RENORM_TOL:
            raise BadNormalization(f"{path}: norm {np.sqrt(norm_sq):.12g} deviates from 1 by more than {FILE_RENORM_TOL:g}")
        state = PureState.from_amplitudes(amps, renormalize_tol=abs(norm_sq - 1.0))
    else:
        mat = np.array([[complex(re, im) for re, im in row] for row in doc.matrix])
        labels = doc.qubit_labels if doc.qubit_labels is not None else list(range(doc.n_qubits))
        if len(labels) != doc.n_qubits:
            raise BadLabels(f"{path}: {len(labels)} labels for {doc.n_qubits} qubits")
        state = DensityMatrix(tuple(labels), mat)
    logger.debug(f"Loaded {type(state).__name__} on {len(state.labels)} qubits from {path}")
    return state


def state_to_json(state: State) -> str:
    """Serialize with shortest round-trip float repr (at most 17 significant digits)"""
    if isinstance(state, PureState):
        doc = {"n_qubits": state.n_qubits,
               "amplitudes": [[float(a.real), float(a.imag)] for a in state.amplitudes]}
    else:
        doc = {"n_qubits": state.n_qubits,
               "qubit_labels": list(state.qubit_labels),
               "matrix": [[[float(a.real), float(a.imag)] for a in row] for row in state.matrix]}
    return json.dumps(doc)


def save_state(state: State, path: Union[str, Path]) -> None:
    path = Path(path)
    try:
        path.write_text(state_to_json(state) + "\n")
    except OSError as e:
        raise IOFailure(f"Cannot write state file {path}: {e}") from e
    logger.info(f"State saved to {path}")
