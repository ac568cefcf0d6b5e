"""
Monogamy and Polygamy Inequalities

Evaluators for the concurrence and negativity monogamy/polygamy relations of
N-qubit pure states. Each evaluator returns an InequalityReport holding the two
sides, the signed slack and whether the relation held within tolerance.

Weighted polygamy bounds (the J terms) group the qubits other than a focus
qubit into blocks, order the blocks so every block's squared concurrence of
assistance dominates the sum over the blocks after it, and weight the i-th
block by (alpha/2)^(i-1).
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from errors import BadAlpha, BadInput, BadLabels, TooFewQubits, TooManyBlocks
from measures import (
    coa_two_qubit,
    concurrence_pure,
    crenoa_two_qubit,
    cren_two_qubit,
    negativity_pure_schmidt,
    wootters_concurrence,
)
from qstate import Bipartition, BlockGrouping, DensityMatrix, Labels, PureState, partial_trace, schmidt_rank

logger = logging.getLogger(__name__)

# --- Settings ---
DEFAULT_TOL = 1e-9
ZERO_TOL = 1e-12            # measure values at or below this are exact zeros
ORDER_TOL = 1e-12           # slack allowed in the block dominance condition
MAX_BLOCKS = 8              # exhaustive ordering search limit (8! permutations)
DEFAULT_PARTIES = (0, 1, 2)


class InequalityId(str, Enum):
    CKW2 = "CKW2"
    CKW_ALPHA = "CKW_ALPHA"
    DUAL_COA = "DUAL_COA"
    THM1 = "THM1"
    THM2 = "THM2"
    THM3 = "THM3"
    COR1 = "COR1"
    COR2_LOWER = "COR2_LOWER"
    COR2_UPPER = "COR2_UPPER"
    NEG_MONOGAMY = "NEG_MONOGAMY"
    NEG_DUAL = "NEG_DUAL"
    THM4 = "THM4"
    THM5 = "THM5"
    THM6 = "THM6"
    LEMMA1 = "LEMMA1"


# (low, high, low_exclusive)
ALPHA_RANGES: Dict[InequalityId, Tuple[float, float, bool]] = {
    InequalityId.CKW2: (2.0, 2.0, False),
    InequalityId.CKW_ALPHA: (2.0, math.inf, False),
    InequalityId.DUAL_COA: (2.0, 2.0, False),
    InequalityId.THM1: (0.0, 2.0, False),
    InequalityId.THM2: (0.0, 2.0, False),
    InequalityId.THM3: (0.0, 2.0, False),
    InequalityId.COR1: (0.0, 2.0, False),
    InequalityId.COR2_LOWER: (0.0, 2.0, False),
    InequalityId.COR2_UPPER: (0.0, 2.0, False),
    InequalityId.NEG_MONOGAMY: (2.0, math.inf, False),
    InequalityId.NEG_DUAL: (2.0, 2.0, False),
    InequalityId.THM4: (0.0, 2.0, False),
    InequalityId.THM5: (0.0, 2.0, True),
    InequalityId.THM6: (0.0, 2.0, False),
    InequalityId.LEMMA1: (0.0, 1.0, False),
}

MIN_QUBITS: Dict[InequalityId, int] = {
    InequalityId.THM2: 4,
    InequalityId.THM3: 4,
    InequalityId.THM5: 4,
    InequalityId.COR1: 6,
    InequalityId.COR2_LOWER: 6,
    InequalityId.COR2_UPPER: 6,
}


def check_alpha(inequality_id: InequalityId, alpha: float) -> float:
    inequality_id = InequalityId(inequality_id)
    low, high, low_open = ALPHA_RANGES[inequality_id]
    alpha = float(alpha)
    below = alpha <= low if low_open else alpha < low
    if not math.isfinite(alpha) or below or alpha > high:
        bracket = "(" if low_open else "["
        raise BadAlpha(f"{inequality_id.value} needs alpha in {bracket}{low:g}, {high:g}], got {alpha:g}")
    return alpha


def measure_pow(x: float, alpha: float) -> float:
    """
    x^alpha for a non-negative measure value.

    Values at or below ZERO_TOL count as exact zeros and stay 0 for every
    alpha, including alpha = 0.
    """
    if x <= ZERO_TOL:
        return 0.0
    return float(x) ** alpha


@dataclass
class OrderingResult:
    """
    Block order found for a weighted bound

    Attributes:
        permutation: Block indices in the order they are weighted
        satisfied: Every block dominates the sum of the blocks after it
        failure_prefix: 1-based position where dominance first fails, if it does
        values: Squared COA of each block, in permutation order
    """
    permutation: Tuple[int, ...]
    satisfied: bool
    failure_prefix: Optional[int] = None
    values: Tuple[float, ...] = ()


@dataclass
class InequalityReport:
    """
    One evaluated inequality instance

    slack is lhs - rhs for lower bounds and rhs - lhs for upper bounds, so the
    relation holds exactly when slack >= -tol.
    """
    inequality_id: InequalityId
    alpha: float
    lhs: float
    rhs: float
    slack: float
    holds: bool
    tol: float
    ordering: Optional[str] = None
    precondition_met: bool = True
    notes: Dict[str, Any] = field(default_factory=dict)

    def as_row(self) -> Dict[str, Any]:
        return {
            "inequality_id": self.inequality_id.value,
            "alpha": self.alpha,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "holds": self.holds,
            "ordering": self.ordering or "",
            "precondition_met": self.precondition_met,
        }


def _report(
    inequality_id: InequalityId,
    alpha: float,
    lhs: float,
    rhs: float,
    lower_bound: bool,
    tol: float,
    ordering: Optional[str] = None,
    precondition_met: bool = True,
    notes: Optional[Dict[str, Any]] = None,
) -> InequalityReport:
    slack = lhs - rhs if lower_bound else rhs - lhs
    report = InequalityReport(
        inequality_id=inequality_id,
        alpha=float(alpha),
        lhs=float(lhs),
        rhs=float(rhs),
        slack=float(slack),
        holds=bool(slack >= -tol),
        tol=tol,
        ordering=ordering,
        precondition_met=precondition_met,
        notes=notes or {},
    )
    logger.debug(f"{inequality_id.value} alpha={alpha:g}: lhs={lhs:.12g} rhs={rhs:.12g} slack={slack:.3e}")
    return report


class EntanglementProfile:
    """
    Lazily cached pair and cut quantities of one pure state.

    A campaign evaluates many inequalities over a whole alpha grid for the
    same state; every quantity here is computed once.
    """

    def __init__(self, state: PureState):
        if not isinstance(state, PureState):
            raise BadInput("Monogamy relations are evaluated on pure states")
        self.state = state
        self.labels: Labels = state.labels
        self._pairs: Dict[Tuple[int, int], DensityMatrix] = {}
        self._pair_values: Dict[Tuple[str, int, int], float] = {}
        self._cut_values: Dict[Tuple[str, Labels], float] = {}
        self.admissible: Dict[Tuple[int, str], BlockGrouping] = {}

    @property
    def n_qubits(self) -> int:
        return self.state.n_qubits

    def _pair_key(self, i: int, j: int) -> Tuple[int, int]:
        if i == j or i not in self.labels or j not in self.labels:
            raise BadLabels(f"Bad qubit pair ({i}, {j}) for labels {self.labels}")
        return (i, j) if i < j else (j, i)

    def pair_state(self, i: int, j: int) -> DensityMatrix:
        key = self._pair_key(i, j)
        if key not in self._pairs:
            self._pairs[key] = partial_trace(self.state, key)
        return self._pairs[key]

    def _pair(self, kind: str, i: int, j: int, fn) -> float:
        key = (kind,) + self._pair_key(i, j)
        if key not in self._pair_values:
            self._pair_values[key] = fn(self.pair_state(i, j))
        return self._pair_values[key]

    def concurrence(self, i: int, j: int) -> float:
        return self._pair("c", i, j, wootters_concurrence)

    def coa(self, i: int, j: int) -> float:
        return self._pair("ca", i, j, coa_two_qubit)

    def cren(self, i: int, j: int) -> float:
        return self._pair("nc", i, j, cren_two_qubit)

    def crenoa(self, i: int, j: int) -> float:
        return self._pair("na", i, j, crenoa_two_qubit)

    def _cut(self, kind: str, side: Iterable[int], fn) -> float:
        cut = Bipartition.of(side, self.labels)
        canonical = min(cut.side_a, cut.side_b)
        key = (kind, canonical)
        if key not in self._cut_values:
            self._cut_values[key] = fn(self.state, cut)
        return self._cut_values[key]

    def cut_concurrence(self, side: Iterable[int]) -> float:
        return self._cut("c", side, concurrence_pure)

    def cut_negativity(self, side: Iterable[int]) -> float:
        return self._cut("n", side, negativity_pure_schmidt)

    def schmidt_rank(self, side: Iterable[int]) -> int:
        return int(self._cut("r", side, lambda s, c: float(schmidt_rank(s, c))))

    def grouped_coa_sq(self, focus: int, block: Iterable[int], assisted: str = "coa") -> float:
        """Sum of squared pair COA (or CRENOA) between focus and each qubit of block"""
        pair_fn = self.coa if assisted == "coa" else self.crenoa
        block = tuple(block)
        if focus in block:
            raise BadLabels(f"Focus {focus} lies inside block {block}")
        return float(sum(pair_fn(focus, j) ** 2 for j in block))


Source = Union[PureState, EntanglementProfile]


def as_profile(source: Source) -> EntanglementProfile:
    if isinstance(source, EntanglementProfile):
        return source
    return EntanglementProfile(source)


def grouped_coa_sq(state: Source, focus: int, block: Iterable[int]) -> float:
    """
    C_a^2 of focus against a block, the sum of its two-qubit C_a^2 terms.

    Args:
        state: PureState or EntanglementProfile
        focus: Focus qubit label
        block: Labels of the block, not containing focus
    """
    return as_profile(state).grouped_coa_sq(focus, block)


def _first_failure(values: Sequence[float]) -> Optional[int]:
    tail = float(sum(values))
    for t, v in enumerate(values[:-1], start=1):
        tail -= v
        if v < tail - ORDER_TOL:
            return t
    return None


def find_ordering(blocks_with_values: Sequence[Tuple[Any, float]]) -> OrderingResult:
    """
    Order blocks so each block's value dominates the sum of all later ones.

    The descending sort is tried first; failing that all permutations are
    searched. When none qualifies, the permutation whose dominance fails
    latest is reported (descending order on ties).

    Args:
        blocks_with_values: (block, squared COA) pairs

    Returns:
        OrderingResult over indices into blocks_with_values
    """
    values = [float(v) for _, v in blocks_with_values]
    k = len(values)
    if k == 0:
        raise BadInput("find_ordering needs at least one block")
    if k > MAX_BLOCKS:
        raise TooManyBlocks(f"{k} blocks exceed the exhaustive search limit of {MAX_BLOCKS}")

    descending = tuple(sorted(range(k), key=lambda i: -values[i]))
    failure = _first_failure([values[i] for i in descending])
    if failure is None:
        return OrderingResult(descending, True, None, tuple(values[i] for i in descending))

    best_perm, best_failure = descending, failure
    for perm in itertools.permutations(range(k)):
        f = _first_failure([values[i] for i in perm])
        if f is None:
            return OrderingResult(perm, True, None, tuple(values[i] for i in perm))
        if f > best_failure:
            best_perm, best_failure = perm, f
    return OrderingResult(best_perm, False, best_failure, tuple(values[i] for i in best_perm))


@dataclass
class WeightedBound:
    """J value of one focus qubit plus the block order it was built with"""
    focus: int
    value: float
    grouping: BlockGrouping
    ordering: OrderingResult

    def describe(self) -> str:
        names = ["+".join(map(str, self.grouping.blocks[i])) for i in self.ordering.permutation]
        return f"{self.focus}:" + ">".join(names)


def _grouping_for(profile: EntanglementProfile, focus: int, grouping: Optional[BlockGrouping]) -> BlockGrouping:
    if grouping is None:
        return BlockGrouping.singletons(focus, profile.labels)
    if grouping.focus != focus:
        raise BadLabels(f"Grouping focus {grouping.focus} does not match qubit {focus}")
    return grouping.validate_for(profile.labels)


def weighted_bound(
    profile: EntanglementProfile,
    focus: int,
    grouping: Optional[BlockGrouping],
    alpha: float,
    assisted: str = "coa",
) -> WeightedBound:
    """
    J = sum_i (alpha/2)^(i-1) X^alpha(focus, M_i) under the found block order,
    where X^2(focus, M) is the summed squared pair COA (or CRENOA).
    """
    return _weighted_over(profile, _grouping_for(profile, focus, grouping), alpha, assisted)


def _block_values(profile: EntanglementProfile, grouping: BlockGrouping, assisted: str) -> List[float]:
    values = [profile.grouped_coa_sq(grouping.focus, b, assisted) for b in grouping.blocks]
    return [v if v > ZERO_TOL ** 2 else 0.0 for v in values]


def _weighted_over(
    profile: EntanglementProfile,
    grouping: BlockGrouping,
    alpha: float,
    assisted: str,
) -> WeightedBound:
    values = _block_values(profile, grouping, assisted)
    ordering = find_ordering(list(zip(grouping.blocks, values)))
    total = 0.0
    for i, v in enumerate(ordering.values):
        total += (alpha / 2.0) ** i * measure_pow(math.sqrt(v), alpha)
    return WeightedBound(grouping.focus, total, grouping, ordering)


def admits_order(profile: EntanglementProfile, grouping: BlockGrouping, assisted: str = "coa") -> bool:
    """True when some block order has every block dominating the sum of the later ones"""
    values = sorted(_block_values(profile, grouping, assisted), reverse=True)
    return _first_failure(values) is None


def _set_partitions(items: Sequence[int]) -> Iterator[List[Labels]]:
    if not items:
        yield []
        return
    head, rest = items[0], items[1:]
    for partition in _set_partitions(rest):
        yield [(head,)] + partition
        for i, block in enumerate(partition):
            yield partition[:i] + [(head,) + block] + partition[i + 1:]


def admissible_grouping(state: Source, focus: int, assisted: str = "coa") -> BlockGrouping:
    """
    Finest block grouping of the qubits other than focus that admits a valid order.

    One block per qubit is tried first. Otherwise groupings are scanned from
    the most blocks to the fewest; any two blocks admit an order, larger first,
    so the scan always ends. Results are cached on the profile.
    """
    profile = as_profile(state)
    key = (int(focus), assisted)
    if key in profile.admissible:
        return profile.admissible[key]
    singletons = _grouping_for(profile, focus, None)
    chosen = singletons
    if singletons.k > MAX_BLOCKS or not admits_order(profile, singletons, assisted):
        others = list(singletons.members())
        candidates = sorted(
            (p for p in _set_partitions(others) if len(p) <= min(MAX_BLOCKS, len(others) - 1)),
            key=lambda p: (-len(p), sorted(p)),
        )
        chosen = next(g for g in (BlockGrouping(focus, tuple(p)) for p in candidates)
                      if admits_order(profile, g, assisted))
    profile.admissible[key] = chosen
    return chosen


def _ordering_notes(notes: Dict[str, Any], bounds: Sequence[WeightedBound]) -> Tuple[str, bool]:
    satisfied = all(b.ordering.satisfied for b in bounds)
    if not satisfied:
        notes["no_valid_ordering"] = ",".join(str(b.focus) for b in bounds if not b.ordering.satisfied)
        for b in bounds:
            if not b.ordering.satisfied:
                notes[f"failure_prefix_{b.focus}"] = b.ordering.failure_prefix
    return ";".join(b.describe() for b in bounds), satisfied


def _require_qubits(inequality_id: InequalityId, profile: EntanglementProfile) -> None:
    need = MIN_QUBITS.get(inequality_id, 2)
    if profile.n_qubits < need:
        raise TooFewQubits(f"{inequality_id.value} needs at least {need} qubits, state has {profile.n_qubits}")


def _parties(profile: EntanglementProfile, parties: Sequence[int], count: int) -> Tuple[int, ...]:
    chosen = tuple(int(p) for p in parties[:count])
    if len(chosen) < count or len(set(chosen)) != count or any(p not in profile.labels for p in chosen):
        raise BadLabels(f"Need {count} distinct party labels from {profile.labels}, got {tuple(parties)}")
    return chosen


def _others(profile: EntanglementProfile, exclude: Iterable[int]) -> List[int]:
    exclude = set(exclude)
    return [l for l in profile.labels if l not in exclude]


# --- Concurrence relations ---

def ckw_check(state: Source, focus: int = 0, alpha: float = 2.0, tol: float = DEFAULT_TOL) -> InequalityReport:
    """C^alpha(A|rest) >= sum_j C^alpha(A B_j) for alpha >= 2"""
    inequality_id = InequalityId.CKW2 if alpha == 2 else InequalityId.CKW_ALPHA
    alpha = check_alpha(InequalityId.CKW_ALPHA, alpha)
    profile = as_profile(state)
    _require_qubits(inequality_id, profile)
    lhs = measure_pow(profile.cut_concurrence([focus]), alpha)
    rhs = sum(measure_pow(profile.concurrence(focus, j), alpha) for j in _others(profile, [focus]))
    return _report(inequality_id, alpha, lhs, rhs, True, tol)


def dual_coa_check(
    state: Source,
    focus: int = 0,
    grouping: Optional[BlockGrouping] = None,
    alpha: float = 2.0,
    tol: float = DEFAULT_TOL,
) -> InequalityReport:
    """C^2(A|rest) <= sum_i C_a^2(A M_i)"""
    alpha = check_alpha(InequalityId.DUAL_COA, alpha)
    profile = as_profile(state)
    _require_qubits(InequalityId.DUAL_COA, profile)
    grouping = _grouping_for(profile, focus, grouping)
    lhs = profile.cut_concurrence([focus]) ** 2
    rhs = sum(profile.grouped_coa_sq(focus, b) for b in grouping.blocks)
    return _report(InequalityId.DUAL_COA, alpha, lhs, rhs, False, tol)


def theorem1_bound(
    state: Source,
    focus: int = 0,
    grouping: Optional[BlockGrouping] = None,
    alpha: float = 2.0,
    tol: float = DEFAULT_TOL,
) -> InequalityReport:
    """
    Weighted polygamy bound C^alpha(A|rest) <= J_A for 0 <= alpha <= 2.

    Without a valid block order the report is still evaluated, under the
    best-effort order, and flagged with precondition_met = False.
    """
    alpha = check_alpha(InequalityId.THM1, alpha)
    profile = as_profile(state)
    _require_qubits(InequalityId.THM1, profile)
    bound = weighted_bound(profile, focus, grouping, alpha)
    notes: Dict[str, Any] = {"J": bound.value}
    ordering, satisfied = _ordering_notes(notes, [bound])
    lhs = measure_pow(profile.cut_concurrence([focus]), alpha)
    return _report(InequalityId.THM1, alpha, lhs, bound.value, False, tol, ordering, satisfied, notes)


def lemma1_check(x: float, y: float, alpha: float, tol: float = DEFAULT_TOL) -> Tuple[InequalityReport, InequalityReport]:
    """
    (x - y)^alpha >= x^alpha - y^alpha and (x + y)^alpha <= x^alpha + y^alpha
    for x >= y >= 0 and 0 <= alpha <= 1.
    """
    alpha = check_alpha(InequalityId.LEMMA1, alpha)
    if y < 0 or x < y:
        raise BadInput(f"lemma1_check needs x >= y >= 0, got x={x:g}, y={y:g}")
    x, y = float(x), float(y)
    difference = _report(InequalityId.LEMMA1, alpha, (x - y) ** alpha, x ** alpha - y ** alpha, True, tol,
                         notes={"part": "difference", "x": x, "y": y})
    total = _report(InequalityId.LEMMA1, alpha, (x + y) ** alpha, x ** alpha + y ** alpha, False, tol,
                    notes={"part": "sum", "x": x, "y": y})
    return difference, total


def proof_scalar_check(t: float, x: float, tol: float = 1e-12) -> bool:
    """(1 + t)^x <= 1 + x t <= 1 + x t^x on the unit box"""
    if not (0.0 <= t <= 1.0 and 0.0 <= x <= 1.0):
        raise BadInput(f"proof_scalar_check needs t, x in [0, 1], got t={t:g}, x={x:g}")
    middle = 1.0 + x * t
    return (1.0 + t) ** x <= middle + tol and middle <= 1.0 + x * t ** x + tol


def _pair_cut_terms(profile: EntanglementProfile, a: int, b: int, pair_fn) -> Tuple[float, float]:
    """(sum_i X^2(a C_i) + X^2(ab), sum_i X^2(b C_i) + X^2(ab)) over the remaining qubits C_i"""
    rest = _others(profile, [a, b])
    ab = pair_fn(a, b) ** 2
    a_side = sum(pair_fn(a, c) ** 2 for c in rest) + ab
    b_side = sum(pair_fn(b, c) ** 2 for c in rest) + ab
    return a_side, b_side


@dataclass
class _TwoPartyBound:
    j_a: WeightedBound
    j_b: WeightedBound
    a_term: float           # (sum_i X^2(A C_i) + X^2(AB))^(alpha/2)
    b_term: float           # (sum_i X^2(B C_i) + X^2(AB))^(alpha/2)

    @property
    def candidate_a(self) -> float:
        """Built from B's pairs, minus J_A"""
        return self.b_term - self.j_a.value

    @property
    def candidate_b(self) -> float:
        """Built from A's pairs, minus J_B"""
        return self.a_term - self.j_b.value

    @property
    def best(self) -> float:
        return max(self.candidate_a, self.candidate_b)


def _two_party_bound(
    profile: EntanglementProfile,
    a: int,
    b: int,
    alpha: float,
    grouping_a: Optional[BlockGrouping],
    grouping_b: Optional[BlockGrouping],
    negativity_based: bool = False,
) -> _TwoPartyBound:
    assisted = "crenoa" if negativity_based else "coa"
    pair_fn = profile.cren if negativity_based else profile.concurrence
    j_a = weighted_bound(profile, a, grouping_a, alpha, assisted)
    j_b = weighted_bound(profile, b, grouping_b, alpha, assisted)
    a_side, b_side = _pair_cut_terms(profile, a, b, pair_fn)
    return _TwoPartyBound(j_a, j_b, measure_pow(math.sqrt(a_side), alpha), measure_pow(math.sqrt(b_side), alpha))


def _two_party_notes(bound: _TwoPartyBound, prefix: str = "J") -> Dict[str, Any]:
    return {
        f"{prefix}_A": bound.j_a.value,
        f"{prefix}_B": bound.j_b.value,
        "candidate_minus_J_A": bound.candidate_a,
        "candidate_minus_J_B": bound.candidate_b,
    }


def theorem2_lower(
    state: Source,
    alpha: float,
    grouping_a: Optional[BlockGrouping] = None,
    grouping_b: Optional[BlockGrouping] = None,
    parties: Sequence[int] = DEFAULT_PARTIES,
    tol: float = DEFAULT_TOL,
) -> InequalityReport:
    """
    C^alpha(AB|rest) >= max{(sum_i C^2(A C_i) + C^2(AB))^(alpha/2) - J_B,
                            (sum_i C^2(B C_i) + C^2(AB))^(alpha/2) - J_A}
    """
    alpha = check_alpha(InequalityId.THM2, alpha)
    profile = as_profile(state)
    _require_qubits(InequalityId.THM2, profile)
    a, b = _parties(profile, parties, 2)
    bound = _two_party_bound(profile, a, b, alpha, grouping_a, grouping_b)
    notes = _two_party_notes(bound)
    notes["A_dominates_B"] = profile.cut_concurrence([a]) ** 2 >= profile.cut_concurrence([b]) ** 2
    ordering, satisfied = _ordering_notes(notes, [bound.j_a, bound.j_b])
    lhs = measure_pow(profile.cut_concurrence([a, b]), alpha)
    return _report(InequalityId.THM2, alpha, lhs, bound.best, True, tol, ordering, satisfied, notes)


def theorem3_upper(
    state: Source,
    alpha: float,
    grouping_a: Optional[BlockGrouping] = None,
    grouping_b: Optional[BlockGrouping] = None,
    parties: Sequence[int] = DEFAULT_PARTIES,
    tol: float = DEFAULT_TOL,
) -> InequalityReport:
    """C^alpha(AB|rest) <= J_A + J_B"""
    alpha = check_alpha(InequalityId.THM3, alpha)
    profile = as_profile(state)
    _require_qubits(InequalityId.THM3, profile)
    a, b = _parties(profile, parties, 2)
    j_a = weighted_bound(profile, a, grouping_a, alpha)
    j_b = weighted_bound(profile, b, grouping_b, alpha)
    notes: Dict[str, Any] = {"J_A": j_a.value, "J_B": j_b.value}
    ordering, satisfied = _ordering_notes(notes, [j_a, j_b])
    lhs = measure_pow(profile.cut_concurrence([a, b]), alpha)
    return _report(InequalityId.THM3, alpha, lhs, j_a.value + j_b.value, False, tol, ordering, satisfied, notes)


def _without(grouping: BlockGrouping, drop: Iterable[int]) -> Optional[BlockGrouping]:
    """grouping with the dropped labels removed from its blocks; None if nothing is left"""
    drop = set(drop)
    blocks = tuple(kept for kept in (tuple(l for l in b if l not in drop) for b in grouping.blocks) if kept)
    return BlockGrouping(grouping.focus, blocks) if blocks else None


@lru_cache(maxsize=1)
def _note_inert_clause() -> None:
    logger.warning("Clause '2 <= m <= N-3' of the ABC1 corollaries has no defined m; ignoring it")


def _three_party_setup(
    inequality_id: InequalityId,
    state: Source,
    alpha: float,
    parties: Sequence[int],
) -> Tuple[EntanglementProfile, float, Tuple[int, int, int]]:
    alpha = check_alpha(inequality_id, alpha)
    profile = as_profile(state)
    _require_qubits(inequality_id, profile)
    _note_inert_clause()
    a, b, c1 = _parties(profile, parties, 3)
    return profile, alpha, (a, b, c1)


def corollary1_lower(
    state: Source,
    alpha: float,
    grouping_a: Optional[BlockGrouping] = None,
    grouping_b: Optional[BlockGrouping] = None,
    grouping_c: Optional[BlockGrouping] = None,
    parties: Sequence[int] = DEFAULT_PARTIES,
    tol: float = DEFAULT_TOL,
) -> InequalityReport:
    """
    C^alpha(ABC1|rest) >= (two-party lower bound on AB) - J_C1.

    Valid in the branch C^2(AB|C1 ...) >= C^2(C1|AB C2 ...); the branch and
    the three block orders make up precondition_met.

    J_C1 runs over every partner of C1, A and B included. The note
    rhs_C1_outside_AB is the same bound with J_C1 over C2 ... only, clipped
    at 0; it is 1 on a Bell pair across A-C1 where the evaluated rhs is 0.
    """
    profile, alpha, (a, b, c1) = _three_party_setup(InequalityId.COR1, state, alpha, parties)
    bound = _two_party_bound(profile, a, b, alpha, grouping_a, grouping_b)
    c_grouping = _grouping_for(profile, c1, grouping_c)
    j_c = _weighted_over(profile, c_grouping, alpha, "coa")
    outside = _without(c_grouping, (a, b))
    j_c_outside = _weighted_over(profile, outside, alpha, "coa").value if outside else 0.0
    branch = profile.cut_concurrence([a, b]) ** 2 >= profile.cut_concurrence([c1]) ** 2 - ZERO_TOL
    notes = _two_party_notes(bound)
    notes.update({
        "J_C1": j_c.value,
        "J_C1_outside_AB": j_c_outside,
        "rhs_C1_outside_AB": max(0.0, bound.best - j_c_outside),
        "branch_AB_dominates_C1": branch,
    })
    ordering, satisfied = _ordering_notes(notes, [bound.j_a, bound.j_b, j_c])
    lhs = measure_pow(profile.cut_concurrence([a, b, c1]), alpha)
    rhs = bound.best - j_c.value
    return _report(InequalityId.COR1, alpha, lhs, rhs, True, tol, ordering, satisfied and branch, notes)


def corollary2_bounds(
    state: Source,
    alpha: float,
    grouping_a: Optional[BlockGrouping] = None,
    grouping_b: Optional[BlockGrouping] = None,
    grouping_c: Optional[BlockGrouping] = None,
    parties: Sequence[int] = DEFAULT_PARTIES,
    tol: float = DEFAULT_TOL,
) -> Tuple[InequalityReport, InequalityReport]:
    """
    Lower and upper bounds on C^alpha(ABC1|rest).

    lower: (C^2(A C1) + C^2(B C1) + sum_{i>=2} C^2(C1 C_i))^(alpha/2) - J_A - J_B,
           valid in the branch C^2(AB|C1 ...) <= C^2(C1|AB C2 ...)
    upper: J_A + J_B + J_C1
    """
    profile, alpha, (a, b, c1) = _three_party_setup(InequalityId.COR2_LOWER, state, alpha, parties)
    j_a = weighted_bound(profile, a, grouping_a, alpha)
    j_b = weighted_bound(profile, b, grouping_b, alpha)
    j_c = weighted_bound(profile, c1, grouping_c, alpha)
    c1_terms = sum(profile.concurrence(c1, j) ** 2 for j in _others(profile, [c1]))
    branch = profile.cut_concurrence([a, b]) ** 2 <= profile.cut_concurrence([c1]) ** 2 + ZERO_TOL
    lhs = measure_pow(profile.cut_concurrence([a, b, c1]), alpha)

    notes = {"J_A": j_a.value, "J_B": j_b.value, "J_C1": j_c.value}
    lower_notes = dict(notes, branch_C1_dominates_AB=branch)
    lower_ordering, lower_ok = _ordering_notes(lower_notes, [j_a, j_b])
    lower = _report(InequalityId.COR2_LOWER, alpha, lhs,
                    measure_pow(math.sqrt(c1_terms), alpha) - j_a.value - j_b.value,
                    True, tol, lower_ordering, lower_ok and branch, lower_notes)

    upper_notes = dict(notes)
    upper_ordering, upper_ok = _ordering_notes(upper_notes, [j_a, j_b, j_c])
    upper = _report(InequalityId.COR2_UPPER, alpha, lhs, j_a.value + j_b.value + j_c.value,
                    False, tol, upper_ordering, upper_ok, upper_notes)
    return lower, upper


# --- Negativity relations ---

def negativity_monogamy_check(state: Source, focus: int = 0, alpha: float = 2.0, tol: float = DEFAULT_TOL) -> InequalityReport:
    """N^alpha(A|rest) >= sum_j N_c^alpha(A B_j) for alpha >= 2"""
    alpha = check_alpha(InequalityId.NEG_MONOGAMY, alpha)
    profile = as_profile(state)
    _require_qubits(InequalityId.NEG_MONOGAMY, profile)
    lhs = measure_pow(profile.cut_negativity([focus]), alpha)
    rhs = sum(measure_pow(profile.cren(focus, j), alpha) for j in _others(profile, [focus]))
    return _report(InequalityId.NEG_MONOGAMY, alpha, lhs, rhs, True, tol)


def negativity_dual_check(
    state: Source,
    focus: int = 0,
    grouping: Optional[BlockGrouping] = None,
    tol: float = DEFAULT_TOL,
) -> InequalityReport:
    """N^2(A|rest) <= sum_i N_a^2(A M_i)"""
    profile = as_profile(state)
    _require_qubits(InequalityId.NEG_DUAL, profile)
    grouping = _grouping_for(profile, focus, grouping)
    lhs = profile.cut_negativity([focus]) ** 2
    rhs = sum(profile.grouped_coa_sq(focus, b, "crenoa") for b in grouping.blocks)
    return _report(InequalityId.NEG_DUAL, 2.0, lhs, rhs, False, tol)


def theorem4_bound(
    state: Source,
    focus: int = 0,
    grouping: Optional[BlockGrouping] = None,
    alpha: float = 2.0,
    tol: float = DEFAULT_TOL,
) -> InequalityReport:
    """N^alpha(A|rest) <= J'_A, the CRENOA analogue of theorem1_bound"""
    alpha = check_alpha(InequalityId.THM4, alpha)
    profile = as_profile(state)
    _require_qubits(InequalityId.THM4, profile)
    bound = weighted_bound(profile, focus, grouping, alpha, "crenoa")
    notes: Dict[str, Any] = {"J'": bound.value}
    ordering, satisfied = _ordering_notes(notes, [bound])
    lhs = measure_pow(profile.cut_negativity([focus]), alpha)
    return _report(InequalityId.THM4, alpha, lhs, bound.value, False, tol, ordering, satisfied, notes)


def theorem5_lower(
    state: Source,
    alpha: float,
    grouping_a: Optional[BlockGrouping] = None,
    grouping_b: Optional[BlockGrouping] = None,
    parties: Sequence[int] = DEFAULT_PARTIES,
    tol: float = DEFAULT_TOL,
) -> InequalityReport:
    """
    N^alpha(AB|rest) >= max{(sum_i N_c^2(A C_i) + N_c^2(AB))^(alpha/2) - J'_B,
                            (sum_i N_c^2(B C_i) + N_c^2(AB))^(alpha/2) - J'_A}
    for 0 < alpha <= 2.

    The note slack_A_pairs_minus_J'_A is
    lhs - ((sum_i N_c^2(A C_i) + N_c^2(AB))^(alpha/2) - J'_A),
    the candidate built from A's pairs paired with A's own J'. On the W-class
    state (3/4, 1/2, sqrt(2)/4, 1/4) at alpha = 2 it is 39/64 while the
    evaluated slack is 3/8.
    """
    alpha = check_alpha(InequalityId.THM5, alpha)
    profile = as_profile(state)
    _require_qubits(InequalityId.THM5, profile)
    a, b = _parties(profile, parties, 2)
    bound = _two_party_bound(profile, a, b, alpha, grouping_a, grouping_b, negativity_based=True)
    notes = _two_party_notes(bound, prefix="J'")
    ordering, satisfied = _ordering_notes(notes, [bound.j_a, bound.j_b])
    lhs = measure_pow(profile.cut_negativity([a, b]), alpha)
    notes["slack_A_pairs_minus_J'_A"] = lhs - (bound.a_term - bound.j_a.value)
    return _report(InequalityId.THM5, alpha, lhs, bound.best, True, tol, ordering, satisfied, notes)


def theorem6_upper(
    state: Source,
    alpha: float,
    grouping_a: Optional[BlockGrouping] = None,
    grouping_b: Optional[BlockGrouping] = None,
    parties: Sequence[int] = DEFAULT_PARTIES,
    tol: float = DEFAULT_TOL,
) -> InequalityReport:
    """N^alpha(AB|rest) <= (r(r-1)/2)^(alpha/2) (J'_A + J'_B), r the Schmidt rank at AB|rest"""
    alpha = check_alpha(InequalityId.THM6, alpha)
    profile = as_profile(state)
    _require_qubits(InequalityId.THM6, profile)
    a, b = _parties(profile, parties, 2)
    if profile.n_qubits < 3:
        raise TooFewQubits("THM6 needs at least one qubit outside A and B")
    r = profile.schmidt_rank([a, b])
    factor = measure_pow(math.sqrt(r * (r - 1) / 2.0), alpha)
    j_a = weighted_bound(profile, a, grouping_a, alpha, "crenoa")
    j_b = weighted_bound(profile, b, grouping_b, alpha, "crenoa")
    notes: Dict[str, Any] = {"J'_A": j_a.value, "J'_B": j_b.value, "r": r, "factor": factor}
    ordering, satisfied = _ordering_notes(notes, [j_a, j_b])
    lhs = measure_pow(profile.cut_negativity([a, b]), alpha)
    rhs = factor * (j_a.value + j_b.value)
    return _report(InequalityId.THM6, alpha, lhs, rhs, False, tol, ordering, satisfied, notes)


def evaluate(
    inequality_id: Union[InequalityId, str],
    state: Source,
    alpha: float,
    groupings: Optional[Dict[int, BlockGrouping]] = None,
    parties: Sequence[int] = DEFAULT_PARTIES,
    tol: float = DEFAULT_TOL,
) -> InequalityReport:
    """
    Evaluate one state-based inequality by id.

    groupings maps a focus qubit to its block grouping; missing foci use one
    block per qubit. The single-focus relations use parties[0] as focus.
    """
    inequality_id = InequalityId(inequality_id)
    groupings = groupings or {}
    profile = as_profile(state)
    focus = int(parties[0])
    a, b = int(parties[0]), int(parties[1]) if len(parties) > 1 else None
    c1 = int(parties[2]) if len(parties) > 2 else None
    g_a, g_b, g_c = groupings.get(a), groupings.get(b), groupings.get(c1)

    if inequality_id in (InequalityId.CKW2, InequalityId.CKW_ALPHA):
        if inequality_id is InequalityId.CKW2 and alpha != 2:
            raise BadAlpha(f"CKW2 is the alpha = 2 relation, got alpha={alpha:g}")
        if inequality_id is InequalityId.CKW_ALPHA:
            check_alpha(inequality_id, alpha)
        report = ckw_check(profile, focus, alpha, tol)
        report.inequality_id = inequality_id
        return report
    if inequality_id is InequalityId.DUAL_COA:
        return dual_coa_check(profile, focus, g_a, alpha, tol)
    if inequality_id is InequalityId.THM1:
        return theorem1_bound(profile, focus, g_a, alpha, tol)
    if inequality_id is InequalityId.THM2:
        return theorem2_lower(profile, alpha, g_a, g_b, parties, tol)
    if inequality_id is InequalityId.THM3:
        return theorem3_upper(profile, alpha, g_a, g_b, parties, tol)
    if inequality_id is InequalityId.COR1:
        return corollary1_lower(profile, alpha, g_a, g_b, g_c, parties, tol)
    if inequality_id in (InequalityId.COR2_LOWER, InequalityId.COR2_UPPER):
        lower, upper = corollary2_bounds(profile, alpha, g_a, g_b, g_c, parties, tol)
        return lower if inequality_id is InequalityId.COR2_LOWER else upper
    if inequality_id is InequalityId.NEG_MONOGAMY:
        return negativity_monogamy_check(profile, focus, alpha, tol)
    if inequality_id is InequalityId.NEG_DUAL:
        check_alpha(inequality_id, alpha)
        return negativity_dual_check(profile, focus, g_a, tol)
    if inequality_id is InequalityId.THM4:
        return theorem4_bound(profile, focus, g_a, alpha, tol)
    if inequality_id is InequalityId.THM5:
        return theorem5_lower(profile, alpha, g_a, g_b, parties, tol)
    if inequality_id is InequalityId.THM6:
        return theorem6_upper(profile, alpha, g_a, g_b, parties, tol)
    raise BadInput(f"{inequality_id.value} is not evaluated on a state")
