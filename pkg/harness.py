"""
Verification Harness

Randomized verification campaigns over Haar-random states, scalar grid
checks, and the figure data of the worked examples. Campaign rows go to CSV
through polars; the per-sample seed scheme makes every row replayable and the
output independent of the number of worker processes.

Ordered relations group each focus qubit's partners one per block when that
admits a valid order, and otherwise fall back to the finest grouping that
does; the one-block-per-qubit skip count is reported on its own. A split
ensemble (independent Haar states on qubits 0..K-1 and K..N-1) gives the
three-party lower bound a population where its branch condition holds.
"""

import logging
import math
import time
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Tuple

import numpy as np
import polars as pl
from joblib import Parallel, delayed
from pydantic import BaseModel, Field, field_validator, model_validator
from tqdm import tqdm

from errors import BadInput, IOFailure
from linalg_core import tight_solver
from monogamy import (
    ALPHA_RANGES,
    MIN_QUBITS,
    EntanglementProfile,
    InequalityId,
    InequalityReport,
    admissible_grouping,
    check_alpha,
    evaluate,
    lemma1_check,
    proof_scalar_check,
    theorem1_bound,
    theorem2_lower,
    theorem3_upper,
    theorem5_lower,
    theorem6_upper,
)
from qstate import BlockGrouping, PureState
from states import example2_state, gsd_three_qubit, haar_recipe, parse_recipe, wclass_four_qubit

logger = logging.getLogger(__name__)

# --- Settings ---
CAMPAIGN_TOL = 1e-8
MARGINAL_FLOOR = 1e-10      # slacks in [-tol, -MARGINAL_FLOOR) are re-checked with the tight solver
DEFAULT_GRID_POINTS = 41
UNBOUNDED_ALPHA_STOP = 4.0  # grid end for the alpha >= 2 relations
FIGURE_POINTS = 201
FIGURE_FLOAT_PRECISION = 12
SCALAR_GRID_POINTS = 101

CSV_COLUMNS = [
    "sample", "seed", "recipe", "inequality_id", "alpha", "lhs", "rhs",
    "slack", "holds", "ordering", "precondition_met",
]

# relations whose bounds need a block order, and the pair measure the blocks are built from
ORDERED_RELATIONS: Dict[InequalityId, str] = {
    InequalityId.THM1: "coa",
    InequalityId.THM2: "coa",
    InequalityId.THM3: "coa",
    InequalityId.COR1: "coa",
    InequalityId.COR2_LOWER: "coa",
    InequalityId.COR2_UPPER: "coa",
    InequalityId.THM4: "crenoa",
    InequalityId.THM5: "crenoa",
    InequalityId.THM6: "crenoa",
}


def default_alpha_grid(inequality_id: InequalityId) -> Tuple[float, float, int]:
    """Whole validity range; open lower ends start one grid step in"""
    low, high, low_open = ALPHA_RANGES[inequality_id]
    if math.isinf(high):
        high = UNBOUNDED_ALPHA_STOP
    if low == high:
        return (low, high, 1)
    if low_open:
        low += (high - low) / (DEFAULT_GRID_POINTS - 1)
    return (low, high, DEFAULT_GRID_POINTS)


class CampaignConfig(BaseModel):
    """Parameters of one randomized verification sweep"""
    inequality_id: InequalityId
    n_qubits: int = Field(default=4, ge=1, le=10)
    samples: int = Field(default=100, ge=1)
    alpha_grid: Optional[Tuple[float, float, int]] = None
    seed: int = Field(default=0, ge=0)
    tol: float = Field(default=CAMPAIGN_TOL, gt=0)
    grouping: Optional[str] = None
    grouping_b: Optional[str] = None
    grouping_c: Optional[str] = None
    parties: Tuple[int, int, int] = (0, 1, 2)
    output: Optional[Path] = None
    n_jobs: int = 1
    recipe: Optional[str] = None
    split: Optional[int] = Field(default=None, ge=1)
    auto_grouping: bool = True
    progress: bool = False

    @field_validator("parties")
    @classmethod
    def _distinct_parties(cls, v):
        if len(set(v)) != 3 or min(v) < 0:
            raise ValueError(f"parties must be three distinct non-negative labels, got {v}")
        return v

    @model_validator(mode="after")
    def _check_ranges(self):
        if self.alpha_grid is None:
            self.alpha_grid = default_alpha_grid(self.inequality_id)
        start, stop, points = self.alpha_grid
        if points < 1 or stop < start or (points == 1 and stop != start):
            raise ValueError(f"alpha_grid {self.alpha_grid} must satisfy start <= stop, points >= 1")
        check_alpha(self.inequality_id, start)
        check_alpha(self.inequality_id, stop)
        if self.inequality_id is InequalityId.LEMMA1:
            return self
        need = MIN_QUBITS.get(self.inequality_id, 2)
        if self.inequality_id is InequalityId.THM6:
            need = 3
        if self.recipe is None and self.n_qubits < need:
            raise ValueError(f"{self.inequality_id.value} needs n_qubits >= {need}, got {self.n_qubits}")
        if self.recipe is None and max(self.parties[:self.party_count()]) >= self.n_qubits:
            raise ValueError(f"parties {self.parties} do not fit {self.n_qubits} qubits")
        if self.split is not None and self.split >= self.n_qubits:
            raise ValueError(f"split point {self.split} must be below n_qubits={self.n_qubits}")
        return self

    def party_count(self) -> int:
        if self.inequality_id in (InequalityId.COR1, InequalityId.COR2_LOWER, InequalityId.COR2_UPPER):
            return 3
        if self.inequality_id in (InequalityId.THM2, InequalityId.THM3, InequalityId.THM5, InequalityId.THM6):
            return 2
        return 1

    def alphas(self) -> np.ndarray:
        start, stop, points = self.alpha_grid
        return np.linspace(start, stop, points)

    def groupings(self) -> Dict[int, BlockGrouping]:
        out = {}
        for focus, spec in zip(self.parties, (self.grouping, self.grouping_b, self.grouping_c)):
            if spec:
                out[focus] = BlockGrouping.parse(focus, spec)
        return out


class CampaignSummary(BaseModel):
    """Aggregate result of run_campaign; holds + violations + skipped == total"""
    inequality_id: InequalityId
    total: int = 0
    holds: int = 0
    violations: int = 0
    skipped: int = 0
    singleton_skipped: int = 0
    marginal: int = 0
    worst_slack: Optional[float] = None
    worst_recipe: Optional[str] = None
    worst_sample: Optional[int] = None
    worst_alpha: Optional[float] = None
    runtime_s: float = 0.0
    output: Optional[str] = None

    def add(self, row: Dict[str, Any]) -> None:
        self.total += 1
        if not row["precondition_met"]:
            self.skipped += 1
            return
        if row["holds"]:
            self.holds += 1
        else:
            self.violations += 1
        if self.worst_slack is None or row["slack"] < self.worst_slack:
            self.worst_slack = row["slack"]
            self.worst_recipe = row["recipe"]
            self.worst_sample = row["sample"]
            self.worst_alpha = row["alpha"]

    def table(self) -> str:
        """Aligned two-column text rendering"""
        rows = [
            ("inequality", self.inequality_id.value),
            ("total", self.total),
            ("holds", self.holds),
            ("violations", self.violations),
            ("skipped", self.skipped),
            ("singleton skips", self.singleton_skipped),
            ("marginal", self.marginal),
            ("worst slack", "-" if self.worst_slack is None else f"{self.worst_slack:.12g}"),
            ("worst recipe", self.worst_recipe or "-"),
            ("worst sample", "-" if self.worst_sample is None else self.worst_sample),
            ("worst alpha", "-" if self.worst_alpha is None else f"{self.worst_alpha:.12g}"),
            ("runtime (s)", f"{self.runtime_s:.2f}"),
        ]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


def sample_seed(master_seed: int, index: int) -> int:
    """Per-sample seed, a pure function of (master seed, sample index)"""
    return int(np.random.SeedSequence([master_seed, index]).generate_state(1)[0])


def _is_marginal(report: InequalityReport) -> bool:
    return -report.tol <= report.slack < -MARGINAL_FLOOR


def _evaluate_checked(
    inequality_id: InequalityId,
    recipe: str,
    profile: EntanglementProfile,
    alpha: float,
    groupings: Dict[int, BlockGrouping],
    parties: Tuple[int, ...],
    tol: float,
) -> Tuple[InequalityReport, bool]:
    """Evaluate, re-checking marginal slacks with the tight eigen-solver"""
    report = evaluate(inequality_id, profile, alpha, groupings, parties, tol)
    if not _is_marginal(report):
        return report, False
    logger.warning(f"Marginal slack {report.slack:.3e} for {inequality_id.value} on {recipe} at alpha={alpha:g}; re-checking")
    with tight_solver():
        report = evaluate(inequality_id, _profile_from_recipe(recipe), alpha, groupings, parties, tol)
    return report, True


def _profile_from_recipe(recipe: str) -> EntanglementProfile:
    state = parse_recipe(recipe).build()
    if not isinstance(state, PureState):
        raise BadInput(f"Recipe '{recipe}' does not give a pure state")
    return EntanglementProfile(state)


def _row(sample: int, seed: int, recipe: str, report: InequalityReport) -> Dict[str, Any]:
    return {"sample": sample, "seed": seed, "recipe": recipe, **report.as_row()}


def sample_groupings(config: CampaignConfig, profile: EntanglementProfile) -> Tuple[Dict[int, BlockGrouping], bool]:
    """
    Block groupings for one sample, plus whether one block per qubit admits an order.

    Foci without an explicit grouping get the finest grouping that admits a
    valid order when config.auto_grouping is set, and one block per qubit
    otherwise.
    """
    groupings = config.groupings()
    assisted = ORDERED_RELATIONS.get(config.inequality_id)
    if assisted is None:
        return groupings, True
    singletons_ordered = True
    for focus in config.parties[:config.party_count()]:
        if focus in groupings:
            continue
        chosen = admissible_grouping(profile, focus, assisted)
        singletons_ordered &= chosen == BlockGrouping.singletons(focus, profile.labels)
        if config.auto_grouping:
            groupings[focus] = chosen
    return groupings, singletons_ordered


def _sample_recipe(config: CampaignConfig, seed: int) -> str:
    return config.recipe or str(haar_recipe(config.n_qubits, seed, config.split))


def _sample_rows(config: CampaignConfig, index: int) -> Tuple[List[Dict[str, Any]], int, int]:
    """(rows, marginal re-checks, rows whose one-block-per-qubit grouping has no order)"""
    seed = sample_seed(config.seed, index)
    recipe = _sample_recipe(config, seed)
    profile = _profile_from_recipe(recipe)
    groupings, singletons_ordered = sample_groupings(config, profile)
    rows, marginal = [], 0
    for alpha in config.alphas():
        report, was_marginal = _evaluate_checked(
            config.inequality_id, recipe, profile, float(alpha), groupings, config.parties, config.tol
        )
        marginal += was_marginal
        rows.append(_row(index, seed, recipe, report))
    return rows, marginal, 0 if singletons_ordered else len(rows)


def _lemma1_rows(config: CampaignConfig) -> Iterator[Dict[str, Any]]:
    """x = 1, y on a uniform grid over [0, 1] with config.samples points"""
    for index, y in enumerate(np.linspace(0.0, 1.0, config.samples)):
        for alpha in config.alphas():
            for report in lemma1_check(1.0, float(y), float(alpha), config.tol):
                recipe = f"lemma1:{report.notes['part']},1,{float(y)!r}"
                yield _row(index, 0, recipe, report)


def _write_csv(frame: pl.DataFrame, path: Path, float_precision: Optional[int] = None) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.write_csv(path, float_precision=float_precision)
    except OSError as e:
        raise IOFailure(f"Cannot write {path}: {e}") from e


def rows_frame(rows: List[Dict[str, Any]]) -> pl.DataFrame:
    schema = {
        "sample": pl.Int64, "seed": pl.Int64, "recipe": pl.Utf8, "inequality_id": pl.Utf8,
        "alpha": pl.Float64, "lhs": pl.Float64, "rhs": pl.Float64, "slack": pl.Float64,
        "holds": pl.Boolean, "ordering": pl.Utf8, "precondition_met": pl.Boolean,
    }
    return pl.DataFrame(rows, schema=schema)


def run_campaign(config: CampaignConfig) -> Tuple[CampaignSummary, pl.DataFrame]:
    """
    Run a verification sweep.

    Each sample draws its own seed from (config.seed, sample index), so rows
    come out identical for any n_jobs. Rows whose precondition (block order,
    branch condition) fails are counted as skipped, never as violations.

    Returns:
        (summary, frame of all report rows in sample order)
    """
    started = time.perf_counter()
    summary = CampaignSummary(inequality_id=config.inequality_id)
    rows: List[Dict[str, Any]] = []
    logger.info(f"Campaign {config.inequality_id.value}: n={config.n_qubits}, samples={config.samples}, "
                f"alpha grid {config.alpha_grid}, seed={config.seed}, n_jobs={config.n_jobs}")

    if config.inequality_id is InequalityId.LEMMA1:
        rows.extend(_lemma1_rows(config))
    else:
        tasks = (delayed(_sample_rows)(config, i) for i in range(config.samples))
        results = Parallel(n_jobs=config.n_jobs, return_as="generator")(tasks)
        for sample_rows, marginal, singleton_skips in tqdm(results, total=config.samples,
                                                           desc=config.inequality_id.value,
                                                           disable=not config.progress):
            rows.extend(sample_rows)
            summary.marginal += marginal
            summary.singleton_skipped += singleton_skips

    for row in rows:
        summary.add(row)
    frame = rows_frame(rows)
    summary.runtime_s = time.perf_counter() - started

    if config.output is not None:
        _write_csv(frame, config.output)
        summary.output = str(config.output)
        logger.info(f"Wrote {len(rows)} rows to {config.output}")
    if summary.total:
        logger.info(f"Campaign done: {summary.holds} hold, {summary.violations} violated, "
                    f"{summary.skipped} skipped ({100.0 * summary.skipped / summary.total:.1f}%); "
                    f"one block per qubit would skip {100.0 * summary.singleton_skipped / summary.total:.1f}%")
    if summary.violations:
        logger.warning(f"{summary.violations} violations; worst slack {summary.worst_slack:.3e} "
                       f"on {summary.worst_recipe} at alpha={summary.worst_alpha:g}")
    return summary, frame


def replay_row(row: Dict[str, Any], config: CampaignConfig) -> Dict[str, Any]:
    """Re-evaluate one campaign row from its recipe, inequality id and alpha"""
    inequality_id = InequalityId(row["inequality_id"])
    alpha = float(row["alpha"])
    if inequality_id is InequalityId.LEMMA1:
        _, part, x, y = row["recipe"].replace(":", ",").split(",")
        difference, total = lemma1_check(float(x), float(y), alpha, config.tol)
        report = difference if part == "difference" else total
    else:
        profile = _profile_from_recipe(row["recipe"])
        groupings, _ = sample_groupings(config, profile)
        report, _ = _evaluate_checked(inequality_id, row["recipe"], profile, alpha, groupings,
                                      config.parties, config.tol)
    return _row(row["sample"], row["seed"], row["recipe"], report)


def proof_scalar_grid(points: int = SCALAR_GRID_POINTS, tol: float = 1e-12) -> int:
    """Number of (t, x) grid points on the unit square where the scalar chain fails"""
    grid = np.linspace(0.0, 1.0, points)
    return sum(not proof_scalar_check(float(t), float(x), tol) for t in grid for x in grid)


# --- Figures ---

FIGURE_ALPHA_RANGES = {1: (0.0, 2.0), 2: (0.0, 2.0), 3: (0.0, 2.0), 4: (0.01, 2.0), 5: (0.0, 2.0)}


def _figure_rows(figure_id: int, alphas: np.ndarray) -> Iterator[Tuple[float, str, float]]:
    if figure_id == 1:
        lam = 1 / math.sqrt(5)
        profile = EntanglementProfile(gsd_three_qubit(lam, lam, lam, lam, lam))
        for a in alphas:
            report = theorem1_bound(profile, 0, None, a)
            yield a, "C^alpha(A|BC)", report.lhs
            yield a, "THM1 rhs", report.rhs
    elif figure_id in (2, 3):
        profile = EntanglementProfile(example2_state())
        bound = theorem2_lower if figure_id == 2 else theorem3_upper
        name = "THM2 rhs" if figure_id == 2 else "THM3 rhs"
        for a in alphas:
            yield a, name, bound(profile, a).rhs
    elif figure_id == 4:
        profile = EntanglementProfile(wclass_four_qubit(3 / 4, 1 / 2, math.sqrt(2) / 4, 1 / 4))
        for a in alphas:
            yield a, "y", theorem5_lower(profile, a).notes["slack_A_pairs_minus_J'_A"]
    elif figure_id == 5:
        profile = EntanglementProfile(wclass_four_qubit(3 / 4, 1 / 2, math.sqrt(2) / 4, 1 / 4))
        for a in alphas:
            report = theorem6_upper(profile, a)
            yield a, "N^alpha(AB|C1C2)", report.lhs
            yield a, "J'_A+J'_B", report.notes["J'_A"] + report.notes["J'_B"]
    else:
        raise BadInput(f"figure_id must be 1..5, got {figure_id}")


def figure_series(figure_id: int, points: int = FIGURE_POINTS) -> pl.DataFrame:
    """Long-format (alpha, series, value) data for one figure"""
    if figure_id not in FIGURE_ALPHA_RANGES:
        raise BadInput(f"figure_id must be 1..5, got {figure_id}")
    start, stop = FIGURE_ALPHA_RANGES[figure_id]
    alphas = [float(a) for a in np.linspace(start, stop, points)]
    rows = list(_figure_rows(figure_id, alphas))
    return pl.DataFrame(rows, schema={"alpha": pl.Float64, "series": pl.Utf8, "value": pl.Float64}, orient="row")


def emit_figure(figure_id: int, out: Path) -> pl.DataFrame:
    frame = figure_series(figure_id)
    _write_csv(frame, Path(out), float_precision=FIGURE_FLOAT_PRECISION)
    logger.info(f"Figure {figure_id} data ({frame.height} rows) written to {out}")
    return frame
