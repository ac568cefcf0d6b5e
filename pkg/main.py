"""
qmono command line

Subcommands:
    measure    evaluate one entanglement measure of a state
    check      evaluate one inequality on one state
    verify     run a randomized verification campaign
    reproduce  write the data of one example figure
    sample     write a Haar-random state file

Exit codes: 0 ok / holds, 1 inequality violated, 2 usage error,
3 numerical or IO failure, 4 inequality precondition not met.
"""

import functools
import logging
import sys
from pathlib import Path
from typing import Dict, Optional, Tuple

import click
import coloredlogs
from dotenv import load_dotenv
from pydantic import ValidationError

from errors import BadInput, QMonoError
from harness import CampaignConfig, emit_figure, run_campaign
from measures import MeasureKind, measure
from monogamy import InequalityId, InequalityReport, evaluate, lemma1_check
from qstate import Bipartition, BlockGrouping, State, load_state, parse_labels, save_state, state_to_json
from states import haar_random_pure, parse_recipe, random_mixed

logger = logging.getLogger(__name__)

# --- Settings ---
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
VALUE_FORMAT = ".12g"

EXIT_VIOLATED = 1
EXIT_PRECONDITION = 4


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, VALUE_FORMAT)
    return str(value)


def handle_errors(func):
    """Map toolkit errors to their exit codes"""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except QMonoError as e:
            click.echo(f"Error: {e}", err=True)
            sys.exit(e.exit_code)
    return wrapper


def _parse(hint: str, parser, text: str):
    try:
        return parser(text)
    except QMonoError as e:
        raise click.BadParameter(str(e), param_hint=hint) from None


def _load_source(state_path: Optional[Path], recipe: Optional[str]) -> State:
    if (state_path is None) == (recipe is None):
        raise click.UsageError("Give exactly one of --state or --recipe")
    if recipe is not None:
        recipe_obj = _parse("--recipe", parse_recipe, recipe)
        return recipe_obj.build()
    return load_state(state_path)


def _parse_parties(text: str) -> Tuple[int, ...]:
    _parse("--parties", parse_labels, text)
    # parse_labels sorts; keep the given A, B, C1 order
    return tuple(int(tok) for tok in text.split(",") if tok.strip())


def _parse_groupings(parties: Tuple[int, ...], specs: Tuple[Optional[str], ...]) -> Dict[int, BlockGrouping]:
    out = {}
    for flag, focus, spec in zip(("--blocks", "--blocks-b", "--blocks-c"), parties, specs):
        if spec:
            out[focus] = _parse(flag, lambda s: BlockGrouping.parse(focus, s), spec)
    return out


def _parse_alpha_grid(text: str) -> Tuple[float, float, int]:
    parts = text.split(":")
    try:
        if len(parts) != 3:
            raise ValueError
        return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise click.BadParameter(f"'{text}' is not START:STOP:POINTS", param_hint="--alpha-grid") from None


def _echo_report(report: InequalityReport) -> None:
    rows = [
        ("inequality", report.inequality_id.value),
        ("alpha", report.alpha),
        ("lhs", report.lhs),
        ("rhs", report.rhs),
        ("slack", report.slack),
        ("holds", report.holds),
        ("precondition", report.precondition_met),
    ]
    if report.ordering:
        rows.append(("ordering", report.ordering))
    rows.extend(sorted(report.notes.items()))
    width = max(len(k) for k, _ in rows)
    for key, value in rows:
        click.echo(f"{key.ljust(width)}  {_fmt(value)}")


state_option = click.option("--state", "state_path", type=click.Path(path_type=Path), help="JSON state file")
recipe_option = click.option("--recipe", help="State recipe, e.g. 'example2' or 'gsd3:l0,l1,l2,l3,l4,phi'")


@click.group()
@click.option("--verbose", "-v", is_flag=True, help="Debug logging")
def cli(verbose: bool):
    """Monogamy and polygamy checks for multiqubit entanglement"""
    load_dotenv()
    coloredlogs.install(level=logging.DEBUG if verbose else logging.INFO, fmt=LOG_FORMAT, stream=sys.stderr)


@cli.command("measure")
@state_option
@recipe_option
@click.option("--measure", "kind", required=True, type=click.Choice([k.value for k in MeasureKind]))
@click.option("--cut", help="Bipartition such as '0,1|2,3'")
@click.option("--pair", help="Qubit pair such as '0,2'")
@handle_errors
def measure_cmd(state_path, recipe, kind, cut, pair):
    """Print one entanglement measure"""
    source = _load_source(state_path, recipe)
    cut_obj = _parse("--cut", Bipartition.parse, cut) if cut else None
    pair_labels = _parse("--pair", parse_labels, pair) if pair else None
    if pair_labels is not None and len(pair_labels) != 2:
        raise click.BadParameter("a pair needs exactly two labels", param_hint="--pair")
    value = measure(source, kind, cut=cut_obj, pair=pair_labels)
    click.echo(format(value.value, VALUE_FORMAT))


@cli.command("check")
@state_option
@recipe_option
@click.option("--inequality", "inequality_id", required=True, type=click.Choice([i.value for i in InequalityId]))
@click.option("--alpha", type=float, default=2.0, show_default=True)
@click.option("--parties", default="0,1,2", show_default=True, help="Labels of A, B, C1 (A is the focus)")
@click.option("--blocks", help="Block grouping of A's partners, e.g. '1,2|3'")
@click.option("--blocks-b", help="Block grouping of B's partners")
@click.option("--blocks-c", help="Block grouping of C1's partners")
@click.option("--tol", type=float, default=1e-9, show_default=True)
@click.option("--x", type=float, help="LEMMA1 only")
@click.option("--y", type=float, help="LEMMA1 only")
@handle_errors
def check_cmd(state_path, recipe, inequality_id, alpha, parties, blocks, blocks_b, blocks_c, tol, x, y):
    """Evaluate one inequality; exit 0 holds, 1 violated, 4 precondition not met"""
    inequality_id = InequalityId(inequality_id)
    if inequality_id is InequalityId.LEMMA1:
        if x is None or y is None:
            raise click.UsageError("LEMMA1 needs --x and --y")
        reports = lemma1_check(x, y, alpha, tol)
        for report in reports:
            _echo_report(report)
        sys.exit(0 if all(r.holds for r in reports) else EXIT_VIOLATED)

    source = _load_source(state_path, recipe)
    party_labels = _parse_parties(parties)
    groupings = _parse_groupings(party_labels, (blocks, blocks_b, blocks_c))
    report = evaluate(inequality_id, source, alpha, groupings, party_labels, tol)
    _echo_report(report)
    if not report.precondition_met:
        logger.warning(f"{inequality_id.value}: precondition not met ({report.notes})")
        sys.exit(EXIT_PRECONDITION)
    sys.exit(0 if report.holds else EXIT_VIOLATED)


@cli.command("verify")
@click.option("--inequality", "inequality_id", required=True, type=click.Choice([i.value for i in InequalityId]))
@click.option("--n", "n_qubits", type=int, default=4, show_default=True)
@click.option("--samples", type=int, default=100, show_default=True)
@click.option("--alpha-grid", help="START:STOP:POINTS (default: whole validity range)")
@click.option("--seed", type=int, default=0, envvar="QMONO_SEED", show_default=True)
@click.option("--tol", type=float, default=1e-8, show_default=True)
@click.option("--parties", default="0,1,2", show_default=True)
@click.option("--blocks")
@click.option("--blocks-b")
@click.option("--blocks-c")
@click.option("--recipe", help="Fixed state recipe instead of Haar sampling")
@click.option("--split", type=int, help="Sample independent Haar states on qubits 0..K-1 and K..N-1")
@click.option("--auto-grouping/--singletons", default=True, show_default=True,
              help="Fall back to the finest block grouping with a valid order")
@click.option("--jobs", "n_jobs", type=int, default=1, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), help="CSV of every report row")
@click.option("--json", "as_json", is_flag=True, help="Print the summary as JSON")
@handle_errors
def verify_cmd(inequality_id, n_qubits, samples, alpha_grid, seed, tol, parties, blocks, blocks_b, blocks_c,
               recipe, split, auto_grouping, n_jobs, out, as_json):
    """Randomized verification campaign; exit 1 on any violation"""
    party_labels = _parse_parties(parties)
    if len(party_labels) != 3:
        raise click.BadParameter("give three labels A,B,C1", param_hint="--parties")
    try:
        config = CampaignConfig(
            inequality_id=inequality_id,
            n_qubits=n_qubits,
            samples=samples,
            alpha_grid=_parse_alpha_grid(alpha_grid) if alpha_grid else None,
            seed=seed,
            tol=tol,
            grouping=blocks,
            grouping_b=blocks_b,
            grouping_c=blocks_c,
            parties=party_labels,
            output=out,
            n_jobs=n_jobs,
            recipe=recipe,
            split=split,
            auto_grouping=auto_grouping,
            progress=True,
        )
    except ValidationError as e:
        raise click.UsageError(f"Invalid campaign: {e.errors()[0]['msg']}") from None
    summary, _ = run_campaign(config)
    click.echo(summary.model_dump_json(indent=2) if as_json else summary.table())
    sys.exit(EXIT_VIOLATED if summary.violations else 0)


@cli.command("reproduce")
@click.option("--figure", "figure_id", required=True, type=click.IntRange(1, 5))
@click.option("--out", required=True, type=click.Path(path_type=Path))
@handle_errors
def reproduce_cmd(figure_id, out):
    """Write the long-format CSV (alpha, series, value) of one figure"""
    frame = emit_figure(figure_id, out)
    click.echo(f"{frame.height} rows written to {out}")


@cli.command("sample")
@click.option("--n", "n_qubits", type=int, required=True)
@click.option("--seed", type=int, default=0, envvar="QMONO_SEED", show_default=True)
@click.option("--rank", type=int, help="Write a random mixed state of this rank instead")
@click.option("--out", type=click.Path(path_type=Path), help="Output file (default: stdout)")
@handle_errors
def sample_cmd(n_qubits, seed, rank, out):
    """Write a seeded random state as JSON"""
    if seed < 0:
        raise BadInput(f"--seed must be non-negative, got {seed}")
    state = random_mixed(n_qubits, rank, seed) if rank else haar_random_pure(n_qubits, seed)
    if out is None:
        click.echo(state_to_json(state))
    else:
        save_state(state, out)


def main():
    cli(prog_name="qmono")


if __name__ == "__main__":
    main()
