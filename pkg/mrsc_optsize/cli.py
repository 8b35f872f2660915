"""
Command-line front end: `mrsc run|stats|check|eval`
"""

import argparse
import csv
import re
import sys
from pathlib import Path
from typing import Dict, List, NoReturn, Optional, Sequence, TextIO, Tuple

from pydantic import BaseModel, ConfigDict, model_validator
from pydantic import ValidationError as PydanticValidationError

from . import __version__
from .config import get_config
from .engine import ensure_recursion_limit, mr_scp
from .exceptions import EmptyResultError, MRSCError, ValidationError
from .graphset import (
    Extremum,
    GraphSet,
    QueryKind,
    QuerySpec,
    SizeMeasure,
    count_graphs,
    first_graph,
    graph_size,
    graphset_depth,
    graphset_node_count,
    last_graph,
    min_max_size_graph,
    select_graphs,
    to_dot,
)
from .lang import (
    Evaluated,
    Exp,
    OutOfFuel,
    Program,
    Value,
    eval_cbn,
    parse_expression,
    parse_program,
    print_program,
)
from .logging_config import DEFAULT_LOGGING_CONFIG, configure_logging, get_logger, log_performance
from .performance import PerformanceContext
from .residual import residual_program
from .sampling import ValueSampler
from .validation import parse_query_spec, validate_env_binding, validate_non_negative

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_EMPTY = 2
EXIT_MISMATCH = 3

CORPUS_DIR = Path(__file__).parent / "corpus"
SOURCE_SUFFIX = ".scp"
NAME_HEADER_RE = re.compile(r"^--\s*name:\s*(.+?)\s*$", re.MULTILINE)

CHECK_QUERIES = (
    QuerySpec(kind=QueryKind.FIRST),
    QuerySpec(kind=QueryKind.LAST),
    QuerySpec(kind=QueryKind.MIN),
    QuerySpec(kind=QueryKind.MIN, measure=SizeMeasure.SKIP_UNFOLD),
)


class StatsRow(BaseModel):
    """Graph sizes (all nodes counted) of one example"""

    model_config = ConfigDict(frozen=True)

    example: str
    first: int
    last: int
    min: int
    max: int
    count: Optional[int] = None
    seconds: Optional[float] = None

    @model_validator(mode="after")
    def _ordered(self) -> "StatsRow":
        if not (self.min <= self.first <= self.max and self.min <= self.last <= self.max):
            raise ValueError(
                f"sizes out of order: first={self.first} last={self.last} "
                f"min={self.min} max={self.max}"
            )
        return self


class CheckReport(BaseModel):
    query: str
    trials: int = 0
    mismatches: int = 0
    skipped: int = 0


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        raise ValidationError(message, error_code="USAGE")


# ---------------------------------------------------------------------------
# Loading


def example_name(path: Path, text: str) -> str:
    m = NAME_HEADER_RE.search(text)
    return m.group(1) if m else path.stem


def load_source(path: Path, expression: Optional[str] = None) -> Tuple[Program, Exp, str]:
    """
    Read and parse a source file

    Args:
        path: Source file
        expression: Target expression overriding the file's `expression:` line

    Returns:
        Program, target expression and example name

    Raises:
        ValidationError: If the file cannot be read or has no target
    """
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ValidationError(f"Cannot read {path}: {e}", error_code="IO") from e
    program, target = parse_program(text)
    if expression is not None:
        target = parse_expression(expression, program)
    if target is None:
        raise ValidationError(
            f"{path} has no expression line and none was given with -e", error_code="TARGET"
        )
    return program, target, example_name(path, text)


def corpus_files(directory: Path) -> List[Path]:
    return sorted(p for p in directory.iterdir() if p.suffix == SOURCE_SUFFIX)


# ---------------------------------------------------------------------------
# Operations


def run_query(
    program: Program,
    target: Exp,
    query: QuerySpec,
    out: TextIO,
    dot_path: Optional[Path] = None,
    dot_graph: bool = False,
) -> int:
    """Build the graph-set once, select graphs with `query` and print their residual programs"""
    gs = mr_scp(program, target)
    total = count_graphs(gs)
    logger.info(
        f"Graph-set: {graphset_node_count(gs)} nodes, depth {graphset_depth(gs)}, {total} graphs"
    )
    graphs = select_graphs(gs, query)
    if dot_path is not None:
        dot_path.write_text(to_dot(graphs[0] if dot_graph and graphs else gs), encoding="utf-8")
    if not graphs:
        raise EmptyResultError(f"No configuration graph for query {query}")

    out.write(f"-- {total} graphs in the graph-set\n")
    for i, g in enumerate(graphs, start=1):
        residual, main = residual_program(g)
        sizes = ", ".join(f"{m.value} {graph_size(g, m)}" for m in SizeMeasure)
        out.write(f"-- result {i} ({query}): graph size {sizes}\n")
        out.write(print_program(residual, main))
    return EXIT_OK


def stats_row(name: str, gs: GraphSet, seconds: Optional[float] = None) -> StatsRow:
    first, last = first_graph(gs), last_graph(gs)
    smallest = min_max_size_graph(gs, SizeMeasure.ALL_NODES, Extremum.MIN)
    largest = min_max_size_graph(gs, SizeMeasure.ALL_NODES, Extremum.MAX)
    if first is None or last is None or smallest is None or largest is None:
        raise EmptyResultError(f"{name}: graph-set holds no graphs")
    return StatsRow(
        example=name,
        first=graph_size(first),
        last=graph_size(last),
        min=smallest[0],
        max=largest[0],
        count=count_graphs(gs),
        seconds=seconds,
    )


@log_performance(logger, "stats")
def run_stats(directory: Path, err: TextIO = sys.stderr) -> List[StatsRow]:
    """Compute one statistics row per source file, reporting failures and continuing"""
    rows: List[StatsRow] = []
    for path in corpus_files(directory):
        try:
            program, target, name = load_source(path)
            with PerformanceContext(f"stats.{name}") as perf:
                gs = mr_scp(program, target)
            row = stats_row(name, gs, perf.duration)
        except (MRSCError, PydanticValidationError) as e:
            logger.warning(f"Skipping {path.name}: {e}")
            err.write(f"{path.name}: {e}\n")
            continue
        logger.info(f"Stats row: {row.model_dump()}")
        rows.append(row)
    return rows


def format_stats_table(rows: Sequence[StatsRow]) -> str:
    header = ("Example", "First", "Last", "Min", "Max", "Count", "Time(s)")
    body = [
        (
            r.example,
            str(r.first),
            str(r.last),
            str(r.min),
            str(r.max),
            "" if r.count is None else str(r.count),
            "" if r.seconds is None else f"{r.seconds:.2f}",
        )
        for r in rows
    ]
    widths = [max(len(row[i]) for row in [header, *body]) for i in range(len(header))]
    lines = []
    for row in [header, *body]:
        cells = [row[0].ljust(widths[0]), *(c.rjust(w) for c, w in zip(row[1:], widths[1:]))]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


def write_stats_csv(rows: Sequence[StatsRow], out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["example", "first", "last", "min", "max", "count"])
    for r in rows:
        writer.writerow([r.example, r.first, r.last, r.min, r.max, r.count])


@log_performance(logger, "check")
def run_check(
    program: Program,
    target: Exp,
    samples: int,
    fuel: int,
    seed: int,
    out: TextIO,
) -> List[CheckReport]:
    """
    Compare the original program against residual programs on random inputs

    Trials where either side runs out of fuel, or where the original gets
    stuck on an input outside its domain, are skipped.
    """
    gs = mr_scp(program, target)
    reports: List[CheckReport] = []
    for query in CHECK_QUERIES:
        report = CheckReport(query=str(query))
        graphs = select_graphs(gs, query)
        if not graphs:
            raise EmptyResultError(f"No configuration graph for query {query}")
        residual, main = residual_program(graphs[0])
        sampler = ValueSampler(program, target, seed=seed)
        for _ in range(samples):
            env = sampler.sample_env()
            expected = eval_cbn(program, target, env, fuel)
            actual = eval_cbn(residual, main, env, fuel)
            if isinstance(actual, OutOfFuel) or not isinstance(expected, Evaluated):
                report.skipped += 1
                continue
            report.trials += 1
            if not isinstance(actual, Evaluated) or actual.value != expected.value:
                report.mismatches += 1
                shown = ", ".join(f"{k}={v}" for k, v in env.items())
                out.write(f"mismatch in {query}: {shown}: original {expected.value}, residual {actual}\n")
        if report.skipped:
            logger.warning(f"{query}: {report.skipped} trials skipped")
        reports.append(report)
        out.write(
            f"{report.query}: {report.trials} trials, {report.mismatches} mismatches, "
            f"{report.skipped} skipped\n"
        )
    if samples == 0:
        out.write("0 trials requested: check passes vacuously\n")
    out.write(f"seed: {seed}\n")
    return reports


# ---------------------------------------------------------------------------
# Argument handling


def build_parser() -> argparse.ArgumentParser:
    config = get_config()
    parser = _ArgumentParser(prog="mrsc", description="Multi-result supercompiler")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="log more (-vv for debug)")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    run = sub.add_parser("run", help="run a query and print residual programs")
    run.add_argument("file", type=Path)
    run.add_argument("-e", "--expression", help="target expression")
    run.add_argument("--query", default="min", help="first|last|min|max|min-skip-unfold|max-skip-unfold|enumerate:N")
    run.add_argument("--dot", type=Path, help="write the graph-set as DOT to this path")
    run.add_argument("--dot-graph", action="store_true", help="write the selected graph instead")

    stats = sub.add_parser("stats", help="graph-size statistics over a directory of examples")
    stats.add_argument("directory", type=Path, nargs="?", default=CORPUS_DIR)
    stats.add_argument("--csv", action="store_true", help="machine-readable output")

    check = sub.add_parser("check", help="compare original and residual programs on random inputs")
    check.add_argument("file", type=Path)
    check.add_argument("-e", "--expression", help="target expression")
    check.add_argument("--samples", type=int, default=config.check_samples)
    check.add_argument("--fuel", type=int, default=config.default_fuel)
    check.add_argument("--seed", type=int, default=config.seed)

    evaluate = sub.add_parser("eval", help="evaluate an expression call-by-name")
    evaluate.add_argument("file", type=Path)
    evaluate.add_argument("-e", "--expression", help="expression to evaluate")
    evaluate.add_argument("--env", nargs="*", default=[], metavar="VAR=VALUE")
    evaluate.add_argument("--fuel", type=int, default=config.default_fuel)
    return parser


def _configure_verbosity(verbose: int) -> None:
    if verbose:
        level = "DEBUG" if verbose > 1 else "INFO"
        configure_logging({**DEFAULT_LOGGING_CONFIG, "log_level": level})


def _dispatch(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    if args.command == "run":
        program, target, _ = load_source(args.file, args.expression)
        query = parse_query_spec(args.query)
        return run_query(program, target, query, out, args.dot, args.dot_graph)

    if args.command == "stats":
        if not args.directory.is_dir():
            raise ValidationError(f"Not a directory: {args.directory}", error_code="IO")
        rows = run_stats(args.directory, err)
        if args.csv:
            write_stats_csv(rows, out)
        else:
            out.write(format_stats_table(rows))
        return EXIT_OK

    if args.command == "check":
        samples = validate_non_negative("samples", args.samples)
        fuel = validate_non_negative("fuel", args.fuel)
        seed = validate_non_negative("seed", args.seed)
        program, target, _ = load_source(args.file, args.expression)
        reports = run_check(program, target, samples, fuel, seed, out)
        return EXIT_MISMATCH if any(r.mismatches for r in reports) else EXIT_OK

    program, target, _ = load_source(args.file, args.expression)
    fuel = validate_non_negative("fuel", args.fuel)
    env: Dict[str, Value] = dict(validate_env_binding(binding) for binding in args.env)
    result = eval_cbn(program, target, env, fuel)
    if isinstance(result, Evaluated):
        out.write(f"value: {result.value}\nsteps: {result.steps}\n")
        return EXIT_OK
    if isinstance(result, OutOfFuel):
        err.write(f"out of fuel after {result.steps} steps\n")
    else:
        err.write(f"stuck after {result.steps} steps: {result.reason}\n")
    return EXIT_USAGE


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point of the `mrsc` command; returns the process exit code"""
    out, err = sys.stdout, sys.stderr
    ensure_recursion_limit()
    try:
        args = build_parser().parse_args(argv)
        _configure_verbosity(args.verbose)
        return _dispatch(args, out, err)
    except EmptyResultError as e:
        err.write(f"mrsc: {e}\n")
        return EXIT_EMPTY
    except MRSCError as e:
        logger.debug("Command failed", exc_info=True)
        err.write(f"mrsc: {e}\n")
        return EXIT_USAGE
    except RecursionError:
        logger.debug("Command failed", exc_info=True)
        err.write("mrsc: input is nested too deeply\n")
        return EXIT_USAGE
