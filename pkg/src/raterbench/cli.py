"""Command-line front door binding all modules.

Subcommands: estimate, truth, simulate, sweep, summarize, cluster.
Exit codes: 0 success, 1 invalid input, 2 runtime failure. Human output is
fixed to six decimals; CSV output keeps full float precision (repr round
trip) with stable headers.
"""

import argparse
import csv
import dataclasses
import math
import os
import sys
from typing import Optional

from .clustering import agglomerate, cut, distance_matrix, newick, profiles_from_results
from .estimators import MethodId, estimate_all
from .generator import replicate_tables
from .harness import GridSpec, PERCENTILE_LEVELS, load_results, parse_grid_config, run_grid, summarize
from .inference import confidence_interval
from .tables import ContingencyTable, parse_table
from .truth import (
    Scenario,
    k_star,
    p_a_true,
    theoretical_cell_probs,
    true_k,
    true_k_reduced,
    truth_table,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2

THREADS_ENV = "RATERBENCH_THREADS"

_VOTE_AXES = ("u_pos", "u_neg", "c_pos", "c_neg")


class CliError(ValueError):
    """Invalid input detected after flag parsing; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad flags; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _seed_value(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _fmt_human(value: Optional[float]) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "undefined"
    return f"{value:.6f}"


def _fmt_csv(value: Optional[float]) -> str:
    if value is None:
        return "nan"
    return repr(float(value))


def _print_rows(rows, fmt, out=None):
    """Emit aligned columns (human) or comma-joined cells (csv)."""
    out = out or sys.stdout
    if fmt == "csv":
        for row in rows:
            print(",".join(row), file=out)
        return
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    for row in rows:
        print("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip(), file=out)


# -- estimate ---------------------------------------------------------------

def _estimate_cells(table: ContingencyTable, level: float, fmt: str):
    """Per-method report cells for one table, shared by single and batch modes."""
    fmt_value = _fmt_csv if fmt == "csv" else _fmt_human
    estimates = estimate_all(table)
    rows = []
    for method in MethodId:
        est = estimates[method]
        interval = confidence_interval(method, table, level)
        se = None if interval.variance is None else math.sqrt(interval.variance)
        corrected = est.applied_correction is not None
        if fmt == "csv":
            notes = "1" if corrected else "0"
        else:
            notes = "corrected(+0.5)" if corrected else ""
        rows.append(
            (
                method.label,
                fmt_value(est.value),
                fmt_value(se),
                fmt_value(interval.lower),
                fmt_value(interval.upper),
                interval.interval_kind,
                notes,
            )
        )
    return rows


def _read_batch(path: str):
    """Rows of (row-id, ContingencyTable) from a CSV with n11,n10,n01,n00 columns.

    Extra columns are ignored; a ``rep`` column, when present, becomes the
    row id, so simulate output feeds straight back in.
    """
    try:
        with open(path, newline="") as handle:
            reader = csv.DictReader(handle)
            fields = reader.fieldnames or []
            missing = [c for c in ("n11", "n10", "n01", "n00") if c not in fields]
            if missing:
                raise CliError(f"batch file {path!r} lacks columns: {', '.join(missing)}")
            out = []
            for index, row in enumerate(reader):
                try:
                    counts = [int(row[c]) for c in ("n11", "n10", "n01", "n00")]
                except (TypeError, ValueError):
                    raise CliError(f"bad counts in {path!r} row {index}") from None
                row_id = row.get("rep", str(index)) or str(index)
                out.append((row_id, ContingencyTable(*counts)))
    except OSError as exc:
        raise CliError(f"cannot read batch file: {exc}") from None
    if not out:
        raise CliError(f"batch file {path!r} has no data rows")
    return out


def cmd_estimate(args) -> int:
    if (args.table is None) == (args.batch is None):
        raise CliError("provide exactly one of --table or --batch")
    header = ("method", "estimate", "se", "lower", "upper", "kind", "corrected")
    if args.table is not None:
        table = parse_table(args.table)
        if args.format == "human":
            print(
                f"n11={table.n11:g} n10={table.n10:g} n01={table.n01:g} "
                f"n00={table.n00:g} total={table.total:g} level={args.ci:g}"
            )
            rows = [("method", "estimate", "se", "lower", "upper", "kind", "notes")]
        else:
            rows = [header]
        rows.extend(_estimate_cells(table, args.ci, args.format))
        _print_rows(rows, args.format)
        return EXIT_OK
    batch = _read_batch(args.batch)
    rows = [("row",) + header] if args.format == "csv" else [
        ("row", "method", "estimate", "se", "lower", "upper", "kind", "notes")
    ]
    for row_id, table in batch:
        for cells in _estimate_cells(table, args.ci, args.format):
            rows.append((row_id,) + cells)
    _print_rows(rows, args.format)
    return EXIT_OK


# -- truth ------------------------------------------------------------------

def _scenario_from_args(args) -> Scenario:
    return Scenario(args.theta, args.p1, args.p2, args.m1, args.m2, args.rhou, args.rhoc)


def cmd_truth(args) -> int:
    scenario = _scenario_from_args(args)
    table = truth_table(scenario)
    unc = table.uncertainty
    cor = table.correctness
    cells = theoretical_cell_probs(scenario)
    pa = p_a_true(scenario)
    k = true_k(scenario)
    ks = k_star(scenario)
    kr = true_k_reduced(scenario.m1, scenario.m2, scenario.rho_c)
    if args.format == "csv":
        rows = [("quantity", "value")]
        for name in ("theta", "p1", "p2", "m1", "m2", "rho_u", "rho_c"):
            rows.append((name, _fmt_csv(getattr(scenario, name))))
        for name in ("u11", "u10", "u01", "u00"):
            rows.append((name, _fmt_csv(getattr(unc, name))))
        for name in ("c11", "c10", "c01", "c00", "c1_given_2", "c2_given_1", "gamma"):
            rows.append((name, _fmt_csv(getattr(cor, name))))
        for i, row_axis in enumerate(_VOTE_AXES):
            for j, col_axis in enumerate(_VOTE_AXES):
                rows.append((f"joint_{row_axis}_{col_axis}", _fmt_csv(float(table.cells[i, j]))))
        for name, value in zip(("p11", "p10", "p01", "p00"), cells):
            rows.append((name, _fmt_csv(value)))
        rows.append(("p_a", _fmt_csv(pa)))
        rows.append(("k", _fmt_csv(k)))
        rows.append(("k_star", _fmt_csv(ks)))
        rows.append(("k_reduced", _fmt_csv(kr)))
        _print_rows(rows, "csv")
        return EXIT_OK
    print(
        f"scenario: theta={scenario.theta:g} p1={scenario.p1:g} p2={scenario.p2:g} "
        f"m1={scenario.m1:g} m2={scenario.m2:g} rho_u={scenario.rho_u:g} "
        f"rho_c={scenario.rho_c:g}"
    )
    print(
        f"uncertainty: u11={_fmt_human(unc.u11)} u10={_fmt_human(unc.u10)} "
        f"u01={_fmt_human(unc.u01)} u00={_fmt_human(unc.u00)}"
    )
    print(
        f"correctness: c11={_fmt_human(cor.c11)} c10={_fmt_human(cor.c10)} "
        f"c01={_fmt_human(cor.c01)} c00={_fmt_human(cor.c00)}"
    )
    print(
        f"conditionals: c1|2={_fmt_human(cor.c1_given_2)} "
        f"c2|1={_fmt_human(cor.c2_given_1)} gamma={_fmt_human(cor.gamma)}"
    )
    print("joint vote table (rows rater 1, cols rater 2; order U+ U- C+ C-):")
    grid = [tuple(_fmt_human(float(v)) for v in row) for row in table.cells]
    _print_rows([("",) + row for row in grid], "human")
    print(
        f"cells: p11={_fmt_human(cells.p11)} p10={_fmt_human(cells.p10)} "
        f"p01={_fmt_human(cells.p01)} p00={_fmt_human(cells.p00)} p_a={_fmt_human(pa)}"
    )
    print(f"K={_fmt_human(k)} K*={_fmt_human(ks)} K_reduced={_fmt_human(kr)}")
    return EXIT_OK


# -- simulate ---------------------------------------------------------------

def cmd_simulate(args) -> int:
    scenario = _scenario_from_args(args)
    counts = replicate_tables(scenario, args.n, args.reps, args.seed, args.setting)
    rows = [("rep", "n11", "n10", "n01", "n00")]
    for rep, (n11, n10, n01, n00) in enumerate(counts):
        rows.append((str(rep), str(int(n11)), str(int(n10)), str(int(n01)), str(int(n00))))
    if args.out is None:
        _print_rows(rows, args.format)
        return EXIT_OK
    with open(args.out, "w", newline="") as handle:
        _print_rows(rows, args.format, out=handle)
    return EXIT_OK


# -- sweep ------------------------------------------------------------------

def _resolve_threads(flag_value: Optional[int]) -> int:
    """Explicit --threads wins; otherwise the environment override; else 1."""
    if flag_value is not None:
        return flag_value
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise CliError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise CliError(f"{THREADS_ENV} must be a positive integer, got {value}")
    return value


def _load_grid(path: Optional[str]) -> GridSpec:
    if path is None:
        return GridSpec()
    try:
        with open(path) as handle:
            text = handle.read()
    except OSError as exc:
        raise CliError(f"cannot read grid config: {exc}") from None
    return parse_grid_config(text)


def cmd_sweep(args) -> int:
    grid = _load_grid(args.grid)
    if args.dry_run:
        print(grid.count)
        return EXIT_OK
    if args.out is None:
        raise CliError("--out is required unless --dry-run")
    if args.seed is None:
        raise CliError("--seed is required unless --dry-run")
    grid = dataclasses.replace(
        grid, master_seed=args.seed, threads=_resolve_threads(args.threads)
    )
    progress = None
    if args.progress:
        step = max(1, grid.count // 100)

        def progress(done, total, _step=step):
            if done % _step == 0 or done == total:
                print(f"progress {done}/{total}", file=sys.stderr)

    try:
        written = run_grid(grid, args.out, progress=progress)
    except KeyboardInterrupt:
        print("interrupted; completed settings are preserved in the checkpoint", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"{written} new settings written ({grid.count} total) -> {args.out}", file=sys.stderr)
    return EXIT_OK


# -- summarize --------------------------------------------------------------

def _parse_filters(specs) -> Optional[dict]:
    if not specs:
        return None
    where = {}
    for spec in specs:
        key, sep, raw = spec.partition("=")
        key = key.strip()
        if not sep or not key or not raw.strip():
            raise CliError(f"filter must look like column=v1,v2 got {spec!r}")
        try:
            values = tuple(float(part) for part in raw.split(","))
        except ValueError:
            raise CliError(f"filter values must be numeric, got {spec!r}") from None
        if key in where:
            raise CliError(f"duplicate filter column {key!r}")
        where[key] = values
    return where


def _load_rows(path: str):
    try:
        return load_results(path)
    except OSError as exc:
        raise CliError(f"cannot read results: {exc}") from None


def cmd_summarize(args) -> int:
    rows = _load_rows(args.infile)
    summary = summarize(rows, metric=args.metric, where=_parse_filters(args.filter))
    fmt_value = _fmt_csv if args.format == "csv" else _fmt_human
    header = ("method",) + tuple(f"p{level:g}" for level in PERCENTILE_LEVELS)
    if args.format == "human":
        print(f"metric={summary.metric} settings={summary.n_settings}")
    out_rows = [header]
    for method in MethodId:
        quartiles = summary.per_method[method.label]
        if quartiles is None:
            out_rows.append((method.label,) + (fmt_value(None),) * len(PERCENTILE_LEVELS))
        else:
            out_rows.append((method.label,) + tuple(fmt_value(q) for q in quartiles))
    _print_rows(out_rows, args.format)
    return EXIT_OK


# -- cluster ----------------------------------------------------------------

def cmd_cluster(args) -> int:
    rows = _load_rows(args.infile)
    profiles, dropped = profiles_from_results(rows)
    if dropped:
        print(f"note: dropped {dropped} settings with undefined values", file=sys.stderr)
    labels = [profile.label for profile in profiles]
    dendrogram = agglomerate(distance_matrix(profiles), labels)
    clusters = cut(dendrogram, args.k)
    if args.format == "csv":
        out_rows = [("cluster", "label")]
        for index, members in enumerate(clusters, start=1):
            out_rows.extend((str(index), label) for label in members)
        _print_rows(out_rows, "csv")
    else:
        for index, members in enumerate(clusters, start=1):
            print(f"cluster {index}: {' '.join(members)}")
    if args.merges_out is not None:
        with open(args.merges_out, "w", newline="") as handle:
            print("left,right,height", file=handle)
            for left, right, height, _ in dendrogram.merges:
                print(f"{left},{right},{_fmt_csv(height)}", file=handle)
    if args.newick:
        print(newick(dendrogram))
    return EXIT_OK


# -- wiring -----------------------------------------------------------------

def _add_format_flag(parser, default="human"):
    parser.add_argument(
        "--format",
        choices=("human", "csv"),
        default=default,
        help="human-readable (6 decimals) or machine CSV (full precision)",
    )


def _add_scenario_flags(parser):
    parser.add_argument("--theta", type=float, required=True, help="prevalence of the positive state")
    parser.add_argument("--p1", type=float, required=True, help="rater 1 uncertainty probability")
    parser.add_argument("--p2", type=float, required=True, help="rater 2 uncertainty probability")
    parser.add_argument("--m1", type=float, required=True, help="rater 1 error probability when certain")
    parser.add_argument("--m2", type=float, required=True, help="rater 2 error probability when certain")
    parser.add_argument("--rhou", type=float, default=0.0, help="uncertainty correlation (default 0)")
    parser.add_argument("--rhoc", type=float, default=0.0, help="correctness correlation (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="raterbench",
        description="Agreement statistics, their sampling theory, and the simulation benchmark.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p_estimate = sub.add_parser(
        "estimate", help="all ten statistics with variances and intervals on 2x2 tables"
    )
    p_estimate.add_argument("--table", help='cell counts "n11,n10,n01,n00"')
    p_estimate.add_argument("--batch", help="CSV file with n11,n10,n01,n00 columns")
    p_estimate.add_argument("--ci", type=float, default=0.95, help="confidence level (default 0.95)")
    _add_format_flag(p_estimate)
    p_estimate.set_defaults(func=cmd_estimate)

    p_truth = sub.add_parser(
        "truth", help="population quantities for one scenario: cells, gamma, K, K*"
    )
    _add_scenario_flags(p_truth)
    _add_format_flag(p_truth)
    p_truth.set_defaults(func=cmd_truth)

    p_simulate = sub.add_parser("simulate", help="draw replicate 2x2 tables for one scenario")
    _add_scenario_flags(p_simulate)
    p_simulate.add_argument("--n", type=_positive_int, required=True, help="subjects per table")
    p_simulate.add_argument("--reps", type=_positive_int, default=1, help="number of tables (default 1)")
    p_simulate.add_argument("--seed", type=_seed_value, required=True, help="master seed (u64)")
    p_simulate.add_argument(
        "--setting", type=int, default=0, help="setting index for the stream (default 0)"
    )
    p_simulate.add_argument("--out", help="write CSV here instead of stdout")
    _add_format_flag(p_simulate, default="csv")
    p_simulate.set_defaults(func=cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="run a simulation grid with checkpointing")
    p_sweep.add_argument("--grid", help="grid config file (key=comma-list; defaults to the full grid)")
    p_sweep.add_argument("--out", help="checkpoint CSV path")
    p_sweep.add_argument("--seed", type=_seed_value, help="master seed (u64)")
    p_sweep.add_argument(
        "--threads",
        type=_positive_int,
        help=f"worker processes (default: ${THREADS_ENV} or 1)",
    )
    p_sweep.add_argument("--dry-run", action="store_true", help="print the setting count and exit")
    p_sweep.add_argument("--progress", action="store_true", help="report progress on stderr")
    _add_format_flag(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_summarize = sub.add_parser("summarize", help="five-number summaries over a sweep result")
    p_summarize.add_argument("--in", dest="infile", required=True, help="sweep checkpoint CSV")
    p_summarize.add_argument(
        "--metric", choices=("bias", "coverage"), default="bias", help="summarized column family"
    )
    p_summarize.add_argument(
        "--filter",
        action="append",
        default=[],
        metavar="COL=V1,V2",
        help='restrict settings, e.g. --filter "theta=0.1,0.9" (repeatable)',
    )
    _add_format_flag(p_summarize)
    p_summarize.set_defaults(func=cmd_summarize)

    p_cluster = sub.add_parser("cluster", help="average-linkage clustering of method profiles")
    p_cluster.add_argument("--in", dest="infile", required=True, help="sweep checkpoint CSV")
    p_cluster.add_argument("--k", type=_positive_int, default=3, help="number of clusters (default 3)")
    p_cluster.add_argument("--merges-out", help="write the merge list CSV (left,right,height) here")
    p_cluster.add_argument("--newick", action="store_true", help="also print a Newick tree string")
    _add_format_flag(p_cluster)
    p_cluster.set_defaults(func=cmd_cluster)

    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except (CliError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
