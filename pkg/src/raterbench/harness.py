"""Monte Carlo evaluation harness.

One *setting* is a scenario plus a study size. For each setting the harness
simulates ``reps`` tables (one counter-based stream per replicate), runs every
agreement method with its 95% interval, and aggregates bias and coverage
against the benchmark value K. A replicate contributes to a method's mean,
bias, and coverage only when both the point estimate and the interval are
defined; otherwise it increments that method's undefined count, so bias and
coverage always describe the same replicate set.

Sweeps are checkpointed to CSV with a fixed column order (scenario fields, N,
K, then bias/coverage/undefined per method), one row per setting in grid
order, floats serialized with ``repr`` so files are byte-reproducible at any
worker count. An interrupted sweep resumes by row count: completed rows are
never recomputed, and the remaining settings regenerate identically because
every replicate's stream is keyed by (master seed, setting index, replicate).
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Iterator, Mapping, NamedTuple, Optional, Tuple

import numpy as np

from .estimators import MethodId, _method_values
from .generator import replicate_tables
from .inference import interval_values
from .truth import Scenario, true_k

__all__ = [
    "GridSpec",
    "MethodStats",
    "SettingSummary",
    "PercentileSummary",
    "PERCENTILE_LEVELS",
    "CSV_COLUMNS",
    "run_setting",
    "run_grid",
    "load_results",
    "summarize",
    "parse_grid_config",
]

PERCENTILE_LEVELS = (2.5, 25.0, 50.0, 75.0, 97.5)

_SCENARIO_COLUMNS = ("theta", "p1", "p2", "m1", "m2", "rho_u", "rho_c", "n")

CSV_COLUMNS = _SCENARIO_COLUMNS + ("true_k",) + tuple(
    f"{method.label}_{stat}"
    for method in MethodId
    for stat in ("bias", "coverage", "undefined")
)

_INT_COLUMNS = frozenset(("n",)) | frozenset(
    f"{method.label}_undefined" for method in MethodId
)


def _validated_values(name, values, low, high, *, open_low=False, open_high=False):
    out = tuple(float(v) for v in values)
    if not out:
        raise ValueError(f"{name} needs at least one value")
    for v in out:
        below = v <= low if open_low else v < low
        above = v >= high if open_high else v > high
        if below or above:
            raise ValueError(f"{name} value {v!r} out of range")
    return out


@dataclass(frozen=True)
class GridSpec:
    """A sweep definition; the defaults are the full evaluation grid
    (9 x 5 x 5 x 5 x 5 x 5 x 5 x 4 = 562,500 settings at 1000 replicates)."""

    theta: Tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    p1: Tuple[float, ...] = (0.1, 0.3, 0.5, 0.7, 0.9)
    p2: Tuple[float, ...] = (0.1, 0.3, 0.5, 0.7, 0.9)
    m1: Tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5)
    m2: Tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5)
    rho_u: Tuple[float, ...] = (0.1, 0.3, 0.5, 0.7, 0.9)
    rho_c: Tuple[float, ...] = (0.1, 0.3, 0.5, 0.7, 0.9)
    n_subjects: Tuple[int, ...] = (25, 50, 100, 200)
    reps: int = 1000
    master_seed: Optional[int] = None
    threads: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta", _validated_values(
            "theta", self.theta, 0.0, 1.0, open_low=True, open_high=True))
        object.__setattr__(self, "p1", _validated_values("p1", self.p1, 0.0, 1.0))
        object.__setattr__(self, "p2", _validated_values("p2", self.p2, 0.0, 1.0))
        object.__setattr__(self, "m1", _validated_values("m1", self.m1, 0.0, 0.5))
        object.__setattr__(self, "m2", _validated_values("m2", self.m2, 0.0, 0.5))
        object.__setattr__(self, "rho_u", _validated_values(
            "rho_u", self.rho_u, 0.0, 1.0, open_high=True))
        object.__setattr__(self, "rho_c", _validated_values(
            "rho_c", self.rho_c, 0.0, 1.0, open_high=True))
        n_out = tuple(int(n) for n in self.n_subjects)
        if not n_out or any(n < 1 for n in n_out):
            raise ValueError("n_subjects must be a nonempty list of sizes >= 1")
        object.__setattr__(self, "n_subjects", n_out)
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps!r}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads!r}")
        if self.master_seed is not None and self.master_seed < 0:
            raise ValueError("master_seed must be nonnegative")

    @property
    def count(self) -> int:
        """Number of settings the grid enumerates."""
        return (
            len(self.theta) * len(self.p1) * len(self.p2) * len(self.m1)
            * len(self.m2) * len(self.rho_u) * len(self.rho_c)
            * len(self.n_subjects)
        )

    def settings(self) -> Iterator[Tuple[int, Scenario, int]]:
        """Yield (setting_index, scenario, n_subjects) in grid order.

        The loop nests theta > p1 > p2 > m1 > m2 > rho_u > rho_c > N with the
        rightmost axis fastest; the index feeds the replicate stream counters,
        so this order is part of the reproducibility contract.
        """
        axes = (self.theta, self.p1, self.p2, self.m1, self.m2,
                self.rho_u, self.rho_c, self.n_subjects)
        for index, (theta, p1, p2, m1, m2, rho_u, rho_c, n) in enumerate(
            itertools.product(*axes)
        ):
            yield index, Scenario(theta, p1, p2, m1, m2, rho_u, rho_c), n

    @classmethod
    def reduced(cls, **overrides) -> "GridSpec":
        """Three-level pilot grid (4374 settings at 300 replicates)."""
        base = dict(
            theta=(0.1, 0.5, 0.9),
            p1=(0.1, 0.5, 0.9),
            p2=(0.1, 0.5, 0.9),
            m1=(0.1, 0.3, 0.5),
            m2=(0.1, 0.3, 0.5),
            rho_u=(0.1, 0.5, 0.9),
            rho_c=(0.1, 0.5, 0.9),
            n_subjects=(50, 200),
            reps=300,
        )
        base.update(overrides)
        return cls(**base)


class MethodStats(NamedTuple):
    """One method's aggregate over a setting's defined replicates."""

    mean: Optional[float]
    bias: Optional[float]
    coverage: Optional[float]
    n_undefined: int
    n_corrected: int


@dataclass(frozen=True)
class SettingSummary:
    """Per-setting Monte Carlo aggregates for all methods."""

    scenario: Scenario
    n_subjects: int
    reps: int
    true_k: Optional[float]
    methods: Dict[MethodId, MethodStats]


def run_setting(
    scenario: Scenario,
    n_subjects: int,
    reps: int,
    master_seed: int,
    setting_index: int = 0,
) -> SettingSummary:
    """Simulate one setting and aggregate every method against K."""
    tables = replicate_tables(scenario, n_subjects, reps, master_seed, setting_index)
    a = tables[:, 0].astype(np.float64)
    b = tables[:, 1].astype(np.float64)
    c = tables[:, 2].astype(np.float64)
    d = tables[:, 3].astype(np.float64)
    k = true_k(scenario)
    stats: Dict[MethodId, MethodStats] = {}
    for method in MethodId:
        values, corrected_mask = _method_values(method, a, b, c, d)
        lower, upper = interval_values(method, a, b, c, d, level=0.95)
        defined = np.isfinite(values) & np.isfinite(lower) & np.isfinite(upper)
        n_undefined = int(reps - defined.sum())
        n_corrected = int(corrected_mask.sum()) if corrected_mask is not None else 0
        if defined.any():
            mean = float(values[defined].mean())
            bias = mean - k if k is not None else None
            if k is not None:
                covered = (lower[defined] <= k) & (k <= upper[defined])
                coverage = float(covered.mean())
            else:
                coverage = None
        else:
            mean = bias = coverage = None
        stats[method] = MethodStats(mean, bias, coverage, n_undefined, n_corrected)
    return SettingSummary(scenario, n_subjects, reps, k, stats)


def _fmt(value) -> str:
    if value is None:
        return "nan"
    return repr(float(value))


def summary_row(summary: SettingSummary) -> str:
    """Serialize one SettingSummary as its checkpoint CSV line."""
    sc = summary.scenario
    parts = [
        repr(sc.theta), repr(sc.p1), repr(sc.p2), repr(sc.m1), repr(sc.m2),
        repr(sc.rho_u), repr(sc.rho_c), str(summary.n_subjects),
        _fmt(summary.true_k),
    ]
    for method in MethodId:
        stat = summary.methods[method]
        parts.append(_fmt(stat.bias))
        parts.append(_fmt(stat.coverage))
        parts.append(str(stat.n_undefined))
    return ",".join(parts)


def _setting_task(args) -> str:
    (theta, p1, p2, m1, m2, rho_u, rho_c, n, reps, master_seed, index) = args
    scenario = Scenario(theta, p1, p2, m1, m2, rho_u, rho_c)
    return summary_row(run_setting(scenario, n, reps, master_seed, index))


def _resume_offset(path: str) -> int:
    """Rows already checkpointed; validates the header and a complete tail."""
    if not os.path.exists(path) or os.path.getsize(path) == 0:
        return -1  # no file yet: header still to be written
    with open(path, "r", encoding="utf-8", newline="") as fh:
        content = fh.read()
    if not content.endswith("\n"):
        raise ValueError(
            f"checkpoint {path!r} ends mid-row; delete the partial last line to resume"
        )
    lines = content.splitlines()
    if lines[0] != ",".join(CSV_COLUMNS):
        raise ValueError(f"checkpoint {path!r} has an unexpected header")
    return len(lines) - 1


def run_grid(
    grid: GridSpec,
    out_path: str,
    progress: Optional[Callable[[int, int], None]] = None,
) -> int:
    """Run (or resume) a sweep, appending one CSV row per setting.

    Returns the number of rows computed by this call. Output bytes are
    identical at any thread count and across resume splits.
    """
    if grid.master_seed is None:
        raise ValueError("grid.master_seed is required to run a sweep")
    total = grid.count
    done = _resume_offset(out_path)
    if done > total:
        raise ValueError(
            f"checkpoint {out_path!r} has {done} rows but the grid has {total} settings"
        )
    tasks = (
        (sc.theta, sc.p1, sc.p2, sc.m1, sc.m2, sc.rho_u, sc.rho_c,
         n, grid.reps, grid.master_seed, index)
        for index, sc, n in grid.settings()
        if index >= max(done, 0)
    )
    written = 0
    with open(out_path, "a", encoding="utf-8", newline="") as fh:
        if done < 0:
            fh.write(",".join(CSV_COLUMNS) + "\n")
            fh.flush()
            done = 0
        if grid.threads == 1:
            rows: Iterable[str] = map(_setting_task, tasks)
            for row in rows:
                fh.write(row + "\n")
                fh.flush()
                written += 1
                if progress is not None:
                    progress(done + written, total)
        else:
            chunk = max(1, min(64, total // (grid.threads * 4) or 1))
            with ProcessPoolExecutor(max_workers=grid.threads) as pool:
                for row in pool.map(_setting_task, tasks, chunksize=chunk):
                    fh.write(row + "\n")
                    fh.flush()
                    written += 1
                    if progress is not None:
                        progress(done + written, total)
    return written


def load_results(path: str):
    """Read a checkpoint CSV back into a list of per-setting dicts."""
    import csv

    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != CSV_COLUMNS:
            raise ValueError(f"{path!r} is not a sweep checkpoint (bad header)")
        rows = []
        for record in reader:
            row = {}
            for key, text in record.items():
                row[key] = int(text) if key in _INT_COLUMNS else float(text)
            rows.append(row)
    return rows


@dataclass(frozen=True)
class PercentileSummary:
    """Five-number summaries (2.5/25/50/75/97.5 percentiles) per method."""

    metric: str
    n_settings: int
    per_method: Dict[str, Optional[Tuple[float, float, float, float, float]]]


def summarize(
    rows,
    metric: str = "bias",
    where: Optional[Mapping[str, Iterable[float]]] = None,
) -> PercentileSummary:
    """Percentile summary of per-setting bias or coverage across settings.

    ``where`` restricts to settings whose scenario column values appear in
    the given collections, e.g. ``{"theta": [0.1, 0.9], "n": [200]}``.
    """
    if metric not in ("bias", "coverage"):
        raise ValueError(f"metric must be 'bias' or 'coverage', got {metric!r}")
    filters = {}
    for key, values in (where or {}).items():
        if key not in _SCENARIO_COLUMNS:
            raise ValueError(f"unknown filter column {key!r}")
        filters[key] = {float(v) for v in values}
    selected = [
        row
        for row in rows
        if all(row[key] in accepted for key, accepted in filters.items())
    ]
    if not selected:
        raise ValueError("no settings match the filter")
    per_method: Dict[str, Optional[Tuple[float, ...]]] = {}
    for method in MethodId:
        column = f"{method.label}_{metric}"
        values = np.array([row[column] for row in selected], dtype=float)
        values = values[np.isfinite(values)]
        if values.size == 0:
            per_method[method.label] = None
        else:
            qs = np.percentile(values, PERCENTILE_LEVELS)
            per_method[method.label] = tuple(float(q) for q in qs)
    return PercentileSummary(metric, len(selected), per_method)


_CONFIG_LIST_KEYS = {
    "theta": ("theta",),
    "p1": ("p1",),
    "p2": ("p2",),
    "p": ("p1", "p2"),
    "m1": ("m1",),
    "m2": ("m2",),
    "m": ("m1", "m2"),
    "rho_u": ("rho_u",),
    "rho_c": ("rho_c",),
    "rho": ("rho_u", "rho_c"),
    "n": ("n_subjects",),
}


def parse_grid_config(text: str) -> GridSpec:
    """Build a GridSpec from the flat ``key = v1, v2, ...`` config format.

    Known keys: theta, p1, p2, m1, m2, rho_u, rho_c, n, reps, and the
    pair shorthands p, m, rho. Omitted keys keep the full-grid defaults;
    ``#`` starts a comment.
    """
    fields: Dict[str, object] = {}
    assigned = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = values', got {raw!r}")
        key, _, value_text = line.partition("=")
        key = key.strip().lower()
        values = [v.strip() for v in value_text.split(",") if v.strip()]
        if not values:
            raise ValueError(f"line {lineno}: no values for {key!r}")
        if key == "reps":
            if len(values) != 1:
                raise ValueError(f"line {lineno}: reps takes a single integer")
            targets = ("reps",)
            parsed: object = int(values[0])
        elif key in _CONFIG_LIST_KEYS:
            targets = _CONFIG_LIST_KEYS[key]
            if key == "n":
                parsed = tuple(int(v) for v in values)
            else:
                parsed = tuple(float(v) for v in values)
        else:
            raise ValueError(f"line {lineno}: unknown grid key {key!r}")
        for target in targets:
            if target in assigned:
                raise ValueError(f"line {lineno}: {target!r} assigned twice")
            assigned.add(target)
            fields[target] = parsed
    return GridSpec(**fields)
