"""End-to-end tests for the command-line interface.

Every test drives ``main(argv)`` in process and checks stdout/stderr text,
exit codes, and bit-exact agreement with the library calls the commands wrap.
"""

import csv
import io
import math

import numpy as np
import pytest

from raterbench import cli
from raterbench.cli import main
from raterbench.estimators import MethodId, estimate_all
from raterbench.generator import replicate_tables
from raterbench.harness import GridSpec, load_results, parse_grid_config, summarize
from raterbench.inference import confidence_interval
from raterbench.tables import ContingencyTable
from raterbench.truth import Scenario

SCENARIO_FLAGS = [
    "--theta", "0.5", "--p1", "0.5", "--p2", "0.5",
    "--m1", "0.3", "--m2", "0.3", "--rhou", "0.5", "--rhoc", "0.5",
]

GRID_TEXT = "theta = 0.3, 0.7\np = 0.5\nm = 0.3\nrho = 0.5\nn = 30\nreps = 40\n"


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture(scope="module")
def sweep_csv(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli_sweep")
    grid_path = root / "grid.cfg"
    grid_path.write_text(GRID_TEXT)
    out_path = root / "results.csv"
    code = main(["sweep", "--grid", str(grid_path), "--out", str(out_path), "--seed", "99"])
    assert code == 0
    return out_path


class TestTopLevel:
    def test_help_exits_zero(self, capsys):
        code, out, _ = run_cli(capsys, "--help")
        assert code == 0
        assert "usage" in out

    def test_missing_subcommand(self, capsys):
        code, _, err = run_cli(capsys)
        assert code == 1
        assert "error" in err

    def test_unknown_flag(self, capsys):
        code, _, err = run_cli(capsys, "estimate", "--bogus")
        assert code == 1
        assert "error" in err


class TestEstimate:
    def test_worked_example_human(self, capsys):
        code, out, _ = run_cli(capsys, "estimate", "--table", "40,5,15,40")
        assert code == 0
        by_method = {line.split()[0]: line.split() for line in out.splitlines()[2:]}
        assert by_method["kappa"][1] == "0.603960"
        assert by_method["pa"][1] == "0.800000"
        assert by_method["Y"][5] == "bonett-tanh"

    def test_perfect_agreement_all_ones(self, capsys):
        code, out, _ = run_cli(capsys, "estimate", "--table", "10,0,0,10")
        assert code == 0
        data = [line.split() for line in out.splitlines()[2:]]
        assert len(data) == 10
        assert all(fields[1] == "1.000000" for fields in data)

    def test_csv_matches_library_exactly(self, capsys):
        code, out, _ = run_cli(capsys, "estimate", "--table", "40,5,15,40", "--format", "csv")
        assert code == 0
        rows = parse_csv(out)
        assert list(rows[0]) == ["method", "estimate", "se", "lower", "upper", "kind", "corrected"]
        table = ContingencyTable(40, 5, 15, 40)
        estimates = estimate_all(table)
        for method, row in zip(MethodId, rows):
            assert row["method"] == method.label
            assert float(row["estimate"]) == estimates[method].value
            interval = confidence_interval(method, table)
            assert float(row["se"]) == math.sqrt(interval.variance)
            assert float(row["lower"]) == interval.lower
            assert float(row["upper"]) == interval.upper
            assert row["corrected"] == "0"

    def test_undefined_methods_render(self, capsys):
        code, out, _ = run_cli(capsys, "estimate", "--table", "10,0,0,0")
        assert code == 0
        kappa_line = next(line for line in out.splitlines() if line.startswith("kappa"))
        assert "undefined" in kappa_line
        yule_line = next(line for line in out.splitlines() if line.startswith("Y"))
        assert "corrected(+0.5)" in yule_line
        code, out, _ = run_cli(capsys, "estimate", "--table", "10,0,0,0", "--format", "csv")
        rows = parse_csv(out)
        assert rows[1]["method"] == "kappa" and rows[1]["estimate"] == "nan"
        assert rows[7]["method"] == "Y" and rows[7]["corrected"] == "1"

    def test_wrong_arity_exits_one(self, capsys):
        code, _, err = run_cli(capsys, "estimate", "--table", "1,2")
        assert code == 1
        assert "error" in err

    def test_negative_counts_exit_one(self, capsys):
        assert run_cli(capsys, "estimate", "--table", "-1,2,3,4")[0] == 1

    def test_bad_level_exits_one(self, capsys):
        assert run_cli(capsys, "estimate", "--table", "40,5,15,40", "--ci", "1.5")[0] == 1

    def test_table_and_batch_are_exclusive(self, capsys, tmp_path):
        batch = tmp_path / "b.csv"
        batch.write_text("n11,n10,n01,n00\n1,2,3,4\n")
        assert run_cli(capsys, "estimate")[0] == 1
        assert run_cli(capsys, "estimate", "--table", "1,2,3,4", "--batch", str(batch))[0] == 1

    def test_batch_reports_each_row(self, capsys, tmp_path):
        batch = tmp_path / "b.csv"
        batch.write_text("n11,n10,n01,n00\n40,5,15,40\n10,5,3,2\n")
        code, out, _ = run_cli(capsys, "estimate", "--batch", str(batch), "--format", "csv")
        assert code == 0
        rows = parse_csv(out)
        assert len(rows) == 20
        assert [row["row"] for row in rows] == ["0"] * 10 + ["1"] * 10
        second = estimate_all(ContingencyTable(10, 5, 3, 2))
        for method, row in zip(MethodId, rows[10:]):
            assert float(row["estimate"]) == second[method].value

    def test_batch_missing_column_exits_one(self, capsys, tmp_path):
        batch = tmp_path / "b.csv"
        batch.write_text("n11,n10,n01\n1,2,3\n")
        code, _, err = run_cli(capsys, "estimate", "--batch", str(batch))
        assert code == 1
        assert "n00" in err

    def test_batch_empty_exits_one(self, capsys, tmp_path):
        batch = tmp_path / "b.csv"
        batch.write_text("n11,n10,n01,n00\n")
        assert run_cli(capsys, "estimate", "--batch", str(batch))[0] == 1

    def test_batch_missing_file_exits_one(self, capsys, tmp_path):
        assert run_cli(capsys, "estimate", "--batch", str(tmp_path / "nope.csv"))[0] == 1


class TestTruth:
    def test_worked_example(self, capsys):
        code, out, _ = run_cli(
            capsys, "truth", "--theta", "0.5", "--p1", "1", "--p2", "1",
            "--m1", "0.5", "--m2", "0.5", "--rhoc", "0.5",
        )
        assert code == 0
        assert "K=0.181818" in out
        assert "K*=0.333333" in out
        assert "gamma=0.333333" in out

    def test_perfect_raters(self, capsys):
        code, out, _ = run_cli(
            capsys, "truth", "--theta", "0.3", "--p1", "0", "--p2", "0",
            "--m1", "0.3", "--m2", "0.3", "--rhoc", "0.5",
        )
        assert code == 0
        assert "K=1.000000" in out

    def test_out_of_range_flag_exits_one(self, capsys):
        code, _, err = run_cli(
            capsys, "truth", "--theta", "1.5", "--p1", "0.5", "--p2", "0.5",
            "--m1", "0.3", "--m2", "0.3",
        )
        assert code == 1
        assert "error" in err

    def test_csv_quantities(self, capsys):
        code, out, _ = run_cli(
            capsys, "truth", "--theta", "0.5", "--p1", "1", "--p2", "1",
            "--m1", "0.5", "--m2", "0.5", "--rhoc", "0.5", "--format", "csv",
        )
        assert code == 0
        values = {row["quantity"]: row["value"] for row in parse_csv(out)}
        assert float(values["k"]) == pytest.approx(2 / 11, abs=1e-12)
        assert float(values["k_star"]) == pytest.approx(1 / 3, abs=1e-12)
        assert float(values["u11"]) == 1.0
        joint = [float(v) for q, v in values.items() if q.startswith("joint_")]
        assert len(joint) == 16
        assert sum(joint) == pytest.approx(1.0, abs=1e-12)

    def test_csv_undefined_gamma_is_nan(self, capsys):
        code, out, _ = run_cli(
            capsys, "truth", "--theta", "0.5", "--p1", "0.5", "--p2", "0.5",
            "--m1", "0", "--m2", "0", "--format", "csv",
        )
        assert code == 0
        values = {row["quantity"]: row["value"] for row in parse_csv(out)}
        assert values["gamma"] == "nan"
        assert float(values["k"]) == 1.0


class TestSimulate:
    def test_emits_expected_csv(self, capsys):
        code, out, _ = run_cli(capsys, "simulate", *SCENARIO_FLAGS, "--n", "50", "--reps", "3", "--seed", "42")
        assert code == 0
        rows = parse_csv(out)
        assert list(rows[0]) == ["rep", "n11", "n10", "n01", "n00"]
        assert [row["rep"] for row in rows] == ["0", "1", "2"]
        for row in rows:
            counts = [int(row[c]) for c in ("n11", "n10", "n01", "n00")]
            assert sum(counts) == 50

    def test_matches_library_streams(self, capsys):
        code, out, _ = run_cli(
            capsys, "simulate", *SCENARIO_FLAGS,
            "--n", "40", "--reps", "5", "--seed", "7", "--setting", "3",
        )
        assert code == 0
        got = np.array(
            [[int(row[c]) for c in ("n11", "n10", "n01", "n00")] for row in parse_csv(out)]
        )
        scenario = Scenario(0.5, 0.5, 0.5, 0.3, 0.3, 0.5, 0.5)
        assert np.array_equal(got, replicate_tables(scenario, 40, 5, 7, 3))

    def test_deterministic_and_seed_sensitive(self, capsys):
        args = ["simulate", *SCENARIO_FLAGS, "--n", "30", "--reps", "2"]
        first = run_cli(capsys, *args, "--seed", "5")
        second = run_cli(capsys, *args, "--seed", "5")
        third = run_cli(capsys, *args, "--seed", "6")
        assert first == second
        assert first[1] != third[1]

    def test_seed_required(self, capsys):
        code, _, err = run_cli(capsys, "simulate", *SCENARIO_FLAGS, "--n", "30")
        assert code == 1
        assert "--seed" in err

    def test_out_file(self, capsys, tmp_path):
        out_path = tmp_path / "draws.csv"
        code, out, _ = run_cli(
            capsys, "simulate", *SCENARIO_FLAGS, "--n", "30", "--seed", "5", "--out", str(out_path)
        )
        assert code == 0
        assert out == ""
        rows = parse_csv(out_path.read_text())
        assert len(rows) == 1

    def test_human_format_aligns(self, capsys):
        code, out, _ = run_cli(
            capsys, "simulate", *SCENARIO_FLAGS, "--n", "30", "--seed", "5", "--format", "human"
        )
        assert code == 0
        header = out.splitlines()[0].split()
        assert header == ["rep", "n11", "n10", "n01", "n00"]

    def test_roundtrip_simulate_to_estimate_is_bit_exact(self, capsys, tmp_path):
        draws = tmp_path / "draws.csv"
        code, _, _ = run_cli(
            capsys, "simulate", *SCENARIO_FLAGS, "--n", "60", "--reps", "4",
            "--seed", "11", "--out", str(draws),
        )
        assert code == 0
        code, out, _ = run_cli(capsys, "estimate", "--batch", str(draws), "--format", "csv")
        assert code == 0
        rows = parse_csv(out)
        scenario = Scenario(0.5, 0.5, 0.5, 0.3, 0.3, 0.5, 0.5)
        counts = replicate_tables(scenario, 60, 4, 11)
        assert len(rows) == 40
        for rep in range(4):
            expected = estimate_all(ContingencyTable(*(int(x) for x in counts[rep])))
            for method, row in zip(MethodId, rows[10 * rep:10 * rep + 10]):
                assert row["row"] == str(rep)
                value = expected[method].value
                if value is None:
                    assert row["estimate"] == "nan"
                else:
                    assert float(row["estimate"]) == value


class TestSweep:
    def test_dry_run_default_grid(self, capsys):
        code, out, _ = run_cli(capsys, "sweep", "--dry-run")
        assert code == 0
        assert out.strip() == "562500"

    def test_dry_run_custom_grid(self, capsys, tmp_path):
        grid = tmp_path / "grid.cfg"
        grid.write_text(GRID_TEXT)
        code, out, _ = run_cli(capsys, "sweep", "--grid", str(grid), "--dry-run")
        assert code == 0
        assert out.strip() == "2"

    def test_dry_run_needs_no_seed_or_out(self, capsys):
        assert run_cli(capsys, "sweep", "--dry-run")[0] == 0

    def test_run_writes_checkpoint(self, sweep_csv):
        rows = load_results(sweep_csv)
        assert len(rows) == 2
        grid = parse_grid_config(GRID_TEXT)
        assert [row["theta"] for row in rows] == [0.3, 0.7]
        assert grid.count == 2

    def test_rerun_is_a_noop(self, capsys, sweep_csv, tmp_path):
        before = sweep_csv.read_bytes()
        grid = tmp_path / "grid.cfg"
        grid.write_text(GRID_TEXT)
        code, _, err = run_cli(
            capsys, "sweep", "--grid", str(grid), "--out", str(sweep_csv), "--seed", "99"
        )
        assert code == 0
        assert "0 new settings" in err
        assert sweep_csv.read_bytes() == before

    def test_missing_seed_or_out_exits_one(self, capsys, tmp_path):
        grid = tmp_path / "grid.cfg"
        grid.write_text(GRID_TEXT)
        out = tmp_path / "r.csv"
        assert run_cli(capsys, "sweep", "--grid", str(grid), "--out", str(out))[0] == 1
        assert run_cli(capsys, "sweep", "--grid", str(grid), "--seed", "3")[0] == 1

    def test_unreadable_config_exits_one(self, capsys, tmp_path):
        code, _, err = run_cli(
            capsys, "sweep", "--grid", str(tmp_path / "nope.cfg"), "--dry-run"
        )
        assert code == 1
        assert "grid config" in err

    def test_bad_config_exits_one(self, capsys, tmp_path):
        grid = tmp_path / "grid.cfg"
        grid.write_text("theta = 0.3\nbogus = 1\n")
        assert run_cli(capsys, "sweep", "--grid", str(grid), "--dry-run")[0] == 1

    def test_interrupt_exits_two(self, capsys, tmp_path, monkeypatch):
        def boom(*args, **kwargs):
            raise KeyboardInterrupt

        monkeypatch.setattr(cli, "run_grid", boom)
        grid = tmp_path / "grid.cfg"
        grid.write_text(GRID_TEXT)
        code, _, err = run_cli(
            capsys, "sweep", "--grid", str(grid), "--out", str(tmp_path / "r.csv"), "--seed", "1"
        )
        assert code == 2
        assert "interrupted" in err

    def test_thread_resolution(self, capsys, tmp_path, monkeypatch):
        seen = []

        def record(grid, out_path, progress=None):
            seen.append(grid.threads)
            return 0

        monkeypatch.setattr(cli, "run_grid", record)
        grid = tmp_path / "grid.cfg"
        grid.write_text(GRID_TEXT)
        base = ["sweep", "--grid", str(grid), "--out", str(tmp_path / "r.csv"), "--seed", "1"]
        monkeypatch.delenv("RATERBENCH_THREADS", raising=False)
        assert run_cli(capsys, *base)[0] == 0
        monkeypatch.setenv("RATERBENCH_THREADS", "3")
        assert run_cli(capsys, *base)[0] == 0
        assert run_cli(capsys, *base, "--threads", "2")[0] == 0
        assert seen == [1, 3, 2]
        monkeypatch.setenv("RATERBENCH_THREADS", "zero")
        assert run_cli(capsys, *base)[0] == 1


class TestSummarize:
    def test_human_table(self, capsys, sweep_csv):
        code, out, _ = run_cli(capsys, "summarize", "--in", str(sweep_csv))
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "metric=bias settings=2"
        assert lines[1].split() == ["method", "p2.5", "p25", "p50", "p75", "p97.5"]
        assert len(lines) == 12

    def test_csv_matches_library(self, capsys, sweep_csv):
        code, out, _ = run_cli(
            capsys, "summarize", "--in", str(sweep_csv), "--metric", "coverage", "--format", "csv"
        )
        assert code == 0
        rows = parse_csv(out)
        expected = summarize(load_results(sweep_csv), metric="coverage")
        for method, row in zip(MethodId, rows):
            quartiles = expected.per_method[method.label]
            got = [float(row[f"p{q:g}"]) for q in (2.5, 25, 50, 75, 97.5)]
            assert got == [pytest.approx(v, abs=0) for v in quartiles]

    def test_filter_selects_settings(self, capsys, sweep_csv):
        code, out, _ = run_cli(
            capsys, "summarize", "--in", str(sweep_csv), "--filter", "theta=0.3"
        )
        assert code == 0
        assert "settings=1" in out

    def test_empty_filter_exits_one(self, capsys, sweep_csv):
        code, _, err = run_cli(
            capsys, "summarize", "--in", str(sweep_csv), "--filter", "theta=0.9"
        )
        assert code == 1
        assert "filter" in err

    def test_bad_filters_exit_one(self, capsys, sweep_csv):
        base = ["summarize", "--in", str(sweep_csv)]
        assert run_cli(capsys, *base, "--filter", "theta:0.3")[0] == 1
        assert run_cli(capsys, *base, "--filter", "bogus=1")[0] == 1
        assert run_cli(capsys, *base, "--filter", "theta=a,b")[0] == 1
        assert run_cli(capsys, *base, "--filter", "theta=0.3", "--filter", "theta=0.7")[0] == 1

    def test_bad_metric_exits_one(self, capsys, sweep_csv):
        assert run_cli(capsys, "summarize", "--in", str(sweep_csv), "--metric", "junk")[0] == 1

    def test_missing_input_exits_one(self, capsys, tmp_path):
        assert run_cli(capsys, "summarize", "--in", str(tmp_path / "nope.csv"))[0] == 1


class TestCluster:
    def test_partition_covers_all_profiles(self, capsys, sweep_csv):
        code, out, _ = run_cli(capsys, "cluster", "--in", str(sweep_csv), "--k", "3")
        assert code == 0
        lines = out.splitlines()
        assert len(lines) == 3
        members = [m for line in lines for m in line.split(":")[1].split()]
        assert sorted(members) == sorted([m.label for m in MethodId] + ["K"])

    def test_csv_partition(self, capsys, sweep_csv):
        code, out, _ = run_cli(
            capsys, "cluster", "--in", str(sweep_csv), "--k", "2", "--format", "csv"
        )
        assert code == 0
        rows = parse_csv(out)
        assert len(rows) == 11
        assert {row["cluster"] for row in rows} == {"1", "2"}

    def test_singletons_at_k_eleven(self, capsys, sweep_csv):
        code, out, _ = run_cli(capsys, "cluster", "--in", str(sweep_csv), "--k", "11")
        assert code == 0
        lines = out.splitlines()
        assert len(lines) == 11
        assert all(len(line.split(":")[1].split()) == 1 for line in lines)

    def test_k_too_large_exits_one(self, capsys, sweep_csv):
        assert run_cli(capsys, "cluster", "--in", str(sweep_csv), "--k", "12")[0] == 1

    def test_merges_out(self, capsys, sweep_csv, tmp_path):
        merges_path = tmp_path / "merges.csv"
        code, _, _ = run_cli(
            capsys, "cluster", "--in", str(sweep_csv), "--merges-out", str(merges_path)
        )
        assert code == 0
        rows = parse_csv(merges_path.read_text())
        assert list(rows[0]) == ["left", "right", "height"]
        assert len(rows) == 10
        heights = [float(row["height"]) for row in rows]
        assert heights == sorted(heights)

    def test_newick_output(self, capsys, sweep_csv):
        code, out, _ = run_cli(capsys, "cluster", "--in", str(sweep_csv), "--newick")
        assert code == 0
        tree = out.splitlines()[-1]
        assert tree.endswith(";")
        assert "kappa:" in tree

    def test_missing_input_exits_one(self, capsys, tmp_path):
        assert run_cli(capsys, "cluster", "--in", str(tmp_path / "nope.csv"))[0] == 1
