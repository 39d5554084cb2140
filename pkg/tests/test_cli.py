import csv
import io
import json

import pytest
from click.testing import CliRunner

from rte.cli import cli, epsilon_grid
from rte.planner import CriterionKind, PrecisionSpec, solve_sample_size


@pytest.fixture
def runner():
    return CliRunner()


def run(runner, *args, **kwargs):
    return runner.invoke(cli, [str(a) for a in args], **kwargs)


class TestPlan:
    def test_rate(self, runner):
        result = run(runner, "plan", "--target", "rate", "--epsilon", 0.01, "--delta", 0.01)
        assert result.exit_code == 0
        assert "n = 66365" in result.output
        assert "rate-exact" in result.output

    def test_service_csv(self, runner):
        result = run(runner, "plan", "--target", "service", "--epsilon", 0.05, "--delta", 0.05,
                     "--format", "csv")
        assert result.exit_code == 0
        rows = list(csv.DictReader(io.StringIO(result.output)))
        assert rows[0]["criterion"] == "service-conservative"
        assert rows[0]["n"] == "1699"

    def test_service_exact_ndjson(self, runner):
        result = run(runner, "plan", "--target", "service", "--criterion", "exact",
                     "--epsilon", 0.05, "--delta", 0.05, "--format", "ndjson")
        assert result.exit_code == 0
        assert json.loads(result.output)["n"] == 1537

    def test_epsilon_out_of_range(self, runner):
        result = run(runner, "plan", "--target", "rate", "--epsilon", 1.5, "--delta", 0.1)
        assert result.exit_code == 2
        assert "(0, 1)" in result.output

    def test_conservative_rate_rejected(self, runner):
        result = run(runner, "plan", "--target", "rate", "--criterion", "conservative",
                     "--epsilon", 0.1, "--delta", 0.1)
        assert result.exit_code == 2

    def test_budget_exit_code_and_env(self, runner):
        result = run(runner, "plan", "--target", "rate", "--epsilon", 0.01, "--delta", 0.01,
                     env={"RTE_MAX_N": "1000"})
        assert result.exit_code == 3
        assert result.stdout == ""
        assert "1000" in result.stderr


class TestEstimate:
    def test_rate(self, runner, tmp_path):
        path = tmp_path / "ia.txt"
        path.write_text("2.0\n2.0\n2.0\n2.0\n")
        result = run(runner, "estimate", "--target", "rate", "--input", path)
        assert result.exit_code == 0
        assert "rate = 0.5 1/s" in result.output
        assert "n = 4" in result.output

    def test_service_json(self, runner, tmp_path):
        path = tmp_path / "svc.txt"
        path.write_text("1\n2\n3\n")
        result = run(runner, "estimate", "--target", "service", "--input", path, "--json")
        assert result.exit_code == 0
        record = json.loads(result.output)
        assert record["point"] == 2.0
        assert record["stddev"] == 1.0
        assert record["guarantee_met"] is None

    def test_stdin_timestamps(self, runner):
        result = run(runner, "estimate", "--target", "rate", "--format", "timestamps",
                     "--unit", "ms", "--json", input="0\n500\n1000\n")
        assert result.exit_code == 0
        assert json.loads(result.output)["point"] == 2.0

    def test_guarantee_not_met_is_a_warning(self, runner, tmp_path):
        path = tmp_path / "ia.txt"
        path.write_text("1.0\n" * 100)
        result = run(runner, "estimate", "--target", "rate", "--input", path,
                     "--epsilon", 0.01, "--delta", 0.01)
        assert result.exit_code == 0
        assert "guarantee not met" in result.output
        assert "66365" in result.output

    def test_guarantee_met(self, runner, tmp_path):
        path = tmp_path / "ia.txt"
        path.write_text("1.0\n" * 100)
        result = run(runner, "estimate", "--target", "rate", "--input", path,
                     "--epsilon", 0.5, "--delta", 0.1)
        assert result.exit_code == 0
        assert "guarantee met" in result.output

    def test_parse_error_exit_4(self, runner, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("1.0\n2.0\n-1.0\n")
        result = run(runner, "estimate", "--target", "service", "--input", path)
        assert result.exit_code == 4
        assert "line 3" in result.stderr
        assert result.stdout == ""

    def test_missing_file_exit_4(self, runner, tmp_path):
        result = run(runner, "estimate", "--target", "service", "--input", tmp_path / "nope")
        assert result.exit_code == 4

    def test_epsilon_without_delta(self, runner, tmp_path):
        path = tmp_path / "ia.txt"
        path.write_text("1.0\n")
        result = run(runner, "estimate", "--target", "rate", "--input", path, "--epsilon", 0.1)
        assert result.exit_code == 2


class TestValidate:
    def test_small_run_deterministic(self, runner):
        args = ["validate", "--target", "rate", "--true-param", 2, "--epsilon", 0.2,
                "--delta", 0.1, "--trials", 300, "--seed", 42, "--json"]
        first = run(runner, *args)
        second = run(runner, *args, "--workers", 3)
        assert first.exit_code == 0
        assert first.output == second.output
        record = json.loads(first.output)
        assert record["pass"] is True
        planned = solve_sample_size(PrecisionSpec(0.2, 0.1), CriterionKind.RATE_EXACT).n
        assert record["n"] == planned

    def test_seed_required(self, runner):
        result = run(runner, "validate", "--target", "rate", "--true-param", 2,
                     "--epsilon", 0.2, "--delta", 0.1)
        assert result.exit_code == 2

    def test_single_trial(self, runner):
        result = run(runner, "validate", "--target", "service", "--true-param", 1,
                     "--epsilon", 0.3, "--delta", 0.2, "--trials", 1, "--seed", 0, "--json")
        record = json.loads(result.output)
        assert record["std_error"] == 0.0
        assert record["pass"] is (record["hits"] == 1)
        assert result.exit_code == (0 if record["pass"] else 5)

    def test_failure_exit_5(self, runner):
        # far too few observations for the contract
        result = run(runner, "validate", "--target", "rate", "--true-param", 1,
                     "--epsilon", 0.05, "--delta", 0.05, "--trials", 500, "--seed", 1, "--n", 10)
        assert result.exit_code == 5
        assert "FAIL" in result.output


class TestCurve:
    def test_grid_helper(self):
        assert len(epsilon_grid(0.01, 0.1, 0.005)) == 19
        assert epsilon_grid(0.01, 0.1, 0.005)[-1] == 0.1
        assert epsilon_grid(0.2, 0.3, 0.5) == [0.2]

    def test_degenerate_step(self, runner):
        result = run(runner, "curve", "--target", "rate", "--epsilon-from", 0.2,
                     "--epsilon-to", 0.3, "--epsilon-step", 0.5, "--deltas", "0.1,0.01")
        assert result.exit_code == 0
        rows = list(csv.DictReader(io.StringIO(result.output)))
        assert [r["epsilon"] for r in rows] == ["0.2", "0.2"]

    def test_to_file(self, runner, tmp_path):
        out = tmp_path / "fig2.csv"
        result = run(runner, "curve", "--target", "service", "--epsilon-from", 0.05,
                     "--epsilon-to", 0.1, "--epsilon-step", 0.05, "--deltas", "0.05",
                     "--output", out)
        assert result.exit_code == 0
        rows = list(csv.DictReader(out.open()))
        assert rows[0]["n"] == "1699"

    def test_budget_flagged(self, runner):
        result = run(runner, "curve", "--target", "rate", "--epsilon-from", 0.01,
                     "--epsilon-to", 0.5, "--epsilon-step", 0.49, "--deltas", "0.05",
                     "--max-n", 100)
        assert result.exit_code == 0
        assert "budget_exceeded" in result.stdout
        assert "exceed" in result.stderr

    @pytest.mark.parametrize("extra", [["--deltas", "0.1,2"], ["--deltas", "x"],
                                       ["--epsilon-step", "0"]])
    def test_bad_flags(self, runner, extra):
        args = ["curve", "--target", "rate", "--epsilon-from", 0.1, "--epsilon-to", 0.2,
                "--epsilon-step", 0.05]
        result = run(runner, *args, *extra)
        assert result.exit_code == 2

    def test_reversed_range(self, runner):
        result = run(runner, "curve", "--target", "rate", "--epsilon-from", 0.3,
                     "--epsilon-to", 0.2, "--epsilon-step", 0.05)
        assert result.exit_code == 2


def test_module_entry_point():
    import subprocess
    import sys

    proc = subprocess.run([sys.executable, "-m", "rte", "plan", "--target", "rate",
                           "--epsilon", "0.5", "--delta", "0.5"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("n = ")


@pytest.mark.slow
@pytest.mark.parametrize("target, param, eps, hits", [
    ("rate", 10, 0.01, 9896),
    ("service", 0.05, 0.05, 9640),
])
def test_validate_golden(runner, target, param, eps, hits):
    # hit counts pinned from the first seeded run
    result = run(runner, "validate", "--target", target, "--true-param", param,
                 "--epsilon", eps, "--delta", eps, "--trials", 10_000, "--seed", 42, "--json")
    assert result.exit_code == 0
    record = json.loads(result.output)
    assert record["hits"] == hits
    assert record["pass"] is True
    if target == "service":
        assert record["empirical_coverage"] > 0.95
