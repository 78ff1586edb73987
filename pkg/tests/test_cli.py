import json
import math

import pytest
from click.testing import CliRunner

from rankstop.cli import main

UNIFORM = '{"kind": "uniform", "a": 1}'
LAPLACE = '{"kind": "laplace", "b": 1}'
INTERVAL = '{"kind": "interval_union", "c": 1, "d": 2}'


@pytest.fixture()
def runner():
    return CliRunner()


def invoke(runner, args, **kw):
    result = runner.invoke(main, args, catch_exceptions=False, **kw)
    return result


class TestSolve:
    def test_full_uniform(self, runner):
        res = invoke(runner, ["solve", "--dist", UNIFORM, "--model", "full"])
        assert res.exit_code == 0
        payload = json.loads(res.output)
        assert payload["x1_star"] == pytest.approx(2 * (math.sqrt(2) - 1), abs=1e-6)
        assert payload["value"] == pytest.approx(2.2786, abs=1e-4)
        assert payload["manifest"]["distribution"]["kind"] == "uniform"

    def test_relranks_laplace(self, runner):
        res = invoke(runner, ["solve", "--dist", LAPLACE, "--model", "relranks"])
        payload = json.loads(res.output)
        assert payload["p"] == pytest.approx(1 / 192, abs=1e-9)
        assert payload["value"] == pytest.approx(2.28125, abs=1e-8)
        assert payload["branch"] == "a"

    def test_relranks_interval_union_branch_b(self, runner):
        res = invoke(runner, ["solve", "--dist", INTERVAL, "--model", "relranks"])
        payload = json.loads(res.output)
        assert payload["branch"] == "b"
        assert payload["value"] == pytest.approx(55 / 24, abs=1e-8)

    def test_invalid_spec_exits_2(self, runner):
        res = runner.invoke(main, ["solve", "--dist", "not json", "--model", "full"])
        assert res.exit_code == 2

    def test_unknown_kind_exits_2(self, runner):
        res = runner.invoke(main, ["solve", "--dist", '{"kind": "gauss"}', "--model", "full"])
        assert res.exit_code == 2

    def test_out_file(self, runner, tmp_path):
        out = tmp_path / "sol.json"
        res = invoke(runner, ["solve", "--dist", INTERVAL, "--model", "relranks",
                              "--out", str(out)])
        assert res.exit_code == 0
        assert json.loads(out.read_text())["branch"] == "b"


class TestVerify:
    def test_uniform_passes(self, runner):
        res = invoke(runner, ["verify", "--dist", UNIFORM, "--paths", "60000",
                              "--seed", "5"])
        assert res.exit_code == 0
        payload = json.loads(res.output)
        assert payload["passed"] is True
        assert all(c["passed"] for c in payload["checks"])

    def test_bad_tabulated_rejected_at_load(self, runner):
        res = runner.invoke(
            main,
            ["verify", "--dist", '{"kind": "tabulated", "grid": [[0, 0.48], [1, 1.0]]}'],
        )
        assert res.exit_code == 2

    def test_powerfold_small_delta(self, runner):
        res = invoke(runner, ["verify", "--dist", '{"kind": "powerfold", "delta": 0.05}',
                              "--paths", "60000", "--seed", "5"])
        assert res.exit_code == 0
        payload = json.loads(res.output)
        pq = next(c for c in payload["checks"] if c["check"] == "pq_sum")
        assert pq["detail"]["p"] < 1 / 960


class TestTable2:
    def test_all_nine_rows(self, runner):
        res = invoke(runner, ["table2"])
        payload = json.loads(res.output)
        rows = {(r["version"], r["description"]): r["expected_rank"] for r in payload["rows"]}
        assert len(rows) == 9
        assert rows[("Full Information", "Lower bound")] == pytest.approx(
            (109 - math.sqrt(2)) / 48, abs=1e-9)
        assert rows[("Full Information", "Laplace Distribution")] == pytest.approx(2.271, abs=1e-3)
        assert rows[("Full Information", "Uniform Distribution")] == pytest.approx(2.279, abs=1e-3)
        assert rows[("Full Information", "Maximum")] == pytest.approx(55 / 24, abs=1e-8)
        assert rows[("Relative Ranks", "Greatest Lower Bound")] == pytest.approx(109 / 48, abs=1e-9)
        assert rows[("Relative Ranks", "Laplace Distribution")] == pytest.approx(73 / 32, abs=1e-9)
        assert rows[("Relative Ranks", "Uniform Distribution")] == pytest.approx(55 / 24, abs=1e-9)
        assert rows[("Relative Ranks", "Maximum")] == pytest.approx(55 / 24, abs=1e-9)
        assert rows[("Both Versions", "Stopping Immediately")] == pytest.approx(2.5, abs=1e-12)

    def test_csv_format(self, runner):
        res = invoke(runner, ["table2", "--csv"])
        lines = res.output.strip().splitlines()
        assert lines[0] == "version,description,expected_rank"
        assert len(lines) == 10


class TestCurve:
    def test_monotone_and_marked(self, runner):
        res = invoke(runner, ["curve", "--dist", UNIFORM, "--lo", "0.01", "--hi", "1",
                              "--points", "40"])
        payload = json.loads(res.output)
        w1 = [p["continuation_value"] for p in payload["points"]]
        assert all(b <= a + 1e-9 for a, b in zip(w1, w1[1:]))
        marked = [p for p in payload["points"] if p["is_threshold"]]
        assert len(marked) == 1
        assert marked[0]["x"] == pytest.approx(0.8284, abs=1e-3)
        assert marked[0]["continuation_value"] == pytest.approx(2.0, abs=1e-8)

    def test_known_point(self, runner):
        res = invoke(runner, ["curve", "--dist", UNIFORM, "--lo", "0.5", "--hi", "0.5001",
                              "--points", "2"])
        payload = json.loads(res.output)
        assert payload["points"][0]["continuation_value"] == pytest.approx(2.109375, abs=1e-8)

    def test_bad_range(self, runner):
        res = runner.invoke(main, ["curve", "--dist", UNIFORM, "--lo", "1", "--hi", "0"])
        assert res.exit_code == 2


class TestSimulateCmd:
    def test_rank_rule_on_uniform(self, runner):
        res = invoke(runner, ["simulate", "--dist", UNIFORM, "--policy", "thm4a",
                              "--paths", "200000", "--seed", "42"])
        payload = json.loads(res.output)
        assert abs(payload["mean_rank"] - 55 / 24) <= 3 * payload["std_error"]

    def test_two_step_rule_forces_horizon(self, runner):
        res = invoke(runner, ["simulate", "--dist", LAPLACE, "--policy", "thm1",
                              "--paths", "100000", "--seed", "1"])
        payload = json.loads(res.output)
        assert payload["manifest"]["horizon"] == 2
        assert abs(payload["mean_rank"] - 15 / 8) <= 3 * payload["std_error"]

    def test_custom_rank_table(self, runner):
        policy = json.dumps({"kind": "rank_table", "bits": [1, 0, 0, 0, 0, 0, 0, 0, 0]})
        res = invoke(runner, ["simulate", "--dist", UNIFORM, "--policy", policy,
                              "--paths", "50000", "--seed", "2"])
        payload = json.loads(res.output)
        assert payload["stop_time_histogram"][0] == 50000

    def test_unknown_policy_exits_2(self, runner):
        res = runner.invoke(main, ["simulate", "--dist", UNIFORM, "--policy", "thm9"])
        assert res.exit_code == 2

    def test_seed_env_var(self, runner):
        res = invoke(runner, ["simulate", "--dist", UNIFORM, "--policy", "stop_at_0",
                              "--paths", "1000"], env={"RANKSTOP_SEED": "777"})
        assert json.loads(res.output)["manifest"]["seed"] == 777

    def test_deterministic_output_modulo_timestamp(self, runner):
        args = ["simulate", "--dist", UNIFORM, "--policy", "thm4b",
                "--paths", "50000", "--seed", "3"]
        a = json.loads(invoke(runner, args).output)
        b = json.loads(invoke(runner, args).output)
        a["manifest"].pop("timestamp")
        b["manifest"].pop("timestamp")
        assert a == b


class TestPq:
    def test_values(self, runner):
        res = invoke(runner, ["pq", "--dist", UNIFORM])
        payload = json.loads(res.output)
        assert payload["p"] == pytest.approx(1 / 96, abs=1e-10)

    def test_table_csv_row_order(self, runner):
        res = invoke(runner, ["pq", "--dist", UNIFORM, "--csv"])
        lines = res.output.strip().splitlines()
        assert len(lines) == 13
        assert lines[1].startswith("0>S1>S2>S3,0<S1<S2<S3,1/8")
        assert lines[5].startswith("0>S3>S1>S2,0<S3<S1<S2,1/48,2,0")

    def test_json_table(self, runner):
        res = invoke(runner, ["pq", "--dist", LAPLACE, "--table"])
        payload = json.loads(res.output)
        assert len(payload["permutation_table"]) == 12
        total = sum(r["probability"] for r in payload["permutation_table"])
        assert 2 * total == pytest.approx(1.0, abs=1e-9)


class TestEnumerate:
    def test_exact_fraction_input(self, runner):
        res = invoke(runner, ["enumerate", "--p", "1/192"])
        payload = json.loads(res.output)
        assert payload["optimal_value"] == "73/32"
        assert payload["policy_count"] == 512
        assert payload["named_rules_optimal"]["rank_rule_a"] is True
        assert payload["named_rules_optimal"]["rank_rule_b"] is False

    def test_two_step(self, runner):
        res = invoke(runner, ["enumerate", "--n", "2"])
        payload = json.loads(res.output)
        assert payload["optimal_value"] == "15/8"
        assert payload["named_rules_optimal"]["two_step_rule"] is True

    def test_from_distribution(self, runner):
        res = invoke(runner, ["enumerate", "--dist", UNIFORM])
        payload = json.loads(res.output)
        assert payload["optimal_value"] == "55/24"
        assert payload["manifest"]["p_rationalized_from_quadrature"] is True

    def test_missing_p_exits_2(self, runner):
        res = runner.invoke(main, ["enumerate"])
        assert res.exit_code == 2


class TestDeterminism:
    def test_solve_output_identical_modulo_timestamp(self, runner):
        args = ["solve", "--dist", LAPLACE, "--model", "relranks"]
        a = json.loads(invoke(runner, args).output)
        b = json.loads(invoke(runner, args).output)
        a["manifest"].pop("timestamp")
        b["manifest"].pop("timestamp")
        assert a == b

    def test_tolerance_flags_recorded_in_manifest(self, runner):
        res = invoke(runner, ["solve", "--dist", UNIFORM, "--model", "full",
                              "--abs-tol", "1e-9", "--rel-tol", "1e-9"])
        payload = json.loads(res.output)
        tols = payload["manifest"]["tolerances"]
        assert tols["inner_abs_tol"] == 1e-9
        assert tols["inner_rel_tol"] == 1e-9
        assert tols["outer_abs_tol"] == 1e-10
        assert payload["x1_star"] == pytest.approx(2 * (math.sqrt(2) - 1), abs=1e-6)

    def test_default_tolerances_recorded(self, runner):
        res = invoke(runner, ["pq", "--dist", UNIFORM])
        payload = json.loads(res.output)
        assert payload["manifest"]["tolerances"] == {
            "inner_abs_tol": 1e-13, "inner_rel_tol": 1e-13,
            "outer_abs_tol": 1e-11, "outer_rel_tol": 1e-11,
        }
