"""Contract checks for the error paths across the package."""

import numpy as np
import pytest
from click.testing import CliRunner
from fractions import Fraction

from rankstop.cli import main
from rankstop.distributions import DistributionError, Laplace, TabulatedCdf, Uniform, from_spec
from rankstop.numerics import RootConfig, find_root, integrate
from rankstop.oracle import enumerate_rank_policies, grid_dp_full_info, stage2_disagreement
from rankstop.relranks import (
    optimal_rank_value,
    permutation_table,
    shift_concentration_check,
    two_step_case_values,
)
from rankstop.simulate import SimConfig
from rankstop.walkcore import (
    RELATIVE_RANKS,
    StoppingPolicy,
    WalkPath,
    stop_at_policy,
)


class TestDistributionErrors:
    @pytest.mark.parametrize("bad", [
        '{"kind": "laplace", "b": 0}',
        '{"kind": "laplace", "b": -2}',
        '{"kind": "powerfold", "delta": 0}',
        '{"kind": "interval_union", "c": 0, "d": 1}',
    ])
    def test_bad_parameters(self, bad):
        with pytest.raises(DistributionError):
            from_spec(bad)

    def test_tabulated_shape_and_content(self):
        with pytest.raises(DistributionError):
            TabulatedCdf([])
        with pytest.raises(DistributionError):
            TabulatedCdf([[0.0, 0.5, 1.0]])
        with pytest.raises(DistributionError):
            TabulatedCdf([[0.0, 0.5], [float("nan"), 1.0]])
        with pytest.raises(DistributionError):
            TabulatedCdf([[-1.0, 0.2], [1.0, 1.0]])  # negative side is mirrored
        with pytest.raises(DistributionError):
            TabulatedCdf([[0.5, 0.4], [1.0, 1.0]])  # F below 1/2 at positive x


class TestNumericsErrors:
    def test_non_vectorized_integrand_rejected(self):
        with pytest.raises(TypeError):
            integrate(lambda x: 1.0, 0.0, 1.0)  # scalar return, not elementwise

    def test_root_config_validation(self):
        with pytest.raises(ValueError):
            RootConfig(x_tol=0.0)
        with pytest.raises(ValueError):
            RootConfig(max_iter=0)

    def test_find_root_bad_bracket_order(self):
        with pytest.raises(ValueError):
            find_root(lambda x: x, 1.0, -1.0)


class TestWalkcoreErrors:
    def test_empty_walk(self):
        with pytest.raises(ValueError):
            WalkPath(())

    def test_policy_mode_validation(self):
        with pytest.raises(ValueError):
            StoppingPolicy("psychic", 3, "bad", lambda k, obs: None)

    def test_decide_prefix_width(self):
        policy = stop_at_policy(0, 3)
        with pytest.raises(ValueError):
            policy.decide(2, [1, 2])  # ranks prefix at k=2 needs 3 entries

    def test_decide_time_range(self):
        policy = stop_at_policy(0, 3)
        with pytest.raises(ValueError):
            policy.decide(4, [1, 1, 1, 1, 1])

    def test_stop_at_out_of_range(self):
        with pytest.raises(ValueError):
            stop_at_policy(4, 3)


class TestRelranksErrors:
    def test_concentration_grid_must_be_positive(self):
        with pytest.raises(ValueError):
            shift_concentration_check(Uniform(1), xs=np.array([0.0, 1.0]))

    def test_table_rejects_negative_p(self):
        with pytest.raises(ValueError):
            permutation_table(-0.001, 1 / 48 + 0.001)

    def test_value_rejects_negative_p(self):
        with pytest.raises(ValueError):
            optimal_rank_value(-0.1)

    def test_case_values_sum_constraint(self):
        with pytest.raises(ValueError):
            two_step_case_values(Fraction(1, 96), Fraction(1, 96) + Fraction(1, 10))


class TestOracleErrors:
    def test_enumeration_horizon(self):
        with pytest.raises(ValueError):
            enumerate_rank_policies(Fraction(1, 96), n=4)

    def test_dp_horizon(self):
        with pytest.raises(ValueError):
            grid_dp_full_info(Uniform(1), m=101, horizon=4)

    def test_two_step_dp_has_no_stage2_grid(self):
        dp = grid_dp_full_info(Uniform(1), m=101, horizon=2)
        with pytest.raises(ValueError):
            stage2_disagreement(dp, stop_at_policy(0, 3))


class TestSimulateErrors:
    @pytest.mark.parametrize("kwargs", [
        {"n_paths": 0, "horizon": 3},
        {"n_paths": 10, "horizon": 0},
        {"n_paths": 10, "horizon": 3, "chunk_size": 0},
    ])
    def test_config_validation(self, kwargs):
        with pytest.raises(ValueError):
            SimConfig(**kwargs)


class TestCliErrors:
    def test_bad_env_seed(self):
        runner = CliRunner()
        res = runner.invoke(main, ["simulate", "--dist", '{"kind": "uniform", "a": 1}',
                                   "--policy", "stop_at_0", "--paths", "10"],
                            env={"RANKSTOP_SEED": "not-a-number"})
        assert res.exit_code == 2

    def test_bad_fraction(self):
        res = CliRunner().invoke(main, ["enumerate", "--p", "one over six"])
        assert res.exit_code == 2

    def test_policy_horizon_conflict(self):
        res = CliRunner().invoke(main, ["simulate", "--dist", '{"kind": "uniform", "a": 1}',
                                        "--policy", "thm4a", "--horizon", "2",
                                        "--paths", "10"])
        assert res.exit_code == 2
