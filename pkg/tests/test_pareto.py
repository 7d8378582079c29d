import math

import numpy as np
import pytest

from infocredit.binning import fit_all
from infocredit.pareto import (FairnessBudgetSweep, ScorecardData, ScorecardModel, SolverConfig,
                               adverse_impact_ratio, fit_unconstrained, is_dominated,
                               prepare_scorecard_data, score_iv, solve_budgeted_scorecard,
                               sweep_frontier)
from infocredit.errors import EmptyGroup
from infocredit.synthdata import GeneratorConfig, generate
from infocredit.woe import build_woe_table


def woe_data(ds):
    schemes = fit_all(ds.X, ds.default, ds.protected, ds.feature_names)
    tables = [build_woe_table(s) for s in schemes]
    return prepare_scorecard_data(schemes, tables, ds)


@pytest.fixture(scope="module")
def small_data():
    return woe_data(generate(GeneratorConfig(n_rows=6000, seed=21)))


@pytest.fixture(scope="module")
def small_sweep(small_data):
    sweep = FairnessBudgetSweep(epsilons=(0.1, 0.3, 0.5, 1.0, 3.0))
    return sweep_frontier(small_data, sweep)


class TestScoreIv:
    def test_intercept_only(self, small_data):
        m = ScorecardModel(0.3, np.zeros(small_data.X.shape[1]), small_data.feature_names)
        assert score_iv(m, small_data, "outcome") == 0.0
        assert score_iv(m, small_data, "group") == 0.0

    def test_group_independent_score(self):
        rng = np.random.default_rng(8)
        n = 20_000
        x = rng.normal(size=(n, 2))
        y = (rng.random(n) < 1 / (1 + np.exp(-x[:, 0]))).astype(int)
        a = rng.integers(0, 2, n)
        data = ScorecardData(x, y, a, ("u", "v"))
        m = ScorecardModel(0.0, np.array([1.0, 0.5]), data.feature_names)
        assert score_iv(m, data, "group") < 0.01

    def test_strong_beats_intercept(self, small_data):
        theta = fit_unconstrained(small_data)
        strong = ScorecardModel(theta[0], theta[1:], small_data.feature_names)
        flat = ScorecardModel(theta[0], np.zeros_like(theta[1:]), small_data.feature_names)
        assert score_iv(strong, small_data) > score_iv(flat, small_data)

    def test_bad_conditioning(self, small_data):
        m = ScorecardModel(0.0, np.ones(small_data.X.shape[1]), small_data.feature_names)
        with pytest.raises(ValueError):
            score_iv(m, small_data, "income")


class TestAir:
    def test_hand_fixture(self):
        # lowest five default probabilities are approved: three from group 0, two from group 1
        pd_ = np.array([0.01, 0.02, 0.03, 0.04, 0.05, 0.6, 0.7, 0.8, 0.9, 0.95])
        groups = np.array([0, 0, 0, 1, 1, 0, 0, 1, 1, 1])
        assert adverse_impact_ratio(pd_, groups, 0.5) == pytest.approx(2 / 3)

    def test_independent(self, rng):
        n = 50_000
        assert adverse_impact_ratio(rng.random(n), rng.integers(0, 2, n), 0.5) == \
            pytest.approx(1.0, abs=0.05)

    def test_disadvantaged(self, rng):
        n = 5000
        g = rng.integers(0, 2, n)
        pd_ = rng.random(n) * 0.5 + 0.3 * g
        assert adverse_impact_ratio(pd_, g, 0.5) < 1

    def test_empty_group(self):
        with pytest.raises(EmptyGroup):
            adverse_impact_ratio([0.1, 0.2], [0, 0], 0.5)

    def test_target_range(self):
        with pytest.raises(ValueError):
            adverse_impact_ratio([0.1, 0.2], [0, 1], 1.0)


class TestSolver:
    def test_loose_budget_is_unconstrained(self, small_data):
        theta = fit_unconstrained(small_data)
        pt = solve_budgeted_scorecard(small_data, 1e6)
        np.testing.assert_allclose(pt.model.coefficients, theta[1:])
        assert pt.feasible and pt.iterations == 0

    def test_tight_budget_reduces_both(self, small_data, small_sweep):
        loose = small_sweep[-1]
        tight = small_sweep[0]
        assert tight.feasible
        assert tight.iv_demographic <= 0.1
        assert tight.iv_model < loose.iv_model

    def test_point_invariants(self, small_sweep):
        for pt in small_sweep:
            assert np.all(pt.model.coefficients >= 0.0)
            if pt.feasible:
                assert pt.iv_demographic <= pt.epsilon + 1e-6

    def test_sign_sets(self, small_data):
        p = small_data.X.shape[1]
        pt = solve_budgeted_scorecard(small_data, 0.3, m_plus=range(p - 1), m_minus=(p - 1,))
        assert np.all(pt.model.coefficients[:p - 1] >= 0)
        assert pt.model.coefficients[p - 1] <= 0

    def test_epsilon_positive(self, small_data):
        with pytest.raises(ValueError):
            solve_budgeted_scorecard(small_data, 0.0)


class TestSweep:
    def test_sorted_and_complete(self, small_sweep):
        assert [p.epsilon for p in small_sweep] == [0.1, 0.3, 0.5, 1.0, 3.0]

    def test_monotone(self, small_sweep):
        for a, b in zip(small_sweep, small_sweep[1:]):
            assert a.iv_model <= b.iv_model + 1e-3
            assert a.iv_demographic <= b.iv_demographic + 1e-3
            assert a.air >= b.air - 1e-3

    def test_no_dominated_feasible_point(self, small_sweep):
        for pt in small_sweep:
            if pt.feasible:
                assert not is_dominated(pt, small_sweep)

    def test_deterministic(self, small_data, small_sweep):
        again = sweep_frontier(small_data, FairnessBudgetSweep(epsilons=(0.1, 0.3, 0.5, 1.0, 3.0)),
                               workers=1)
        for a, b in zip(small_sweep, again):
            assert np.array_equal(a.model.coefficients, b.model.coefficients)
            assert a.iv_model == b.iv_model

    def test_failures_are_flagged_not_raised(self, small_data):
        broken = ScorecardData(small_data.X, small_data.y, np.zeros_like(small_data.groups),
                               small_data.feature_names)
        pts = sweep_frontier(broken, FairnessBudgetSweep(epsilons=(0.5, 1.0)))
        assert len(pts) == 2
        assert all(not p.feasible and p.flags[0].startswith("error:") for p in pts)
        assert math.isnan(pts[0].iv_model)

    @pytest.mark.parametrize("kwargs", [
        dict(epsilons=()), dict(epsilons=(0.5, 0.1)), dict(epsilons=(-1.0,)),
        dict(score_bins=1), dict(approval_rate=0.0),
    ])
    def test_config_validation(self, kwargs):
        with pytest.raises(ValueError):
            FairnessBudgetSweep(**kwargs)

    def test_default_grid(self):
        assert FairnessBudgetSweep().epsilons == (0.1, 0.3, 0.5, 0.7, 1.0, 1.5, 2.0, 2.5, 3.0)
        assert SolverConfig().penalty_growth == 10 and SolverConfig().outer_iters == 8
