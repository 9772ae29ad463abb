import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from gpopt import (
    GaussianProcess,
    ParamSpace,
    PosteriorGrid,
    evaluate_grid,
    expected_improvement,
    max_uncertainty_point,
    probability_of_improvement,
    select_next,
    std_normal_cdf,
    std_normal_pdf,
)
from gpopt.acquisition import MEAN_VALUE, criterion_values


def gaussian_density(t):
    return math.exp(-0.5 * t * t) / math.sqrt(2 * math.pi)


def mc_expected_improvement(mean, std, y_best, n=10**7, seed=0):
    """Sample estimate of E[max(0, X - y_best)], X ~ N(mean, std^2).

    Returns (estimate, standard_error).
    """
    rng = np.random.default_rng(seed)
    draws = rng.normal(mean, std, size=n)
    gains = np.maximum(draws - y_best, 0.0)
    return float(gains.mean()), float(gains.std(ddof=1) / math.sqrt(n))


def mc_probability_of_improvement(mean, std, y_best, n=10**7, seed=0):
    rng = np.random.default_rng(seed)
    hits = rng.normal(mean, std, size=n) > y_best
    p = float(hits.mean())
    return p, math.sqrt(max(p * (1 - p), 1e-12) / n)


class TestNormalFunctions:
    def test_cdf_at_zero(self):
        assert std_normal_cdf(0.0) == pytest.approx(0.5, abs=1e-12)

    def test_pdf_at_zero(self):
        assert std_normal_pdf(0.0) == pytest.approx(1.0 / math.sqrt(2 * math.pi), abs=1e-12)

    def test_cdf_against_quadrature(self):
        # independent numerical-integration oracle for Phi(1)
        oracle, err = quad(gaussian_density, -40.0, 1.0)
        assert err < 1e-8
        assert std_normal_cdf(1.0) == pytest.approx(oracle, abs=1e-6)

    def test_cdf_monotone_and_bounded(self):
        u = np.linspace(-8, 8, 401)
        vals = std_normal_cdf(u)
        assert np.all(np.diff(vals) >= 0)
        assert vals[0] >= 0.0 and vals[-1] <= 1.0


class TestExpectedImprovement:
    def test_mean_equals_best_unit_std(self):
        assert expected_improvement(0.0, 1.0, 0.0) == pytest.approx(
            1.0 / math.sqrt(2 * math.pi), abs=1e-9
        )

    def test_degenerate_std_hinge(self):
        assert expected_improvement(-1.0, 0.0, 0.0) == 0.0
        assert expected_improvement(2.5, 0.0, 1.0) == pytest.approx(1.5)

    def test_against_monte_carlo(self):
        est, se = mc_expected_improvement(1.0, 1.0, 0.0)
        assert expected_improvement(1.0, 1.0, 0.0) == pytest.approx(est, abs=3 * se)

    def test_seeded_triples_against_monte_carlo(self):
        rng = np.random.default_rng(100)
        for i in range(5):
            mean, std = rng.normal(), float(rng.uniform(0.1, 3.0))
            y_best = rng.normal()
            est, se = mc_expected_improvement(mean, std, y_best, n=10**6, seed=i)
            assert expected_improvement(mean, std, y_best) == pytest.approx(est, abs=3 * se)

    def test_monotone_in_mean_on_lattice(self):
        means = np.linspace(-3, 3, 100)
        for std in np.linspace(0.01, 5, 100):
            vals = expected_improvement(means, np.full(100, std), 0.5)
            assert np.all(np.diff(vals) >= -1e-12)
            assert np.all(vals >= 0.0)

    @settings(max_examples=200, deadline=None)
    @given(
        mean=st.floats(-1e6, 1e6),
        std=st.floats(0, 1e6),
        y_best=st.floats(-1e6, 1e6),
    )
    def test_never_negative(self, mean, std, y_best):
        assert expected_improvement(mean, std, y_best) >= 0.0


class TestProbabilityOfImprovement:
    def test_mean_equals_best(self):
        assert probability_of_improvement(0.0, 1.0, 0.0) == pytest.approx(0.5, abs=1e-12)

    def test_ninety_five_percent_point(self):
        assert probability_of_improvement(1.645, 1.0, 0.0) == pytest.approx(0.95, abs=1e-3)

    def test_degenerate_std_step(self):
        assert probability_of_improvement(1.0, 0.0, 0.0) == 1.0
        assert probability_of_improvement(0.0, 0.0, 0.0) == 0.0
        assert probability_of_improvement(-1.0, 0.0, 0.0) == 0.0

    def test_against_monte_carlo(self):
        est, se = mc_probability_of_improvement(0.3, 0.7, 0.5)
        assert probability_of_improvement(0.3, 0.7, 0.5) == pytest.approx(est, abs=3 * se)

    @settings(max_examples=200, deadline=None)
    @given(
        mean=st.floats(-1e6, 1e6),
        std=st.floats(0, 1e6),
        y_best=st.floats(-1e6, 1e6),
    )
    def test_bounded_unit_interval(self, mean, std, y_best):
        assert 0.0 <= probability_of_improvement(mean, std, y_best) <= 1.0

    def test_monotone_in_mean(self):
        means = np.linspace(-4, 4, 200)
        vals = probability_of_improvement(means, np.full(200, 0.8), 0.0)
        assert np.all(np.diff(vals) >= 0)


class TestGridEvaluation:
    def test_training_point_has_tiny_std(self):
        space = ParamSpace(lower=[-2.0], upper=[2.0], grid_points_per_dim=41)
        gp = GaussianProcess(noise_var=0.0).fit([[0.0]], [1.0])
        grid = evaluate_grid(gp, space.candidates)
        center = np.argmin(np.abs(grid.candidates[:, 0]))
        assert grid.stds[center] <= 1e-4

    def test_stds_symmetric_around_single_central_point(self):
        space = ParamSpace(lower=[-5.0], upper=[5.0], grid_points_per_dim=101)
        gp = GaussianProcess(noise_var=0.0).fit([[0.0]], [2.0])
        grid = evaluate_grid(gp, space.candidates)
        np.testing.assert_allclose(grid.stds, grid.stds[::-1], atol=1e-8)

    def test_single_point_fit_means_are_constant(self):
        space = ParamSpace(lower=[-5.0], upper=[5.0], grid_points_per_dim=21)
        gp = GaussianProcess(noise_var=0.0).fit([[1.0]], [3.25])
        grid = evaluate_grid(gp, space.candidates)
        np.testing.assert_allclose(grid.means, 3.25, atol=1e-12)

    def test_order_matches_candidate_enumeration(self):
        space = ParamSpace(lower=[0.0, 0.0], upper=[1.0, 1.0], grid_points_per_dim=4)
        gp = GaussianProcess(gammas=[1.0, 1.0], noise_var=1e-6).fit([[0.5, 0.5]], [1.0])
        grid = evaluate_grid(gp, space.candidates)
        np.testing.assert_array_equal(grid.candidates, space.candidates)


class TestSelection:
    def grid(self, means, stds):
        n = len(means)
        return PosteriorGrid(
            candidates=np.arange(n, dtype=float).reshape(-1, 1),
            means=np.asarray(means, dtype=float),
            stds=np.asarray(stds, dtype=float),
        )

    def test_all_zero_scores_tie_to_first(self):
        g = self.grid([0.0, -1.0, -2.0], [0.0, 0.0, 0.0])
        choice = select_next(g, "expected_improvement", y_best=1.0)
        assert choice.index == 0 and choice.score == 0.0

    def test_argmax_selected(self):
        g = self.grid([0.1, 0.4], [0.0, 0.0])
        choice = select_next(g, "expected_improvement", y_best=0.0)
        assert choice.index == 1

    def test_score_matches_rescan(self):
        rng = np.random.default_rng(17)
        for _ in range(25):
            n = int(rng.integers(1, 30))
            g = self.grid(rng.normal(size=n), rng.uniform(0, 2, size=n))
            y_best = float(rng.normal())
            for criterion in ("expected_improvement", "probability_of_improvement", "mean_value"):
                choice = select_next(g, criterion, y_best)
                values = criterion_values(criterion, g.means, g.stds, y_best)
                assert choice.score == values[choice.index]
                assert np.all(values <= choice.score)
                assert not np.any(values[: choice.index] == choice.score)

    def test_mean_value_argmax_is_mean_argmax(self):
        rng = np.random.default_rng(23)
        g = self.grid(rng.normal(size=50), rng.uniform(0, 1, size=50))
        choice = select_next(g, MEAN_VALUE, y_best=123.0)
        assert choice.index == int(np.argmax(g.means))

    def test_max_uncertainty_tie_break(self):
        g = self.grid([0.0, 0.0, 0.0], [0.0, 0.5, 0.5])
        assert max_uncertainty_point(g).index == 1

    def test_max_uncertainty_single_candidate(self):
        g = self.grid([1.0], [0.3])
        assert max_uncertainty_point(g).index == 0

    def test_central_observation_pushes_uncertainty_to_edge(self):
        space = ParamSpace(lower=[-5.0], upper=[5.0], grid_points_per_dim=101)
        gp = GaussianProcess(noise_var=0.0).fit([[0.0]], [1.0])
        grid = evaluate_grid(gp, space.candidates)
        choice = max_uncertainty_point(grid)
        assert choice.index == int(np.argmax(grid.stds))
        assert abs(choice.theta[0]) == pytest.approx(5.0)

    def test_selection_pure_and_repeatable(self):
        g = self.grid([0.2, 0.9, 0.9], [0.1, 0.2, 0.3])
        a = select_next(g, "probability_of_improvement", 0.5)
        b = select_next(g, "probability_of_improvement", 0.5)
        assert a.index == b.index and a.score == b.score
