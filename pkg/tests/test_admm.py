"""Tests for the outer loop, its configuration and its per-iteration invariants."""

import math
import os
import sys

import numpy as np
import pytest

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from exceptions import ConfigurationError, DimensionMismatchError, InnerSolverError, NonFiniteValueError
from admm.inertial_admm import AdmmState, run, stopping_residual_lasso
from admm.invariants import (
    InvariantChecker,
    angle_inequality_gap,
    extrapolation_identity_gap,
    fejer_gap,
    fejer_terms,
    h_recursion_gap,
    hsd_sequences,
    step_sum_bound,
    summability_partial_sums,
)
from admm.parameters import AdmmConfig, InertialRule, beta_bound, q_eval
from admm.problem import Problem, build_lasso_problem, lasso_objective
from config import Settings
from inner.second_block import QuadraticLeastSquares
from oracle.lasso_oracle import lasso_solution, reference_point, standard_admm_reference
from prox.first_block import L1
from rates.diagnostics import check_lemma_A1
from spaces.linear import Dense, Identity


class TestParameters:

    def test_beta_bound_closed_form(self):
        eta, beta = beta_bound(0.0, 0.5)
        assert eta == pytest.approx(0.25)
        assert beta == pytest.approx(0.5 / (1.5 + math.sqrt(3.0)), rel=1e-14)

    @pytest.mark.parametrize('sigma,tau', [(0.0, 0.5), (0.5, 0.5), (0.99, 0.999), (0.3, 0.1)])
    def test_beta_is_root_of_q(self, sigma, tau):
        eta, beta = beta_bound(sigma, tau)
        assert 0.0 < beta < 1.0
        assert q_eval(beta, eta) == pytest.approx(0.0, abs=1e-14)
        assert q_eval(0.5 * beta, eta) > 0.0

    @pytest.mark.parametrize('sigma,tau', [(0.5, 1.0), (0.5, 0.0), (1.0, 0.5), (-0.1, 0.5)])
    def test_beta_bound_domain(self, sigma, tau):
        with pytest.raises(ConfigurationError):
            beta_bound(sigma, tau)

    def test_default_config_echo(self):
        config = AdmmConfig.from_settings(Settings(_env_file=None))
        echo = config.echo()
        assert (echo['alpha'], echo['sigma'], echo['tau'], echo['gamma'], echo['theta'], echo['tol']) \
            == (0.33, 0.99, 0.999, 1.0, 0.99, 1e-6)
        assert echo['rule'] == 'summability'

    @pytest.mark.parametrize('changes', [
        {'alpha': 1.0},
        {'alpha': -0.1},
        {'sigma': 1.0},
        {'tau': 0.0},
        {'tau': 1.0},
        {'gamma': 0.0},
        {'gamma': math.inf},
        {'tol': 0.0},
    ])
    def test_invalid_config(self, changes):
        with pytest.raises(ConfigurationError):
            AdmmConfig(**changes)

    def test_tau_one_admitted_in_test_mode(self):
        config = AdmmConfig(tau=1.0, test_mode=True)
        assert config.tau == 1.0

    def test_belowbeta_requires_alpha_below_beta(self):
        with pytest.raises(ConfigurationError):
            AdmmConfig(alpha=0.33, inertial_rule=InertialRule(kind='belowbeta'))
        _, beta = beta_bound(0.5, 0.5)
        config = AdmmConfig(alpha=0.5 * beta, sigma=0.5, tau=0.5, inertial_rule=InertialRule(kind='belowbeta'))
        assert config.inertial_rule.kind == 'belowbeta'

    def test_invalid_rule(self):
        with pytest.raises(ConfigurationError):
            InertialRule(kind='nesterov')
        with pytest.raises(ConfigurationError):
            InertialRule(theta=1.0)

    def test_with_updates_revalidates(self):
        config = AdmmConfig()
        assert config.with_updates(alpha=0.1).alpha == 0.1
        with pytest.raises(ConfigurationError):
            config.with_updates(alpha=2.0)

    def test_summability_rule(self):
        rule = InertialRule(kind='summability', theta=0.5)
        m = AdmmConfig().metric
        z0 = np.zeros(2)
        state = AdmmState(z=np.array([2.0, 0.0]), y=np.zeros(2), z_prev=z0, y_prev=np.zeros(2), k=3)
        assert rule.alpha_k(0, state, 0.33, m) == 0.0
        # theta^3 / ||p_3 - p_2||^2 = 0.125 / 4
        assert rule.alpha_k(3, state, 0.33, m) == pytest.approx(0.125 / 4.0)
        still = AdmmState.initial(z0, z0)
        assert rule.alpha_k(3, still, 0.33, m) == 0.33

    def test_belowbeta_schedule(self):
        m = AdmmConfig().metric
        state = AdmmState.initial(np.zeros(2), np.zeros(2))
        ramp = InertialRule(kind='belowbeta', schedule=lambda k: min(0.01 * k, 0.04))
        assert ramp.alpha_k(2, state, 0.04, m) == pytest.approx(0.02)
        assert ramp.alpha_k(10, state, 0.04, m) == pytest.approx(0.04)

        decreasing = InertialRule(kind='belowbeta', schedule=lambda k: 0.04 - 0.01 * k)
        with pytest.raises(ConfigurationError):
            decreasing.alpha_k(1, state, 0.04, m)
        too_big = InertialRule(kind='belowbeta', schedule=lambda k: 0.5)
        with pytest.raises(ConfigurationError):
            too_big.alpha_k(0, state, 0.04, m)


class TestProblem:

    def test_requires_identity(self, lasso_small):
        A, b, nu = lasso_small
        d = A.shape[1]
        with pytest.raises(ConfigurationError):
            Problem(L1(nu, d), QuadraticLeastSquares(A, b), Dense(np.eye(d)))
        with pytest.raises(DimensionMismatchError):
            Problem(L1(nu, d + 1), QuadraticLeastSquares(A, b), Identity(d))

    def test_lasso_problem(self, lasso_small):
        A, b, nu = lasso_small
        problem = build_lasso_problem(A, b, nu)
        x = np.zeros(A.shape[1])
        assert problem.is_lasso
        assert problem.objective(x) == pytest.approx(lasso_objective(x, A, b, nu))
        assert problem.stopping_residual(x) == pytest.approx(stopping_residual_lasso(x, A, b, nu))

    def test_stopping_residual_dimension_checks(self, lasso_small):
        A, b, nu = lasso_small
        with pytest.raises(DimensionMismatchError):
            stopping_residual_lasso(np.zeros(A.shape[1] + 1), A, b, nu)
        with pytest.raises(DimensionMismatchError):
            stopping_residual_lasso(np.zeros(A.shape[1]), A, b[:-1], nu)


class TestRun:

    @pytest.mark.parametrize('seed', range(20))
    def test_reduces_to_standard_admm(self, lasso_factory, seed):
        A, b, nu = lasso_factory(seed, n=30, d=6)
        config = AdmmConfig(alpha=0.0, sigma=0.0, tau=1.0, test_mode=True,
                            inertial_rule=InertialRule(kind='constant'), tol=1e-30, max_outer=50)
        records, _ = run(build_lasso_problem(A, b, nu), config)
        reference = standard_admm_reference(A, b, nu, config.gamma, 50)
        assert records
        for rec, ref in zip(records, reference):
            np.testing.assert_allclose(rec.x, ref.x, atol=1e-10)
            np.testing.assert_allclose(rec.z_next, ref.z, atol=1e-10)
            np.testing.assert_allclose(rec.y_next, ref.y, atol=1e-10)

    @pytest.mark.parametrize('rule', ['summability', 'belowbeta'])
    @pytest.mark.parametrize('seed', range(4))
    def test_converges_to_oracle(self, lasso_factory, rule, seed):
        A, b, nu = lasso_factory(seed)
        if rule == 'belowbeta':
            _, beta = beta_bound(0.5, 0.5)
            config = AdmmConfig(alpha=0.9 * beta, sigma=0.5, tau=0.5,
                                inertial_rule=InertialRule(kind='belowbeta'), tol=1e-8)
        else:
            config = AdmmConfig(tol=1e-8)
        records, status = run(build_lasso_problem(A, b, nu), config, keep_records=False)
        assert status.converged
        assert status.final_residual <= 1e-8
        assert str(status) == f"Converged({status.k})"

        x_star, objective = lasso_solution(A, b, nu)
        last = records[-1]
        assert lasso_objective(last.x, A, b, nu) == pytest.approx(objective, rel=1e-8)

        ref = reference_point(A, b, nu, x_star)
        assert np.linalg.norm(last.approx.v - ref.z_star) <= 1e-4
        assert np.linalg.norm(last.lx - ref.w_star) <= 1e-4
        assert np.linalg.norm(last.approx.y_tilde - ref.w_star) <= 1e-4
        assert np.linalg.norm(last.z - ref.z_star) <= 1e-4
        assert np.linalg.norm(last.y - ref.w_star) <= 1e-4

    def test_max_iterations_status(self, lasso_small):
        A, b, nu = lasso_small
        records, status = run(build_lasso_problem(A, b, nu), AdmmConfig(tol=1e-30, max_outer=3))
        assert not status.converged
        assert str(status) == 'MaxIterations'
        assert len(records) == 3
        assert status.total_inner_iters == sum(rec.inner_iters for rec in records)

    def test_records_are_linked(self, lasso_small):
        A, b, nu = lasso_small
        records, _ = run(build_lasso_problem(A, b, nu), AdmmConfig(max_outer=20, tol=1e-30))
        for before, after in zip(records, records[1:]):
            np.testing.assert_array_equal(after.z, before.z_next)
            np.testing.assert_array_equal(after.y_prev, before.y)
            assert after.k == before.k + 1

    def test_callback_sees_every_record(self, lasso_small):
        A, b, nu = lasso_small
        seen = []
        records, status = run(build_lasso_problem(A, b, nu), AdmmConfig(max_outer=10, tol=1e-30),
                              on_record=seen.append, keep_records=False)
        assert len(seen) == 10
        assert len(records) == 1 and records[0] is seen[-1]

    def test_inner_failure_carries_iteration(self, lasso_small):
        A, b, nu = lasso_small
        config = AdmmConfig(sigma=1e-8, max_inner=1)
        with pytest.raises(InnerSolverError) as exc:
            run(build_lasso_problem(A, b, nu), config)
        assert exc.value.iteration is not None

    def test_initial_point_dimension(self, lasso_small):
        A, b, nu = lasso_small
        with pytest.raises(DimensionMismatchError):
            run(build_lasso_problem(A, b, nu), AdmmConfig(), init=(np.zeros(3), np.zeros(3)))

    @pytest.mark.parametrize('init', [([np.nan], [0.0]), ([0.0], [np.inf])])
    def test_initial_point_must_be_finite(self, init):
        with pytest.raises(NonFiniteValueError):
            run(build_lasso_problem([[1.0]], [2.0], 1.0), AdmmConfig(max_outer=5), init=init)

    def test_data_must_be_finite(self):
        with pytest.raises(NonFiniteValueError):
            build_lasso_problem([[1.0]], [np.inf], 1.0)
        with pytest.raises(NonFiniteValueError):
            build_lasso_problem([[np.nan, 1.0]], [1.0], 1.0)


class TestInvariants:

    def test_checked_run_with_defaults(self, lasso_small, lasso_reference):
        A, b, nu = lasso_small
        config = AdmmConfig(checked=True, max_outer=300)
        records, _ = run(build_lasso_problem(A, b, nu), config, reference=lasso_reference.point)
        assert records

    def test_checked_run_below_beta(self, lasso_small, lasso_reference, below_beta_config):
        A, b, nu = lasso_small
        problem = build_lasso_problem(A, b, nu)
        checker = InvariantChecker(problem, below_beta_config, lasso_reference.point)
        records, status = run(problem, below_beta_config, on_record=checker.check)
        assert status.converged
        assert checker.checked == len(records)

    @pytest.mark.parametrize('name', ['no_inertia', 'below_beta'])
    def test_fejer_terms_and_extrapolation(self, lasso_small, lasso_reference, suite, name):
        A, b, nu = lasso_small
        _, suite_config = suite
        config = suite_config(name)
        m = config.metric
        p = lasso_reference.point
        records, _ = run(build_lasso_problem(A, b, nu), config)
        for rec in records:
            assert fejer_terms(rec, p, config, m).holds()
            assert fejer_gap(rec, p, config, m) <= 1e-8
            assert h_recursion_gap(rec, p, config, m) <= 1e-8
            assert angle_inequality_gap(rec, p, m) <= 1e-8
            assert extrapolation_identity_gap(rec, p, m) <= 1e-12

    def test_step_sum_bound(self, lasso_small, lasso_reference, below_beta_config):
        A, b, nu = lasso_small
        m = below_beta_config.metric
        records, _ = run(build_lasso_problem(A, b, nu), below_beta_config)
        sums, bound = step_sum_bound(records, lasso_reference.point, below_beta_config, m)
        assert all(later >= earlier for earlier, later in zip(sums, sums[1:]))
        assert sums[-1] <= bound * (1.0 + 1e-8)

    def test_accumulated_inequality(self, lasso_small, lasso_reference, below_beta_config):
        A, b, nu = lasso_small
        m = below_beta_config.metric
        records, status = run(build_lasso_problem(A, b, nu), below_beta_config)
        assert status.converged
        h, s, delta = hsd_sequences(records, lasso_reference.point, below_beta_config, m)
        assert h[0] == h[1]
        assert check_lemma_A1(h, s, delta, below_beta_config.alpha)

    @pytest.mark.parametrize('seed', range(3))
    def test_summability_partial_sums(self, lasso_factory, seed):
        A, b, nu = lasso_factory(seed)
        config = AdmmConfig()
        records, _ = run(build_lasso_problem(A, b, nu), config)
        rule = config.inertial_rule
        for lhs, rhs in summability_partial_sums(records, rule.theta, rule.k0, config.metric):
            assert lhs <= rhs * (1.0 + 1e-12) + 1e-15


SUITE = [(seed, d) for d in (20, 100) for seed in range(20)]


class TestSeededSuite:
    """Twenty seeded n=50 instances at d = 20 and d = 100."""

    @pytest.mark.parametrize('name', ['defaults', 'no_inertia', 'below_beta'])
    @pytest.mark.parametrize('seed,d', SUITE)
    def test_checked_run(self, suite, seed, d, name):
        suite_instance, suite_config = suite
        A, b, nu, ref = suite_instance(seed, d)
        config = suite_config(name)
        problem = build_lasso_problem(A, b, nu)
        checker = InvariantChecker(problem, config, ref.point)
        records, _ = run(problem, config, on_record=checker.check)
        assert records
        assert checker.checked == len(records)

    @pytest.mark.parametrize('name', ['no_inertia', 'below_beta', 'exact_inner'])
    @pytest.mark.parametrize('seed,d', SUITE)
    def test_accumulated_inequality(self, suite, seed, d, name):
        suite_instance, suite_config = suite
        A, b, nu, ref = suite_instance(seed, d)
        config = suite_config(name)
        records, _ = run(build_lasso_problem(A, b, nu), config)
        h, s, delta = hsd_sequences(records, ref.point, config, config.metric)
        assert check_lemma_A1(h, s, delta, config.alpha)

    @pytest.mark.parametrize('name', ['defaults', 'below_beta'])
    @pytest.mark.parametrize('seed,d', SUITE)
    def test_reaches_reference_objective(self, suite, seed, d, name):
        suite_instance, suite_config = suite
        A, b, nu, ref = suite_instance(seed, d)
        config = suite_config(name).with_updates(tol=1e-8)
        records, status = run(build_lasso_problem(A, b, nu), config, keep_records=False)
        assert status.converged
        assert status.final_residual <= 1e-6
        objective = lasso_objective(ref.x_star, A, b, nu)
        assert lasso_objective(records[-1].x, A, b, nu) == pytest.approx(objective, rel=1e-8, abs=1e-12)
