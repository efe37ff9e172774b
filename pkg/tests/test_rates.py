"""Tests for the rate constants, ergodic accumulation and the rate report."""

import json
import math
import os
import sys
from decimal import Decimal, getcontext
from fractions import Fraction

import numpy as np
import pytest

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from exceptions import ConfigurationError
from admm.inertial_admm import run
from admm.parameters import AdmmConfig, beta_bound
from admm.problem import build_lasso_problem
from rates.diagnostics import (
    ErgodicAccumulator,
    best_index,
    check_accumulated_bound,
    check_lemma_A1,
    constant_C,
    constant_D,
    delta_value,
    ergodic_gap_constant,
    ergodic_gap_identity,
    ergodic_report,
    ergodic_update,
)
from rates.report import RateTracker, build_rate_report, check_ergodic_bound, check_pointwise_bound


def decimal_constants(alpha: float, sigma: float, tau: float):
    """C and D evaluated in 50-digit decimal arithmetic."""
    getcontext().prec = 50
    a, s, t = Decimal(alpha), Decimal(sigma), Decimal(tau)
    one = Decimal(1)
    eta = (one - t) * (one - s) ** 2 / (4 * t)
    q = (eta - one) * a * a - (one + 2 * eta) * a + eta
    factor = 2 * a * (one + a) / ((one - a) ** 2 * q)
    C = (one + factor) / (t * (one - t) * (one - s) ** 2)
    D = (one + a) / t * (one + (one + factor).sqrt())
    return float(C), float(D)


@pytest.fixture
def below_beta_run(lasso_small, lasso_reference, below_beta_config):
    A, b, nu = lasso_small
    records, status = run(build_lasso_problem(A, b, nu), below_beta_config)
    assert status.converged
    return records, lasso_reference.point, below_beta_config


class TestConstants:

    def test_no_inertia(self):
        # 1 / (0.5 * 0.5 * 1) and (1 / 0.5)(1 + 1)
        assert constant_C(0.0, 0.0, 0.5) == float(Fraction(1) / (Fraction(1, 2) * Fraction(1, 2)))
        assert constant_C(0.0, 0.0, 0.5) == 4.0
        assert constant_D(0.0, 0.0, 0.5) == 4.0

    @pytest.mark.parametrize('sigma,tau,fraction', [(0.5, 0.5, 0.9), (0.0, 0.5, 0.5), (0.9, 0.2, 0.3)])
    def test_against_extended_precision(self, sigma, tau, fraction):
        _, beta = beta_bound(sigma, tau)
        alpha = fraction * beta
        C, D = decimal_constants(alpha, sigma, tau)
        assert constant_C(alpha, sigma, tau) == pytest.approx(C, rel=1e-12)
        assert constant_D(alpha, sigma, tau) == pytest.approx(D, rel=1e-12)

    def test_constants_grow_with_alpha(self):
        _, beta = beta_bound(0.5, 0.5)
        assert constant_C(0.5 * beta, 0.5, 0.5) < constant_C(0.9 * beta, 0.5, 0.5)
        assert constant_D(0.5 * beta, 0.5, 0.5) < constant_D(0.9 * beta, 0.5, 0.5)

    def test_alpha_at_or_above_beta(self):
        with pytest.raises(ConfigurationError):
            constant_C(0.5, 0.99, 0.999)
        _, beta = beta_bound(0.5, 0.5)
        with pytest.raises(ConfigurationError):
            constant_D(1.1 * beta, 0.5, 0.5)

    def test_gap_constant_without_inertia(self):
        assert ergodic_gap_constant(0.0, 0.0, 0.5) == pytest.approx(4.0 * (1.0 + 2.0 * math.sqrt(3.0)) * 2.0)


class TestDiagnostics:

    def test_delta_value(self):
        assert delta_value(0.4, 1.0, 0.0) == 0.2
        assert delta_value(0.4, 0.5, 0.5) == pytest.approx(4.0)
        assert delta_value(0.4, 0.0, 0.5) == 0.2

    def test_best_index_needs_records(self):
        with pytest.raises(ValueError):
            best_index([], AdmmConfig().metric, 0.5)

    def test_best_index_is_minimal(self, below_beta_run):
        records, _, config = below_beta_run
        m = config.metric
        i, value = best_index(records, m, config.sigma)
        values = [delta_value(rec.pointwise_r(m), rec.approx.eps, config.sigma) for rec in records]
        assert value == min(values)
        assert i == values.index(min(values))

    def test_accumulator_matches_direct_means(self, below_beta_run):
        records, _, config = below_beta_run
        m = config.metric
        X = np.array([rec.x for rec in records])
        LX = np.array([rec.lx for rec in records])
        ZP = np.array([rec.z_prime for rec in records])
        YT = np.array([rec.approx.y_tilde for rec in records])
        V = np.array([rec.approx.v for rec in records])
        EPS = np.array([rec.approx.eps for rec in records])

        acc = ErgodicAccumulator.empty(records[0].lx.size)
        for k, rec in enumerate(records):
            acc = ergodic_update(acc, rec)
            point = ergodic_report(acc, m)
            n = k + 1
            x_a = X[:n].mean(axis=0)
            lx_a = LX[:n].mean(axis=0)
            v_a = V[:n].mean(axis=0)
            # (1/(k+1)) sum_j <z'_j, L x^a_k - L x_j>
            delta_a = np.einsum('ij,ij->i', ZP[:n], lx_a - LX[:n]).mean()
            # (1/(k+1)) sum_j [eps_j + <y_tilde_j, v_j - v^a_k>]
            eps_a = (EPS[:n] + np.einsum('ij,ij->i', YT[:n], V[:n] - v_a)).mean()

            assert acc.k == n
            np.testing.assert_allclose(point.x_a, x_a, atol=1e-12)
            np.testing.assert_allclose(point.v_a, v_a, atol=1e-12)
            assert point.delta_a == pytest.approx(delta_a, abs=1e-12)
            assert point.eps_a == pytest.approx(eps_a, abs=1e-12)
            assert point.delta_a >= -1e-12
            assert point.eps_a >= -1e-12

    def test_ergodic_report_needs_records(self):
        with pytest.raises(ValueError):
            ergodic_report(ErgodicAccumulator.empty(3), AdmmConfig().metric)

    def test_ergodic_gap_identity(self, below_beta_run):
        records, _, config = below_beta_run
        accumulated, direct = ergodic_gap_identity(records, config.metric)
        assert accumulated == pytest.approx(direct, rel=1e-8, abs=1e-10)

    def test_accumulated_bound(self, below_beta_run):
        records, p, config = below_beta_run
        check = check_accumulated_bound(records, p, config, config.metric)
        assert check
        assert check.k == records[-1].k

    def test_lemma_A1_on_toy_sequences(self):
        assert check_lemma_A1([1.0, 1.0, 0.5], [0.4], [0.0], 0.0)
        assert not check_lemma_A1([1.0, 1.0, 5.0], [0.0], [0.0], 0.0)
        # the delta budget is scaled by 1 / (1 - alpha)
        assert check_lemma_A1([1.0, 1.0, 1.0, 1.8], [0.0, 0.0], [0.25, 0.25], 0.5)
        assert not check_lemma_A1([1.0, 1.0, 1.0, 1.8], [0.0, 0.0], [0.25, 0.25], 0.0)


class TestRateReport:

    def test_bounds_hold_below_beta(self, below_beta_run):
        records, p, config = below_beta_run
        report = build_rate_report(records, config, p)
        assert report.constant_alpha
        assert report.d0 == pytest.approx(config.metric.norm(records[0].p - p))
        assert report.pointwise_ok
        assert report.ergodic_ok
        assert report.bounds_ok
        for k in (1, len(records) // 2, len(records) - 1):
            assert check_pointwise_bound(report, k)
            assert check_ergodic_bound(report, k)

    def test_out_of_range_k(self, below_beta_run):
        records, p, config = below_beta_run
        report = build_rate_report(records, config, p)
        with pytest.raises(ValueError):
            check_pointwise_bound(report, 0)
        with pytest.raises(ValueError):
            check_ergodic_bound(report, len(records))

    def test_tracker_matches_batch_report(self, lasso_small, lasso_reference, below_beta_config):
        A, b, nu = lasso_small
        tracker = RateTracker(below_beta_config, lasso_reference.point)
        records, _ = run(build_lasso_problem(A, b, nu), below_beta_config, on_record=tracker)
        streamed = tracker.report()
        batch = build_rate_report(records, below_beta_config, lasso_reference.point)
        assert streamed.best_index == batch.best_index
        assert [e.r for e in streamed.pointwise] == [e.r for e in batch.pointwise]

    def test_not_applicable_without_constants(self, lasso_small, lasso_reference):
        A, b, nu = lasso_small
        config = AdmmConfig(max_outer=50, tol=1e-30)
        records, _ = run(build_lasso_problem(A, b, nu), config)
        report = build_rate_report(records, config, lasso_reference.point)
        # alpha = 0.33 exceeds beta(0.99, 0.999)
        assert report.C is None and report.D is None
        assert report.bounds_ok is None
        assert len(report.pointwise) == 50

    def test_without_reference(self, below_beta_run):
        records, _, config = below_beta_run
        report = build_rate_report(records, config)
        assert report.d0 is None
        assert report.bounds_ok is None
        assert not check_pointwise_bound(report, 1)

    def test_to_json(self, below_beta_run, tmp_path):
        records, p, config = below_beta_run
        path = tmp_path / 'nested' / 'rates.json'
        build_rate_report(records, config, p).to_json(path)
        data = json.loads(path.read_text())
        assert data['bounds_ok'] is True
        assert len(data['pointwise']) == len(records)
        assert set(data['ergodic'][0]) == {'k', 'residual', 'delta_a', 'eps_a'}


SUITE = [(seed, d) for d in (20, 100) for seed in range(20)]


class TestSeededSuite:

    @pytest.mark.parametrize('name', ['no_inertia', 'below_beta'])
    @pytest.mark.parametrize('seed,d', SUITE)
    def test_rate_bounds_hold(self, suite, seed, d, name):
        suite_instance, suite_config = suite
        A, b, nu, ref = suite_instance(seed, d)
        config = suite_config(name)
        records, _ = run(build_lasso_problem(A, b, nu), config)
        report = build_rate_report(records, config, ref.point)
        assert report.constant_alpha
        assert report.bounds_ok is True
        if config.alpha == 0.0:
            s, t = config.sigma, config.tau
            assert report.C == pytest.approx(1.0 / (t * (1.0 - t) * (1.0 - s) ** 2), rel=1e-15)
            assert report.D == pytest.approx(2.0 / t, rel=1e-15)
        accumulated, direct = ergodic_gap_identity(records, config.metric)
        assert accumulated == pytest.approx(direct, rel=1e-8, abs=1e-10)
