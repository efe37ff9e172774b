"""Shared fixtures: seeded LASSO instances and their certified reference points."""

import os
import sys
from functools import lru_cache

import pytest

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from admm.parameters import AdmmConfig, InertialRule, beta_bound
from connectors.dataset_loader import gen_synthetic, preprocess
from oracle.lasso_oracle import lasso_solution, reference_point

def make_lasso(seed: int, n: int = 50, d: int = 20, sparsity: float = 0.2, noise: float = 0.01):
    """Preprocessed (A, b, nu) of a seeded synthetic instance."""
    ds, nu = preprocess(gen_synthetic(n, d, sparsity, noise, seed))
    return ds.A, ds.b, nu


@lru_cache(maxsize=None)
def suite_instance(seed: int, d: int):
    """(A, b, nu, reference) of the n=50 suite instance, computed once per session."""
    A, b, nu = make_lasso(seed, n=50, d=d)
    x_star, _ = lasso_solution(A, b, nu)
    return A, b, nu, reference_point(A, b, nu, x_star)


def constant_config(alpha: float, sigma: float, tau: float, **extra) -> AdmmConfig:
    return AdmmConfig(alpha=alpha, sigma=sigma, tau=tau, gamma=1.0,
                      inertial_rule=InertialRule(kind='constant'), **extra)


def suite_config(name: str) -> AdmmConfig:
    """Named configurations exercised by the seeded suites."""
    if name == 'defaults':
        return AdmmConfig()
    if name == 'no_inertia':
        return constant_config(0.0, 0.5, 0.5)
    if name == 'below_beta':
        _, beta = beta_bound(0.5, 0.5)
        return constant_config(0.9 * beta, 0.5, 0.5)
    if name == 'exact_inner':
        _, beta = beta_bound(0.0, 0.5)
        return constant_config(0.9 * beta, 0.0, 0.5)
    raise KeyError(name)


@pytest.fixture
def lasso_factory():
    return make_lasso


@pytest.fixture
def lasso_small():
    """n=50, d=20, seed 0."""
    return make_lasso(0)


@pytest.fixture
def lasso_reference(lasso_small):
    A, b, nu = lasso_small
    x_star, _ = lasso_solution(A, b, nu)
    return reference_point(A, b, nu, x_star)


@pytest.fixture
def below_beta_config():
    """Constant alpha_k = 0.9 beta(0.5, 0.5)."""
    _, beta = beta_bound(0.5, 0.5)
    return AdmmConfig(alpha=0.9 * beta, sigma=0.5, tau=0.5, gamma=1.0,
                      inertial_rule=InertialRule(kind='constant'), tol=1e-6, max_outer=20000)


@pytest.fixture
def suite():
    """Accessors for the seeded n=50 suite: (instance, config)."""
    return suite_instance, suite_config
