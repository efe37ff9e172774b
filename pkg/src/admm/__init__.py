"""Inexact inertial ADMM outer loop."""

from .inertial_admm import (
    AdmmState,
    IterateRecord,
    RunStatus,
    breve_point,
    extrapolate,
    iterate,
    run,
    stopping_residual_lasso,
    update,
    z_prime,
)
from .parameters import AdmmConfig, InertialRule, alpha_summability, beta_bound, q_eval
from .problem import Problem, build_lasso_problem, lasso_objective

__all__ = [
    'AdmmConfig',
    'AdmmState',
    'InertialRule',
    'IterateRecord',
    'Problem',
    'RunStatus',
    'alpha_summability',
    'beta_bound',
    'breve_point',
    'build_lasso_problem',
    'extrapolate',
    'iterate',
    'lasso_objective',
    'q_eval',
    'run',
    'stopping_residual_lasso',
    'update',
    'z_prime',
]
