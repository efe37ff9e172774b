"""Vector spaces and linear operators."""

from .linear import (
    Dense,
    GammaMetric,
    Identity,
    LinearOp,
    PrimalDualPoint,
    Vec,
    gamma_inner,
    gamma_norm_sq,
    make_vec,
    op_adjoint,
    op_apply,
)

__all__ = [
    'Dense',
    'GammaMetric',
    'Identity',
    'LinearOp',
    'PrimalDualPoint',
    'Vec',
    'gamma_inner',
    'gamma_norm_sq',
    'make_vec',
    'op_adjoint',
    'op_apply',
]
