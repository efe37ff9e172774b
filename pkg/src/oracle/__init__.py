"""Ground-truth generators for LASSO."""

from .lasso_oracle import (
    ReferencePoint,
    StandardAdmmIterate,
    lasso_fista,
    lasso_solution,
    lasso_support_enum,
    reference_point,
    standard_admm_reference,
)

__all__ = [
    'ReferencePoint',
    'StandardAdmmIterate',
    'lasso_fista',
    'lasso_solution',
    'lasso_support_enum',
    'reference_point',
    'standard_admm_reference',
]
