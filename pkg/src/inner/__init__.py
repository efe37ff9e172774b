"""Second-block (y-step) solvers and the relative-error certificate."""

from .conjugate_gradient import CGResult, conjugate_gradient
from .second_block import (
    ApproxSolution,
    CustomSecondBlock,
    QuadraticLeastSquares,
    SecondBlock,
    certify,
    cg_inner_solve,
    check_sigma,
    equation_residual,
    exact_inner_solve,
)

__all__ = [
    'ApproxSolution',
    'CGResult',
    'CustomSecondBlock',
    'QuadraticLeastSquares',
    'SecondBlock',
    'certify',
    'cg_inner_solve',
    'check_sigma',
    'conjugate_gradient',
    'equation_residual',
    'exact_inner_solve',
]
