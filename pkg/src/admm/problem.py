"""Problem assembly: min f(x) + g(Lx) from a first block, a second block and L."""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from exceptions import ConfigurationError, DimensionMismatchError
from inner.second_block import QuadraticLeastSquares, SecondBlock
from prox.first_block import L1, FirstBlock
from spaces.linear import Identity, LinearOp, Vec

logger = logging.getLogger(__name__)


def lasso_objective(x: Vec, A, b: Vec, nu: float) -> float:
    """0.5 ||Ax - b||^2 + nu ||x||_1."""
    r = np.asarray(A) @ x - b
    return 0.5 * float(r @ r) + nu * float(np.abs(x).sum())


@dataclass
class Problem:
    """Composite problem handed to the outer loop."""

    first: FirstBlock
    second: SecondBlock
    L: LinearOp
    name: str = "problem"

    def __post_init__(self):
        if not self.L.is_identity:
            raise ConfigurationError("the shipped first blocks require L = Identity")
        if self.first.dim != self.L.input_dim:
            raise DimensionMismatchError("first block and L disagree",
                                         expected=self.L.input_dim, actual=self.first.dim)
        if self.second.dim != self.L.output_dim:
            raise DimensionMismatchError("second block and L disagree",
                                         expected=self.L.output_dim, actual=self.second.dim)

    @property
    def dim(self) -> int:
        return self.L.output_dim

    @property
    def is_lasso(self) -> bool:
        return isinstance(self.first, L1) and isinstance(self.second, QuadraticLeastSquares)

    def stopping_residual(self, x: Vec, pointwise_r: Optional[float] = None) -> float:
        """dist_inf(0, df(x) + grad g(x)); falls back to sqrt(r_k) when g has no gradient."""
        grad = self.second.gradient(self.L.apply(x))
        if grad is None:
            if pointwise_r is None:
                raise ConfigurationError(f"{self.name}: second block has no gradient and no fallback residual")
            return math.sqrt(pointwise_r)
        violation, _ = self.first.optimality_violation(x, self.L.adjoint(grad))
        return violation

    def objective(self, x: Vec) -> Optional[float]:
        g = self.second.objective(self.L.apply(x))
        if g is None:
            return None
        return self.first.objective(x) + g


def build_lasso_problem(A, b, nu: float, name: str = "lasso") -> Problem:
    """LASSO as f = nu ||.||_1, g = 0.5 ||A . - b||^2, L = I."""
    second = QuadraticLeastSquares(A, b)
    first = L1(nu, second.dim)
    return Problem(first=first, second=second, L=Identity(second.dim), name=name)
