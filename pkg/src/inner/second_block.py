"""Second-block (y-step) solvers under the relative-error criterion.

A triple (y_tilde, v, eps) is a sigma-approximate solution at (Lx, z_hat, y_hat) when

    v in d_eps g(y_tilde),
    e := v - z_hat + gamma (y_tilde - Lx),
    ||e||^2 + 2 gamma eps <= sigma^2 min{gamma^2 ||Lx - y_hat||^2, ||v - z_hat||^2}.

For g(y) = 0.5 ||Ay - b||^2 the pair (y, v) with v = A'(Ay - b) turns the system into
(A'A + gamma I) y = A'b + z_hat + gamma Lx, whose residual is exactly e.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Dict, Optional

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from exceptions import DimensionMismatchError, FactorizationError, InnerSolverError
from spaces.linear import GammaMetric, Vec, ensure_finite
from .conjugate_gradient import conjugate_gradient

logger = logging.getLogger(__name__)

# Residual level at which a solve counts as exact.
EXACT_RESIDUAL_TOL = 1e-10
# Attainable CG accuracy relative to the right-hand side.
ROUNDOFF_FLOOR = 1e-12


@dataclass(frozen=True)
class ApproxSolution:
    """Certified triple (y_tilde, v, eps) with its equation residual e."""

    y_tilde: Vec
    v: Vec
    eps: float
    e: Vec
    inner_iters: int
    exact: bool = False

    def __post_init__(self):
        if self.eps < 0:
            raise InnerSolverError(f"eps must be nonnegative, got {self.eps}")


def check_sigma(e: Vec, eps: float, m: GammaMetric, sigma: float,
                lx_minus_yhat_sq: float, v_minus_zhat_sq: float) -> bool:
    """Relative-error test ||e||^2 + 2 gamma eps <= sigma^2 min{gamma^2 a, b}."""
    gamma = m.gamma
    lhs = float(np.dot(e, e)) + 2.0 * gamma * eps
    rhs = sigma ** 2 * min(gamma ** 2 * lx_minus_yhat_sq, v_minus_zhat_sq)
    return lhs <= rhs


def equation_residual(v: Vec, z_hat: Vec, y_tilde: Vec, lx: Vec, m: GammaMetric) -> Vec:
    """e = v - z_hat + gamma (y_tilde - Lx)."""
    return v - z_hat + m.gamma * (y_tilde - lx)


def certify(approx: ApproxSolution, lx: Vec, z_hat: Vec, y_hat: Vec,
            m: GammaMetric, sigma: float) -> bool:
    """Re-evaluate an ApproxSolution from scratch.

    The stored residual must match its recomputation, and the certificate
    inequality must hold (exact solves: ||e|| <= EXACT_RESIDUAL_TOL, eps = 0).
    """
    e = equation_residual(approx.v, z_hat, approx.y_tilde, lx, m)
    scale = 1.0 + float(np.linalg.norm(approx.e)) + float(np.linalg.norm(approx.v)) \
        + m.gamma * float(np.linalg.norm(approx.y_tilde))
    if np.linalg.norm(e - approx.e) > 1e-14 * scale:
        return False
    if approx.exact:
        return approx.eps == 0.0 and float(np.linalg.norm(e)) <= EXACT_RESIDUAL_TOL
    lx_yhat = lx - y_hat
    v_zhat = approx.v - z_hat
    return check_sigma(e, approx.eps, m, sigma, float(lx_yhat @ lx_yhat), float(v_zhat @ v_zhat))


class SecondBlock(ABC):
    """The function g of the second block."""

    dim: int

    @abstractmethod
    def solve(self, lx: Vec, z_hat: Vec, y_hat: Vec, m: GammaMetric, sigma: float,
              max_iters: int, warm_start: Optional[Vec] = None) -> ApproxSolution:
        """Return a sigma-approximate solution of the y-step."""
        pass

    def gradient(self, y: Vec) -> Optional[Vec]:
        """Gradient of g when available, else None."""
        return None

    def objective(self, y: Vec) -> Optional[float]:
        return None


class QuadraticLeastSquares(SecondBlock):
    """g(y) = 0.5 ||Ay - b||^2."""

    def __init__(self, A, b):
        A = ensure_finite(A, "A")
        b = ensure_finite(b, "b").reshape(-1)
        if A.ndim != 2:
            raise DimensionMismatchError(f"A must be a matrix, got shape {A.shape}")
        if A.shape[0] != b.size:
            raise DimensionMismatchError("rows of A and length of b differ",
                                         expected=A.shape[0], actual=b.size)
        self.A = A
        self.b = b
        self.dim = A.shape[1]
        self.Atb = A.T @ b
        self._gram: Optional[np.ndarray] = None
        self._factors: Dict[float, tuple] = {}

    def gradient(self, y: Vec) -> Vec:
        return self.A.T @ (self.A @ y - self.b)

    def objective(self, y: Vec) -> float:
        r = self.A @ y - self.b
        return 0.5 * float(r @ r)

    def system_matvec(self, gamma: float) -> Callable[[np.ndarray], np.ndarray]:
        A = self.A
        return lambda p: A.T @ (A @ p) + gamma * p

    def system_rhs(self, lx: Vec, z_hat: Vec, gamma: float) -> Vec:
        return self.Atb + z_hat + gamma * lx

    def factor(self, gamma: float):
        """Cholesky factors of A'A + gamma I, cached per gamma."""
        if gamma not in self._factors:
            if self._gram is None:
                self._gram = self.A.T @ self.A
            try:
                self._factors[gamma] = cho_factor(self._gram + gamma * np.eye(self.dim))
            except LinAlgError as e:
                raise FactorizationError(f"A'A + gamma I factorization failed: {e}")
        return self._factors[gamma]

    def solve(self, lx: Vec, z_hat: Vec, y_hat: Vec, m: GammaMetric, sigma: float,
              max_iters: int, warm_start: Optional[Vec] = None) -> ApproxSolution:
        if sigma == 0.0:
            return exact_inner_solve(self, lx, z_hat, y_hat, m)
        return cg_inner_solve(self, lx, z_hat, y_hat, m, sigma, max_iters, warm_start)

    def __repr__(self) -> str:
        return f"QuadraticLeastSquares({self.A.shape[0]}x{self.A.shape[1]})"


class CustomSecondBlock(SecondBlock):
    """User-supplied y-step solver.

    The callback receives (lx, z_hat, y_hat, gamma, sigma, warm_start) and must
    return an ApproxSolution; its certificate is re-checked on every call.
    """

    def __init__(self, dim: int, solver: Callable[..., ApproxSolution],
                 gradient: Optional[Callable[[Vec], Vec]] = None,
                 objective: Optional[Callable[[Vec], float]] = None):
        self.dim = dim
        self._solver = solver
        self._gradient = gradient
        self._objective = objective

    def gradient(self, y: Vec) -> Optional[Vec]:
        return None if self._gradient is None else self._gradient(y)

    def objective(self, y: Vec) -> Optional[float]:
        return None if self._objective is None else self._objective(y)

    def solve(self, lx: Vec, z_hat: Vec, y_hat: Vec, m: GammaMetric, sigma: float,
              max_iters: int, warm_start: Optional[Vec] = None) -> ApproxSolution:
        approx = self._solver(lx, z_hat, y_hat, m.gamma, sigma, warm_start)
        if not certify(approx, lx, z_hat, y_hat, m, sigma):
            e_norm = float(np.linalg.norm(approx.e))
            raise InnerSolverError("custom second-block solution fails the relative-error test",
                                   last_residual=e_norm)
        return approx


def exact_inner_solve(sb: QuadraticLeastSquares, x: Vec, z_hat: Vec, y_hat: Vec,
                      m: GammaMetric) -> ApproxSolution:
    """Solve (A'A + gamma I) y = A'b + z_hat + gamma x by Cholesky."""
    gamma = m.gamma
    rhs = sb.system_rhs(x, z_hat, gamma)
    y = cho_solve(sb.factor(gamma), rhs)
    v = sb.gradient(y)
    e = equation_residual(v, z_hat, y, x, m)
    return ApproxSolution(y_tilde=y, v=v, eps=0.0, e=e, inner_iters=0, exact=True)


def cg_inner_solve(sb: QuadraticLeastSquares, x: Vec, z_hat: Vec, y_hat: Vec,
                   m: GammaMetric, sigma: float, max_iters: int,
                   warm_start: Optional[Vec] = None) -> ApproxSolution:
    """Run CG on the y-step system until the relative-error test accepts an iterate.

    Args:
        sb: Least-squares second block
        x: Current x_k (L = Identity)
        z_hat, y_hat: Extrapolated point
        m: Gamma metric
        sigma: Relative-error tolerance in (0, 1)
        max_iters: CG step cap
        warm_start: Starting iterate (defaults to y_hat)

    Returns:
        ApproxSolution with eps = 0 and v = A'(A y_tilde - b)
    """
    for name, vec in (("x", x), ("z_hat", z_hat), ("y_hat", y_hat)):
        if np.shape(vec) != (sb.dim,):
            raise DimensionMismatchError(f"{name} does not match the second block",
                                         expected=sb.dim, actual=int(np.size(vec)))
    gamma = m.gamma
    lx_yhat = x - y_hat
    lx_minus_yhat_sq = float(lx_yhat @ lx_yhat)

    if lx_minus_yhat_sq == 0.0:
        # min{...} = 0 leaves only the exact solution admissible
        logger.debug("Degenerate relative-error bound, using the direct solve")
        return exact_inner_solve(sb, x, z_hat, y_hat, m)

    rhs = sb.system_rhs(x, z_hat, gamma)
    floor = ROUNDOFF_FLOOR * (1.0 + float(np.linalg.norm(rhs)))
    accepted: Dict[str, object] = {}

    def should_stop(y: np.ndarray, it: int) -> bool:
        v = sb.gradient(y)
        e = equation_residual(v, z_hat, y, x, m)
        v_zhat = v - z_hat
        e_norm = float(np.linalg.norm(e))
        accepted.update(y=y, v=v, e=e, it=it, e_norm=e_norm)
        if check_sigma(e, 0.0, m, sigma, lx_minus_yhat_sq, float(v_zhat @ v_zhat)):
            accepted["exact"] = False
            return True
        if e_norm <= min(floor, EXACT_RESIDUAL_TOL):
            accepted["exact"] = True
            return True
        return False

    y0 = y_hat if warm_start is None else warm_start
    result = conjugate_gradient(sb.system_matvec(gamma), rhs, y0, max_iters, should_stop)

    if not result.stopped:
        raise InnerSolverError(
            f"CG reached {max_iters} iterations without meeting the relative-error test "
            f"(sigma={sigma:g}); sigma may be too small or the system ill-conditioned",
            last_residual=float(accepted.get("e_norm", result.residual_norm)),
        )

    if accepted["exact"]:
        logger.debug(f"CG residual {accepted['e_norm']:.3e} at roundoff floor, accepted as exact")
    return ApproxSolution(
        y_tilde=accepted["y"],
        v=accepted["v"],
        eps=0.0,
        e=accepted["e"],
        inner_iters=int(accepted["it"]),
        exact=bool(accepted["exact"]),
    )
