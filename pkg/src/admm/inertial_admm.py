"""Outer loop of the relative-error inexact inertial ADMM.

Each iteration k performs

    1. extrapolation   p_hat = p_k + alpha_k (p_k - p_{k-1})
    2. exact x-step     x_k from the first block
    3. inexact y-step   sigma-approximate (y_tilde, v, eps) from the second block
    4. relaxed update   z_{k+1} = z_hat + tau gamma (Lx - y_tilde)
                        y_{k+1} = (1 - tau) y_hat + (tau / gamma)(z_hat + gamma Lx - v)

with p = (z, y) living in G x G under the gamma-norm.
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from exceptions import DimensionMismatchError, InnerSolverError
from inner.second_block import ApproxSolution
from prox.first_block import L1
from spaces.linear import GammaMetric, LinearOp, PrimalDualPoint, Vec, ensure_finite, op_apply
from .parameters import AdmmConfig
from .problem import Problem

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AdmmState:
    """Current point p_k = (z, y), previous point p_{k-1}, and the inner warm start."""

    z: Vec
    y: Vec
    z_prev: Vec
    y_prev: Vec
    k: int = 0
    warm: Optional[Vec] = None

    @classmethod
    def initial(cls, z0: Vec, y0: Vec) -> "AdmmState":
        z0 = ensure_finite(z0, "initial z").reshape(-1)
        y0 = ensure_finite(y0, "initial y").reshape(-1)
        if z0.shape != y0.shape:
            raise DimensionMismatchError("initial z and y differ", expected=z0.size, actual=y0.size)
        return cls(z=z0, y=y0, z_prev=z0, y_prev=y0, k=0)

    def advance(self, rec: "IterateRecord") -> "AdmmState":
        return AdmmState(z=rec.z_next, y=rec.y_next, z_prev=self.z, y_prev=self.y,
                         k=self.k + 1, warm=rec.approx.y_tilde)


@dataclass(frozen=True)
class IterateRecord:
    """Everything computed during one outer iteration."""

    k: int
    alpha_k: float
    z: Vec
    y: Vec
    z_prev: Vec
    y_prev: Vec
    z_hat: Vec
    y_hat: Vec
    x: Vec
    lx: Vec
    approx: ApproxSolution
    z_prime: Vec
    breve_z: Vec
    breve_y: Vec
    z_next: Vec
    y_next: Vec
    stopping_residual: float

    @property
    def p(self) -> PrimalDualPoint:
        return PrimalDualPoint(self.z, self.y)

    @property
    def p_prev(self) -> PrimalDualPoint:
        return PrimalDualPoint(self.z_prev, self.y_prev)

    @property
    def p_hat(self) -> PrimalDualPoint:
        return PrimalDualPoint(self.z_hat, self.y_hat)

    @property
    def p_tilde(self) -> PrimalDualPoint:
        """(v_k, Lx_k)."""
        return PrimalDualPoint(self.approx.v, self.lx)

    @property
    def p_breve(self) -> PrimalDualPoint:
        return PrimalDualPoint(self.breve_z, self.breve_y)

    @property
    def p_next(self) -> PrimalDualPoint:
        return PrimalDualPoint(self.z_next, self.y_next)

    @property
    def inner_iters(self) -> int:
        return self.approx.inner_iters

    def pointwise_r(self, m: GammaMetric) -> float:
        """gamma ||Lx - y_tilde||^2 + (1/gamma) ||z' - v||^2."""
        d1 = self.lx - self.approx.y_tilde
        d2 = self.z_prime - self.approx.v
        return m.gamma * float(d1 @ d1) + float(d2 @ d2) / m.gamma


@dataclass(frozen=True)
class RunStatus:
    """Converged(k) when the tolerance was met at iteration k, else MaxIterations."""

    converged: bool
    k: int
    final_residual: float
    outer_iters: int = 0
    total_inner_iters: int = 0

    @property
    def label(self) -> str:
        return "Converged" if self.converged else "MaxIterations"

    def __str__(self) -> str:
        return f"Converged({self.k})" if self.converged else "MaxIterations"


def extrapolate(state: AdmmState, alpha_k: float) -> Tuple[Vec, Vec]:
    """z_hat = z_k + alpha_k (z_k - z_{k-1}); y_hat likewise."""
    z_hat = state.z + alpha_k * (state.z - state.z_prev)
    y_hat = state.y + alpha_k * (state.y - state.y_prev)
    return z_hat, y_hat


def update(z_hat: Vec, y_hat: Vec, x: Vec, approx: ApproxSolution, tau: float,
           m: GammaMetric, L: LinearOp) -> Tuple[Vec, Vec]:
    """Relaxed step 4; tau = 1 returns the breve point."""
    gamma = m.gamma
    lx = op_apply(L, x)
    z_next = z_hat + tau * gamma * (lx - approx.y_tilde)
    y_next = (1.0 - tau) * y_hat + (tau / gamma) * (z_hat + gamma * lx - approx.v)
    return z_next, y_next


def breve_point(z_hat: Vec, y_hat: Vec, x: Vec, approx: ApproxSolution,
                m: GammaMetric, L: LinearOp) -> Tuple[Vec, Vec]:
    """z_breve = z_hat + gamma (Lx - y_tilde); y_breve = (z_hat + gamma Lx - v) / gamma."""
    gamma = m.gamma
    lx = op_apply(L, x)
    breve_z = z_hat + gamma * (lx - approx.y_tilde)
    breve_y = (z_hat + gamma * lx - approx.v) / gamma
    return breve_z, breve_y


def z_prime(z_hat: Vec, y_hat: Vec, x: Vec, m: GammaMetric, L: LinearOp) -> Vec:
    """z' = z_hat + gamma (Lx - y_hat)."""
    return z_hat + m.gamma * (op_apply(L, x) - y_hat)


def stopping_residual_lasso(x: Vec, A, b: Vec, nu: float) -> float:
    """dist_inf(0, nu d||x||_1 + A'(Ax - b)), the LASSO stopping measure."""
    A = np.asarray(A, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if A.ndim != 2 or x.shape != (A.shape[1],):
        raise DimensionMismatchError("x does not match the columns of A",
                                     expected=A.shape[1] if A.ndim == 2 else None, actual=x.size)
    if b.shape != (A.shape[0],):
        raise DimensionMismatchError("b does not match the rows of A", expected=A.shape[0], actual=b.size)
    grad = A.T @ (A @ x - b)
    violation, _ = L1(nu, x.size).optimality_violation(x, grad)
    return violation


def iterate(problem: Problem, config: AdmmConfig, state: AdmmState, alpha_k: float,
            m: GammaMetric) -> IterateRecord:
    """Run steps 1-4 once from state."""
    L = problem.L
    z_hat, y_hat = extrapolate(state, alpha_k)
    x = problem.first.solve(z_hat, y_hat, m)
    lx = op_apply(L, x)

    try:
        approx = problem.second.solve(lx, z_hat, y_hat, m, config.sigma, config.max_inner,
                                      warm_start=state.warm)
    except InnerSolverError as e:
        e.iteration = state.k
        raise

    zp = z_prime(z_hat, y_hat, x, m, L)
    breve_z, breve_y = breve_point(z_hat, y_hat, x, approx, m, L)
    z_next, y_next = update(z_hat, y_hat, x, approx, config.tau, m, L)

    d1 = lx - approx.y_tilde
    d2 = zp - approx.v
    r_k = m.gamma * float(d1 @ d1) + float(d2 @ d2) / m.gamma
    residual = problem.stopping_residual(x, r_k)

    return IterateRecord(
        k=state.k, alpha_k=alpha_k,
        z=state.z, y=state.y, z_prev=state.z_prev, y_prev=state.y_prev,
        z_hat=z_hat, y_hat=y_hat, x=x, lx=lx, approx=approx, z_prime=zp,
        breve_z=breve_z, breve_y=breve_y, z_next=z_next, y_next=y_next,
        stopping_residual=residual,
    )


def run(problem: Problem, config: AdmmConfig, init: Optional[Tuple[Vec, Vec]] = None,
        reference: Optional[PrimalDualPoint] = None,
        on_record: Optional[Callable[[IterateRecord], None]] = None,
        keep_records: bool = True) -> Tuple[List[IterateRecord], RunStatus]:
    """Iterate until the stopping residual reaches config.tol or max_outer is hit.

    Args:
        problem: Assembled problem
        config: Validated solver configuration
        init: (z0, y0); zeros when omitted
        reference: Point of the extended solution set used by checked mode
        on_record: Called with every record as soon as it is complete
        keep_records: When False only the last record is returned

    Returns:
        (records, status)
    """
    m = config.metric
    if init is None:
        init = (np.zeros(problem.dim), np.zeros(problem.dim))
    state = AdmmState.initial(*init)
    if state.z.size != problem.dim:
        raise DimensionMismatchError("initial point does not match the problem",
                                     expected=problem.dim, actual=state.z.size)

    checker = None
    if config.checked:
        from .invariants import InvariantChecker
        checker = InvariantChecker(problem, config, reference)

    logger.info(f"Starting run on {problem.name}: alpha={config.alpha}, sigma={config.sigma}, "
                f"tau={config.tau}, gamma={config.gamma}, rule={config.inertial_rule.describe()}")

    records: List[IterateRecord] = []
    total_inner = 0
    rec = None
    converged = False

    for k in range(config.max_outer):
        alpha_k = config.inertial_rule.alpha_k(k, state, config.alpha, m)
        try:
            rec = iterate(problem, config, state, alpha_k, m)
        except InnerSolverError as e:
            logger.error(f"Inner solver failed on {problem.name}: {e}")
            raise

        if checker is not None:
            checker.check(rec)
        if on_record is not None:
            on_record(rec)
        if keep_records:
            records.append(rec)

        total_inner += rec.inner_iters
        logger.debug(f"k={k} alpha_k={alpha_k:.4g} residual={rec.stopping_residual:.3e} "
                     f"inner={rec.inner_iters}")
        state = state.advance(rec)

        if rec.stopping_residual <= config.tol:
            converged = True
            break

    if not keep_records and rec is not None:
        records = [rec]

    status = RunStatus(
        converged=converged,
        k=rec.k,
        final_residual=rec.stopping_residual,
        outer_iters=rec.k + 1,
        total_inner_iters=total_inner,
    )
    if converged:
        logger.info(f"{problem.name}: {status} after {status.outer_iters} iterations, "
                    f"{total_inner} inner iterations")
    else:
        logger.warning(f"{problem.name}: reached max_outer={config.max_outer}, "
                       f"residual {rec.stopping_residual:.3e}")
    return records, status
