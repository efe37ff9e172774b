"""Ground truth for LASSO: exact small-scale solutions, certified saddle points and textbook ADMM."""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from config import settings
from exceptions import CertificationError, DimensionMismatchError, OracleError
from admm.inertial_admm import stopping_residual_lasso
from admm.problem import lasso_objective
from prox.first_block import L1, soft_threshold
from spaces.linear import PrimalDualPoint, Vec, ensure_finite

logger = logging.getLogger(__name__)

MAX_ENUM_DIM = 12
KKT_SLACK = 1e-12


@dataclass(frozen=True)
class ReferencePoint:
    """p* = (z*, w*) of the extended solution set built from a primal solution x*."""

    z_star: Vec
    w_star: Vec
    x_star: Vec
    certified_residual: float
    objective: float

    @property
    def point(self) -> PrimalDualPoint:
        return PrimalDualPoint(self.z_star, self.w_star)


@dataclass(frozen=True)
class StandardAdmmIterate:
    """(x_{k+1}, y_{k+1}, z_{k+1}) of one textbook ADMM iteration."""

    x: Vec
    y: Vec
    z: Vec


def _as_problem(A, b) -> Tuple[np.ndarray, np.ndarray]:
    A = ensure_finite(A, "A")
    b = ensure_finite(b, "b").reshape(-1)
    if A.ndim != 2:
        raise DimensionMismatchError(f"A must be a matrix, got shape {A.shape}")
    if A.shape[0] != b.size:
        raise DimensionMismatchError("rows of A and length of b differ", expected=A.shape[0], actual=b.size)
    return A, b


def _off_support_ok(A: np.ndarray, b: np.ndarray, x: np.ndarray, support, nu: float) -> bool:
    grad = A.T @ (A @ x - b)
    off = np.ones(x.size, dtype=bool)
    off[list(support)] = False
    return bool(np.all(np.abs(grad[off]) <= nu + KKT_SLACK))


def lasso_support_enum(A, b, nu: float) -> Tuple[Vec, float]:
    """Exact LASSO minimizer by enumerating supports and sign patterns.

    Supports are visited by increasing size, then lexicographically. For each support the
    reduced normal equations A_S'A_S x_S = A_S'b - nu s are solved for every sign pattern s
    and the first sign-consistent pattern satisfying the off-support KKT test is returned.
    Falls back to FISTA when d > 12 or no pattern qualifies.

    Returns:
        (x_star, objective)
    """
    A, b = _as_problem(A, b)
    n, d = A.shape
    if d > MAX_ENUM_DIM:
        logger.warning(f"d={d} exceeds the enumeration limit {MAX_ENUM_DIM}, using FISTA")
        x = lasso_fista(A, b, nu, settings.oracle_tol)
        return x, lasso_objective(x, A, b, nu)

    for size in range(0, min(n, d) + 1):
        for support in itertools.combinations(range(d), size):
            x = _solve_support(A, b, nu, support)
            if x is not None:
                logger.debug(f"Support enumeration accepted support {support}")
                return x, lasso_objective(x, A, b, nu)

    logger.warning("No sign pattern passed the KKT test (rank-deficient A?), using FISTA")
    x = lasso_fista(A, b, nu, settings.oracle_tol)
    return x, lasso_objective(x, A, b, nu)


def _solve_support(A: np.ndarray, b: np.ndarray, nu: float, support) -> Optional[np.ndarray]:
    d = A.shape[1]
    if not support:
        x = np.zeros(d)
        return x if _off_support_ok(A, b, x, (), nu) else None

    cols = list(support)
    A_S = A[:, cols]
    try:
        factor = cho_factor(A_S.T @ A_S)
    except LinAlgError:
        return None
    base = cho_solve(factor, A_S.T @ b)
    # columns of `signs` run over {-1, +1}^|S| in lexicographic order
    signs = np.array(list(itertools.product((-1.0, 1.0), repeat=len(cols)))).T
    candidates = base[:, None] - nu * cho_solve(factor, signs)
    consistent = np.all(candidates * signs > 0, axis=0)
    for j in np.flatnonzero(consistent):
        x = np.zeros(d)
        x[cols] = candidates[:, j]
        if _off_support_ok(A, b, x, cols, nu):
            return x
    return None


def _polish(A: np.ndarray, b: np.ndarray, nu: float, x: np.ndarray, tol: float) -> Optional[np.ndarray]:
    """Re-solve the reduced normal equations on the support of x; keep the result if it passes KKT."""
    cols = np.flatnonzero(x)
    if cols.size > A.shape[0]:
        return None
    candidate = np.zeros_like(x)
    if cols.size:
        A_S = A[:, cols]
        try:
            factor = cho_factor(A_S.T @ A_S)
        except LinAlgError:
            return None
        signs = np.sign(x[cols])
        x_S = cho_solve(factor, A_S.T @ b - nu * signs)
        if np.any(np.sign(x_S) != signs):
            return None
        candidate[cols] = x_S
    if stopping_residual_lasso(candidate, A, b, nu) <= tol:
        return candidate
    return None


def lasso_fista(A, b, nu: float, tol: float = 1e-10, max_iters: int = 200000,
                polish_every: int = 50) -> Vec:
    """Accelerated proximal gradient with gradient-based adaptive restart.

    Args:
        A: Design matrix (n x d)
        b: Observations (n)
        nu: l1 weight
        tol: Target stopping residual
        max_iters: Iteration cap
        polish_every: Period of the support polish

    Returns:
        x with stopping_residual_lasso(x) <= tol
    """
    A, b = _as_problem(A, b)
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    d = A.shape[1]
    x = np.zeros(d)
    lipschitz = float(np.linalg.norm(A, 2)) ** 2
    if lipschitz == 0.0:
        return x
    step = 1.0 / lipschitz

    y = x.copy()
    t = 1.0
    residual = math.inf
    for it in range(1, max_iters + 1):
        grad = A.T @ (A @ y - b)
        x_new = soft_threshold(y - step * grad, step * nu)
        if float(np.dot(y - x_new, x_new - x)) > 0.0:
            # momentum points uphill, restart
            t = 1.0
            y = x_new
        else:
            t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
            y = x_new + ((t - 1.0) / t_new) * (x_new - x)
            t = t_new
        x = x_new

        residual = stopping_residual_lasso(x, A, b, nu)
        if residual <= tol:
            logger.debug(f"FISTA reached residual {residual:.3e} in {it} iterations")
            return x
        if it % polish_every == 0:
            polished = _polish(A, b, nu, x, tol)
            if polished is not None:
                logger.debug(f"FISTA support polish accepted after {it} iterations")
                return polished

    raise OracleError(f"FISTA did not reach residual {tol:g} in {max_iters} iterations",
                      last_residual=residual)


def lasso_solution(A, b, nu: float, tol: Optional[float] = None) -> Tuple[Vec, float]:
    """Exact enumeration for small d, FISTA otherwise."""
    A, b = _as_problem(A, b)
    if A.shape[1] <= MAX_ENUM_DIM:
        return lasso_support_enum(A, b, nu)
    x = lasso_fista(A, b, nu, tol or settings.oracle_tol)
    return x, lasso_objective(x, A, b, nu)


def reference_point(A, b, nu: float, x_star: Vec, tol: float = 1e-10) -> ReferencePoint:
    """Certified p* = (A'(Ax* - b), x*) of the extended solution set.

    Raises:
        CertificationError: when -z* is not in nu d||x*||_1 up to tol
    """
    A, b = _as_problem(A, b)
    x_star = ensure_finite(x_star, "x*")
    if x_star.shape != (A.shape[1],):
        raise DimensionMismatchError("x* does not match the columns of A", expected=A.shape[1], actual=x_star.size)
    z_star = A.T @ (A @ x_star - b)
    violation, worst = L1(nu, x_star.size).optimality_violation(x_star, z_star)
    if violation > tol:
        raise CertificationError("reference point fails the optimality certificate",
                                 worst_index=worst, violation=violation)
    return ReferencePoint(z_star=z_star, w_star=x_star.copy(), x_star=x_star.copy(),
                          certified_residual=violation, objective=lasso_objective(x_star, A, b, nu))


def standard_admm_reference(A, b, nu: float, gamma: float, iters: int,
                            init: Optional[Tuple[Vec, Vec]] = None) -> List[StandardAdmmIterate]:
    """Textbook exact ADMM for LASSO with L = I.

    x-step by soft thresholding, y-step by a Cholesky solve of (A'A + gamma I),
    z-step z_{k+1} = z_k + gamma (x_{k+1} - y_{k+1}).
    """
    A, b = _as_problem(A, b)
    d = A.shape[1]
    if init is None:
        z, y = np.zeros(d), np.zeros(d)
    else:
        z = ensure_finite(init[0], "initial z").reshape(-1)
        y = ensure_finite(init[1], "initial y").reshape(-1)
        if z.shape != (d,) or y.shape != (d,):
            raise DimensionMismatchError("initial point does not match the columns of A", expected=d, actual=z.size)
    factor = cho_factor(A.T @ A + gamma * np.eye(d))
    Atb = A.T @ b

    iterates = []
    for _ in range(iters):
        x = soft_threshold(y - z / gamma, nu / gamma)
        y = cho_solve(factor, Atb + z + gamma * x)
        z = z + gamma * (x - y)
        iterates.append(StandardAdmmIterate(x=x, y=y, z=z))
    return iterates
