"""Conjugate gradient for SPD systems with a caller-supplied stopping test."""

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

logger = logging.getLogger(__name__)


@dataclass
class CGResult:
    """Outcome of a conjugate gradient run."""

    x: np.ndarray
    iterations: int
    stopped: bool
    residual_norm: float


def conjugate_gradient(matvec: Callable[[np.ndarray], np.ndarray],
                       rhs: np.ndarray,
                       x0: np.ndarray,
                       max_iters: int,
                       should_stop: Callable[[np.ndarray, int], bool],
                       callback: Optional[Callable[[np.ndarray, int], None]] = None) -> CGResult:
    """Solve Mx = rhs for SPD M given through matvec.

    should_stop is evaluated on every iterate, the starting point included,
    so a warm start that already satisfies the test costs zero iterations.

    Args:
        matvec: Function computing M @ p
        rhs: Right-hand side
        x0: Starting point
        max_iters: Maximum number of CG steps
        should_stop: Predicate on (iterate, step count)
        callback: Optional observer of (iterate, step count)

    Returns:
        CGResult with the last iterate and whether should_stop accepted it
    """
    x = np.array(x0, dtype=np.float64)
    r = rhs - matvec(x)
    p = r.copy()
    rdotr = float(r @ r)

    for it in range(max_iters + 1):
        if callback is not None:
            callback(x, it)
        if should_stop(x, it):
            return CGResult(x, it, True, float(np.sqrt(rdotr)))
        if it == max_iters or rdotr == 0.0:
            break

        Mp = matvec(p)
        curvature = float(p @ Mp)
        if curvature <= 0.0:
            logger.warning(f"CG breakdown at step {it}: p'Mp = {curvature:.3e}")
            break
        step = rdotr / curvature
        x = x + step * p
        r = r - step * Mp
        new_rdotr = float(r @ r)
        p = r + (new_rdotr / rdotr) * p
        rdotr = new_rdotr

    return CGResult(x, it, False, float(np.sqrt(rdotr)))
