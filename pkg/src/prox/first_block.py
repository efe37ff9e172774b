"""Exact solvers for the first ADMM block (the x-step).

Both shipped blocks require L = Identity, so the x-step

    x in argmin f(x) + <z_hat, x - y_hat> + (gamma/2) ||x - y_hat||^2

has a closed form or a single SPD solve.
"""

import logging
import math
from abc import ABC, abstractmethod
from typing import Dict, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from exceptions import ConfigurationError, DimensionMismatchError, FactorizationError
from spaces.linear import GammaMetric, Vec, ensure_finite

logger = logging.getLogger(__name__)


def soft_threshold(u: Vec, kappa: float) -> Vec:
    """Componentwise sign(u_i) * max(|u_i| - kappa, 0)."""
    if kappa < 0:
        raise ConfigurationError(f"soft-threshold level must be nonnegative, got {kappa}")
    u = np.asarray(u, dtype=np.float64)
    return np.sign(u) * np.maximum(np.abs(u) - kappa, 0.0)


class FirstBlock(ABC):
    """The function f of the first block, paired with L = Identity."""

    dim: int

    @abstractmethod
    def solve(self, z_hat: Vec, y_hat: Vec, metric: GammaMetric) -> Vec:
        """Return the exact minimizer of the x-step."""
        pass

    @abstractmethod
    def objective(self, x: Vec) -> float:
        """Evaluate f(x)."""
        pass

    @abstractmethod
    def optimality_violation(self, x: Vec, z_prime: Vec) -> Tuple[float, int]:
        """Measure how far -z' is from the subdifferential of f at x.

        Returns:
            (largest componentwise violation, index where it occurs)
        """
        pass

    def _check(self, v: Vec, what: str) -> None:
        if np.shape(v) != (self.dim,):
            raise DimensionMismatchError(f"{what} does not match the first block",
                                         expected=self.dim, actual=int(np.size(v)))


class L1(FirstBlock):
    """f(x) = nu * ||x||_1."""

    def __init__(self, nu: float, dim: int):
        if not (math.isfinite(nu) and nu > 0):
            raise ConfigurationError(f"L1 weight nu must be a positive real, got {nu}")
        if dim < 1:
            raise ConfigurationError(f"L1 block dimension must be positive, got {dim}")
        self.nu = float(nu)
        self.dim = dim

    def solve(self, z_hat: Vec, y_hat: Vec, metric: GammaMetric) -> Vec:
        self._check(z_hat, "z_hat")
        self._check(y_hat, "y_hat")
        gamma = metric.gamma
        return soft_threshold(y_hat - z_hat / gamma, self.nu / gamma)

    def objective(self, x: Vec) -> float:
        return self.nu * float(np.abs(x).sum())

    def optimality_violation(self, x: Vec, z_prime: Vec) -> Tuple[float, int]:
        x = np.asarray(x)
        neg = -np.asarray(z_prime)
        zero = x == 0
        violation = np.where(
            zero,
            np.maximum(np.abs(neg) - self.nu, 0.0),
            np.abs(neg - self.nu * np.sign(x)),
        )
        worst = int(np.argmax(violation))
        return float(violation[worst]), worst

    def __repr__(self) -> str:
        return f"L1(nu={self.nu:g}, dim={self.dim})"


class CustomQuadratic(FirstBlock):
    """f(x) = 0.5 x'Qx + c'x with Q symmetric positive definite."""

    def __init__(self, Q, c):
        Q = ensure_finite(Q, "Q")
        c = ensure_finite(c, "c").reshape(-1)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise DimensionMismatchError(f"Q must be square, got shape {Q.shape}")
        if c.size != Q.shape[0]:
            raise DimensionMismatchError("c does not match Q", expected=Q.shape[0], actual=c.size)
        if not np.allclose(Q, Q.T, rtol=1e-12, atol=1e-14):
            raise FactorizationError("Q is not symmetric")
        try:
            cho_factor(Q)
        except LinAlgError as e:
            raise FactorizationError(f"Q is not positive definite: {e}")
        self.Q = Q
        self.c = c
        self.dim = c.size
        self._factors: Dict[float, tuple] = {}

    def _factor(self, gamma: float):
        if gamma not in self._factors:
            try:
                self._factors[gamma] = cho_factor(self.Q + gamma * np.eye(self.dim))
            except LinAlgError as e:
                raise FactorizationError(f"Q + gamma*I factorization failed: {e}")
            logger.debug(f"Factored Q + {gamma:g} I (dim {self.dim})")
        return self._factors[gamma]

    def solve(self, z_hat: Vec, y_hat: Vec, metric: GammaMetric) -> Vec:
        self._check(z_hat, "z_hat")
        self._check(y_hat, "y_hat")
        gamma = metric.gamma
        rhs = gamma * y_hat - z_hat - self.c
        return cho_solve(self._factor(gamma), rhs)

    def objective(self, x: Vec) -> float:
        return float(0.5 * x @ self.Q @ x + self.c @ x)

    def optimality_violation(self, x: Vec, z_prime: Vec) -> Tuple[float, int]:
        violation = np.abs(-np.asarray(z_prime) - (self.Q @ x + self.c))
        worst = int(np.argmax(violation))
        return float(violation[worst]), worst

    def __repr__(self) -> str:
        return f"CustomQuadratic(dim={self.dim})"


def solve_first_block(fb: FirstBlock, z_hat: Vec, y_hat: Vec, m: GammaMetric) -> Vec:
    """Exact x-step of the outer iteration."""
    return fb.solve(z_hat, y_hat, m)
