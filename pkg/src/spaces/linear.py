"""Vectors, linear operators and the gamma-weighted product space G x G."""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from exceptions import ConfigurationError, DimensionMismatchError, NonFiniteValueError

Vec = np.ndarray
VecLike = Union[np.ndarray, Iterable[float]]


def ensure_finite(values, name: str = "array") -> np.ndarray:
    """float64 copy of values; NonFiniteValueError names the first NaN or infinite entry (flat index)."""
    arr = np.array(values, dtype=np.float64)
    finite = np.isfinite(arr)
    if not finite.all():
        bad = int(np.flatnonzero(~finite.reshape(-1))[0])
        raise NonFiniteValueError(f"{name} has a non-finite entry at index {bad}", index=bad)
    return arr


def make_vec(values: VecLike, name: str = "vector") -> Vec:
    """Build an immutable float64 vector, rejecting NaN and infinite entries.

    Args:
        values: Sequence or array of reals (dimension >= 1)
        name: Name used in error messages

    Returns:
        Read-only one-dimensional numpy array
    """
    arr = np.array(values, dtype=np.float64).reshape(-1)
    if arr.size == 0:
        raise DimensionMismatchError(f"{name} must have dimension >= 1", expected=1, actual=0)
    arr = ensure_finite(arr, name)
    arr.setflags(write=False)
    return arr


def _check_dim(v: Vec, dim: int, what: str) -> None:
    if v.shape != (dim,):
        raise DimensionMismatchError(f"{what}: dimension mismatch", expected=dim, actual=v.size)


class LinearOp(ABC):
    """Linear map from H (input_dim) to G (output_dim) together with its adjoint."""

    input_dim: int
    output_dim: int

    @abstractmethod
    def _apply(self, x: Vec) -> Vec:
        pass

    @abstractmethod
    def _adjoint(self, u: Vec) -> Vec:
        pass

    @property
    def is_identity(self) -> bool:
        return False

    def apply(self, x: Vec) -> Vec:
        """Compute Lx."""
        _check_dim(np.asarray(x), self.input_dim, "operator input")
        return self._apply(np.asarray(x, dtype=np.float64))

    def adjoint(self, u: Vec) -> Vec:
        """Compute L*u."""
        _check_dim(np.asarray(u), self.output_dim, "adjoint input")
        return self._adjoint(np.asarray(u, dtype=np.float64))


class Identity(LinearOp):
    """Identity operator on R^dim."""

    def __init__(self, dim: int):
        if dim < 1:
            raise ConfigurationError(f"Identity dimension must be positive, got {dim}")
        self.input_dim = dim
        self.output_dim = dim

    @property
    def is_identity(self) -> bool:
        return True

    def _apply(self, x: Vec) -> Vec:
        return x

    def _adjoint(self, u: Vec) -> Vec:
        return u

    def __repr__(self) -> str:
        return f"Identity({self.input_dim})"


class Dense(LinearOp):
    """Dense matrix operator; apply is M @ x and adjoint is M.T @ u."""

    def __init__(self, matrix):
        m = np.array(matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
            raise DimensionMismatchError(f"Dense operator needs a non-empty 2-D matrix, got shape {m.shape}")
        m = ensure_finite(m, "Dense operator matrix")
        m.setflags(write=False)
        self.matrix = m
        self.output_dim, self.input_dim = m.shape

    def _apply(self, x: Vec) -> Vec:
        return self.matrix @ x

    def _adjoint(self, u: Vec) -> Vec:
        return self.matrix.T @ u

    def __repr__(self) -> str:
        return f"Dense({self.output_dim}x{self.input_dim})"


def op_apply(L: LinearOp, x: Vec) -> Vec:
    """Apply L to x."""
    return L.apply(x)


def op_adjoint(L: LinearOp, u: Vec) -> Vec:
    """Apply the adjoint L* to u."""
    return L.adjoint(u)


@dataclass(frozen=True)
class PrimalDualPoint:
    """A point p = (z, w) of G x G: dual block z and primal-image block w."""

    z: Vec
    w: Vec

    def __post_init__(self):
        z = ensure_finite(self.z, "z block").reshape(-1)
        w = ensure_finite(self.w, "w block").reshape(-1)
        if z.shape != w.shape:
            raise DimensionMismatchError("PrimalDualPoint blocks differ", expected=z.size, actual=w.size)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "w", w)

    @property
    def dim(self) -> int:
        return self.z.size

    def __add__(self, other: "PrimalDualPoint") -> "PrimalDualPoint":
        return PrimalDualPoint(self.z + other.z, self.w + other.w)

    def __sub__(self, other: "PrimalDualPoint") -> "PrimalDualPoint":
        return PrimalDualPoint(self.z - other.z, self.w - other.w)

    def __mul__(self, scalar: float) -> "PrimalDualPoint":
        return PrimalDualPoint(scalar * self.z, scalar * self.w)

    __rmul__ = __mul__

    @classmethod
    def zeros(cls, dim: int) -> "PrimalDualPoint":
        return cls(np.zeros(dim), np.zeros(dim))


@dataclass(frozen=True)
class GammaMetric:
    """Inner product <p, q>_gamma = (1/gamma)<z, z'> + gamma <w, w'> on G x G."""

    gamma: float

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ConfigurationError(f"gamma must be a positive real, got {self.gamma}")

    def inner(self, p: PrimalDualPoint, q: PrimalDualPoint) -> float:
        if p.dim != q.dim:
            raise DimensionMismatchError("gamma inner product of points with different dims",
                                         expected=p.dim, actual=q.dim)
        return float(np.dot(p.z, q.z) / self.gamma + self.gamma * np.dot(p.w, q.w))

    def norm_sq(self, p: PrimalDualPoint) -> float:
        return float(np.dot(p.z, p.z) / self.gamma + self.gamma * np.dot(p.w, p.w))

    def norm(self, p: PrimalDualPoint) -> float:
        return math.sqrt(self.norm_sq(p))


def gamma_inner(p: PrimalDualPoint, q: PrimalDualPoint, m: GammaMetric) -> float:
    """Gamma-weighted inner product of two points of G x G."""
    return m.inner(p, q)


def gamma_norm_sq(p: PrimalDualPoint, m: GammaMetric) -> float:
    """Squared gamma-norm (1/gamma)||z||^2 + gamma ||w||^2."""
    return m.norm_sq(p)
