"""Solver configuration, inertial-parameter rules and the constants they depend on."""

import logging
import math
from typing import Any, Callable, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from exceptions import ConfigurationError
from spaces.linear import GammaMetric

logger = logging.getLogger(__name__)

RuleKind = Literal["constant", "summability", "belowbeta"]


def beta_bound(sigma: float, tau: float) -> tuple:
    """Return (eta, beta) with eta = (1-tau)(1-sigma)^2/(4 tau) and
    beta = 2 eta / (1 + 2 eta + sqrt(1 + 8 eta)).

    Constant inertial parameters strictly below beta keep the iteration convergent.
    """
    if not 0.0 < tau < 1.0:
        raise ConfigurationError(f"beta is defined for tau in (0, 1), got tau={tau}")
    if not 0.0 <= sigma < 1.0:
        raise ConfigurationError(f"sigma must lie in [0, 1), got sigma={sigma}")
    eta = (1.0 - tau) * (1.0 - sigma) ** 2 / (4.0 * tau)
    beta = 2.0 * eta / (1.0 + 2.0 * eta + math.sqrt(1.0 + 8.0 * eta))
    return eta, beta


def q_eval(t: float, eta: float) -> float:
    """q(t) = (eta - 1) t^2 - (1 + 2 eta) t + eta."""
    return (eta - 1.0) * t * t - (1.0 + 2.0 * eta) * t + eta


def alpha_summability(k: int, state, alpha: float, theta: float, k0: int, m: GammaMetric) -> float:
    """alpha_k = min{alpha, theta^k / ||p_k - p_{k-1}||_gamma^2}, with 1/0 read as infinity.

    Args:
        k: Outer iteration index
        state: AdmmState holding p_k and p_{k-1}
        alpha: Upper bound on alpha_k
        theta: Summability base in (0, 1)
        k0: First iteration the rule applies to; earlier iterations use alpha
        m: Gamma metric

    Returns:
        The inertial parameter for iteration k
    """
    if k < k0:
        return alpha
    dz = state.z - state.z_prev
    dy = state.y - state.y_prev
    d_k = float(dz @ dz) / m.gamma + m.gamma * float(dy @ dy)
    if d_k == 0.0:
        return alpha
    return min(alpha, theta ** k / d_k)


class InertialRule(BaseModel):
    """Policy choosing alpha_k in [0, alpha] at every outer iteration.

    constant     alpha_k = alpha for every k
    summability  alpha_k = min{alpha, theta^k / ||p_k - p_{k-1}||^2}, alpha_0 = 0
    belowbeta    nondecreasing schedule capped at alpha, with alpha < beta(sigma, tau)
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: RuleKind = "summability"
    theta: float = Field(default=0.99, gt=0.0, lt=1.0)
    k0: int = Field(default=1, ge=1)
    schedule: Optional[Callable[[int], float]] = Field(default=None, exclude=True)

    def __init__(self, **data: Any):
        try:
            super().__init__(**data)
        except ValidationError as e:
            raise ConfigurationError(f"Invalid inertial rule: {e}") from e

    def alpha_k(self, k: int, state, alpha: float, m: GammaMetric) -> float:
        """Inertial parameter for outer iteration k."""
        if self.kind == "constant":
            return alpha
        if self.kind == "summability":
            if k == 0:
                return 0.0
            return alpha_summability(k, state, alpha, self.theta, self.k0, m)

        if self.schedule is None:
            return alpha
        value = float(self.schedule(k))
        if not 0.0 <= value <= alpha:
            raise ConfigurationError(f"schedule produced alpha_{k}={value}, outside [0, {alpha}]")
        if k > 0 and value < float(self.schedule(k - 1)):
            raise ConfigurationError(f"schedule decreases at k={k}")
        return value

    def describe(self) -> str:
        if self.kind == "summability":
            return f"summability(theta={self.theta:g}, k0={self.k0})"
        return self.kind


class AdmmConfig(BaseModel):
    """Validated parameters of one solver run."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    alpha: float = Field(default=0.33, ge=0.0, lt=1.0)
    sigma: float = Field(default=0.99, ge=0.0, lt=1.0)
    tau: float = Field(default=0.999, gt=0.0, le=1.0)
    gamma: float = Field(default=1.0, gt=0.0, allow_inf_nan=False)
    inertial_rule: InertialRule = Field(default_factory=InertialRule)
    tol: float = Field(default=1e-6, gt=0.0)
    max_outer: int = Field(default=20000, ge=1)
    max_inner: int = Field(default=1000, ge=1)
    checked: bool = False
    # Admits tau = 1, which only the standard-ADMM reduction uses.
    test_mode: bool = False

    def __init__(self, **data: Any):
        try:
            super().__init__(**data)
        except ValidationError as e:
            raise ConfigurationError(f"Invalid solver configuration: {e}") from e

    @model_validator(mode="after")
    def _check_assumptions(self) -> "AdmmConfig":
        if self.tau == 1.0 and not self.test_mode:
            raise ValueError("tau = 1 is only admitted in test mode")
        if self.inertial_rule.kind == "belowbeta":
            if self.tau == 1.0:
                raise ValueError("rule 'belowbeta' needs tau < 1")
            _, beta = beta_bound(self.sigma, self.tau)
            if not self.alpha < beta:
                raise ValueError(f"rule 'belowbeta' needs alpha < beta = {beta:.6g}, got alpha = {self.alpha}")
        return self

    @property
    def metric(self) -> GammaMetric:
        return GammaMetric(self.gamma)

    def with_updates(self, **changes: Any) -> "AdmmConfig":
        """Copy with some fields replaced, re-running validation."""
        values = {name: getattr(self, name) for name in type(self).model_fields}
        values.update(changes)
        return AdmmConfig(**values)

    def echo(self) -> dict:
        """Flat view used in run summaries."""
        rule = self.inertial_rule
        return {
            "alpha": self.alpha,
            "sigma": self.sigma,
            "tau": self.tau,
            "gamma": self.gamma,
            "rule": rule.kind,
            "theta": rule.theta,
            "k0": rule.k0,
            "tol": self.tol,
            "max_outer": self.max_outer,
            "max_inner": self.max_inner,
        }

    @classmethod
    def from_settings(cls, source, **overrides: Any) -> "AdmmConfig":
        """Build a config from a Settings instance, then apply overrides."""
        rule = InertialRule(
            kind=overrides.pop("rule", source.rule),
            theta=overrides.pop("theta", source.theta),
            k0=overrides.pop("k0", source.k0),
        )
        values = {
            "alpha": source.alpha,
            "sigma": source.sigma,
            "tau": source.tau,
            "gamma": source.gamma,
            "tol": source.tol,
            "max_outer": source.max_outer,
            "max_inner": source.max_inner,
            "inertial_rule": rule,
        }
        values.update(overrides)
        return cls(**values)
