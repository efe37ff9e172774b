"""Rate diagnostics: pointwise residuals, ergodic means and the constants of the rate bounds."""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from exceptions import ConfigurationError
from admm.inertial_admm import IterateRecord
from admm.parameters import AdmmConfig, beta_bound, q_eval
from spaces.linear import GammaMetric, PrimalDualPoint, Vec

logger = logging.getLogger(__name__)

BOUND_SLACK = 1e-8
NONNEG_TOL = 1e-10


@dataclass(frozen=True)
class BoundCheck:
    """Outcome of a bound check; falsy when violated, with the quantities involved."""

    ok: bool
    k: int
    values: Dict[str, Any] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.ok


def pointwise_residual(rec: IterateRecord, m: GammaMetric) -> Tuple[float, float]:
    """(r_k, eps_k) with r_k = gamma ||Lx - y_tilde||^2 + (1/gamma) ||z' - v||^2."""
    return rec.pointwise_r(m), rec.approx.eps


def delta_value(r: float, eps: float, sigma: float) -> float:
    """max{r/2, 2 eps / sigma^2}; the eps term is dropped when sigma = 0."""
    if sigma == 0.0:
        return 0.5 * r
    return max(0.5 * r, 2.0 * eps / sigma ** 2)


def best_index(records: Sequence[IterateRecord], m: GammaMetric, sigma: float) -> Tuple[int, float]:
    """Index minimizing Delta_j over the records (smallest index on ties) and that minimum."""
    if not records:
        raise ValueError("best_index needs at least one record")
    best_i, best = 0, math.inf
    for i, rec in enumerate(records):
        r, eps = pointwise_residual(rec, m)
        d = delta_value(r, eps, sigma)
        if d < best:
            best_i, best = i, d
    return best_i, best


def _inertial_factor(alpha: float, sigma: float, tau: float) -> float:
    """2 alpha (1 + alpha) / ((1 - alpha)^2 q(alpha)); requires q(alpha) > 0."""
    eta, _ = beta_bound(sigma, tau)
    q = q_eval(alpha, eta)
    if alpha == 0.0:
        return 0.0
    if q <= 0.0:
        raise ConfigurationError(f"q(alpha) = {q:.3e} <= 0: alpha = {alpha} violates alpha < beta")
    return 2.0 * alpha * (1.0 + alpha) / ((1.0 - alpha) ** 2 * q)


def constant_C(alpha: float, sigma: float, tau: float) -> float:
    """C = (1 + 2a(1+a)/((1-a)^2 q(a))) / (tau (1-tau) (1-sigma)^2)."""
    factor = _inertial_factor(alpha, sigma, tau)
    return (1.0 + factor) / (tau * (1.0 - tau) * (1.0 - sigma) ** 2)


def constant_D(alpha: float, sigma: float, tau: float) -> float:
    """D = ((1 + a) / tau) (1 + sqrt(1 + 2a(1+a)/((1-a)^2 q(a))))."""
    factor = _inertial_factor(alpha, sigma, tau)
    return (1.0 + alpha) / tau * (1.0 + math.sqrt(1.0 + factor))


def ergodic_gap_constant(alpha: float, sigma: float, tau: float) -> float:
    """alpha(1+alpha)/(tau(1-alpha)q(alpha)) + D (1 + 2 sqrt 3) sqrt C."""
    eta, _ = beta_bound(sigma, tau)
    C = constant_C(alpha, sigma, tau)
    D = constant_D(alpha, sigma, tau)
    lead = 0.0
    if alpha > 0.0:
        lead = alpha * (1.0 + alpha) / (tau * (1.0 - alpha) * q_eval(alpha, eta))
    return lead + D * (1.0 + 2.0 * math.sqrt(3.0)) * math.sqrt(C)


@dataclass(frozen=True)
class ErgodicAccumulator:
    """Running sums behind the ergodic means; O(1) memory in the number of iterations."""

    k: int
    sum_x: Vec
    sum_lx: Vec
    sum_ytilde: Vec
    sum_zprime: Vec
    sum_v: Vec
    sum_zprime_Lx: float = 0.0
    sum_ytilde_v: float = 0.0
    sum_eps: float = 0.0

    @classmethod
    def empty(cls, dim: int, primal_dim: Optional[int] = None) -> "ErgodicAccumulator":
        primal_dim = dim if primal_dim is None else primal_dim
        return cls(k=0, sum_x=np.zeros(primal_dim), sum_lx=np.zeros(dim), sum_ytilde=np.zeros(dim),
                   sum_zprime=np.zeros(dim), sum_v=np.zeros(dim))


@dataclass(frozen=True)
class ErgodicPoint:
    """Ergodic means after k + 1 iterations and the associated enlargements."""

    x_a: Vec
    lx_a: Vec
    ytilde_a: Vec
    zprime_a: Vec
    v_a: Vec
    delta_a: float
    eps_a: float
    residual: float

    @property
    def p_tilde_a(self) -> PrimalDualPoint:
        return PrimalDualPoint(self.v_a, self.lx_a)


def ergodic_update(acc: ErgodicAccumulator, rec: IterateRecord) -> ErgodicAccumulator:
    """Fold one record into the accumulator."""
    approx = rec.approx
    return replace(
        acc,
        k=acc.k + 1,
        sum_x=acc.sum_x + rec.x,
        sum_lx=acc.sum_lx + rec.lx,
        sum_ytilde=acc.sum_ytilde + approx.y_tilde,
        sum_zprime=acc.sum_zprime + rec.z_prime,
        sum_v=acc.sum_v + approx.v,
        sum_zprime_Lx=acc.sum_zprime_Lx + float(rec.z_prime @ rec.lx),
        sum_ytilde_v=acc.sum_ytilde_v + float(approx.y_tilde @ approx.v),
        sum_eps=acc.sum_eps + approx.eps,
    )


def ergodic_report(acc: ErgodicAccumulator, m: GammaMetric) -> ErgodicPoint:
    """Means, delta^a, eps^a and the ergodic residual from the accumulated sums."""
    if acc.k == 0:
        raise ValueError("ergodic_report needs at least one accumulated record")
    n = float(acc.k)
    x_a = acc.sum_x / n
    lx_a = acc.sum_lx / n
    ytilde_a = acc.sum_ytilde / n
    zprime_a = acc.sum_zprime / n
    v_a = acc.sum_v / n
    delta_a = float(zprime_a @ lx_a) - acc.sum_zprime_Lx / n
    eps_a = acc.sum_eps / n + acc.sum_ytilde_v / n - float(ytilde_a @ v_a)
    d1 = lx_a - ytilde_a
    d2 = zprime_a - v_a
    residual = m.gamma * float(d1 @ d1) + float(d2 @ d2) / m.gamma
    return ErgodicPoint(x_a=x_a, lx_a=lx_a, ytilde_a=ytilde_a, zprime_a=zprime_a, v_a=v_a,
                        delta_a=delta_a, eps_a=eps_a, residual=residual)


def ergodic_gap_identity(records: Sequence[IterateRecord], m: GammaMetric) -> Tuple[float, float]:
    """(delta^a + eps^a from the accumulator, mean of eps_j + <p_breve_j - p_hat_j, p_tilde^a - p_tilde_j>)."""
    acc = ErgodicAccumulator.empty(records[0].lx.size, records[0].x.size)
    for rec in records:
        acc = ergodic_update(acc, rec)
    point = ergodic_report(acc, m)
    p_tilde_a = point.p_tilde_a
    total = 0.0
    for rec in records:
        total += rec.approx.eps + m.inner(rec.p_breve - rec.p_hat, p_tilde_a - rec.p_tilde)
    return point.delta_a + point.eps_a, total / len(records)


def check_lemma_A1(h: Sequence[float], s: Sequence[float], delta: Sequence[float], alpha: float) -> bool:
    """h_k + sum_{j<=k} s_j <= h_0 + (1/(1-alpha)) sum_{j<k} delta_j for every k >= 1.

    Args:
        h: [h_{-1}, h_0, h_1, ...]
        s: [s_1, s_2, ...]
        delta: [delta_0, delta_1, ...]
        alpha: Upper bound of the inertial parameters
    """
    if len(h) < 2:
        return True
    h0 = h[1]
    slack = BOUND_SLACK * (1.0 + h0)
    sum_s = 0.0
    sum_delta = 0.0
    for k in range(1, len(h) - 1):
        if k > len(s) or k > len(delta):
            break
        sum_s += s[k - 1]
        sum_delta += delta[k - 1]
        if h[k + 1] + sum_s > h0 + sum_delta / (1.0 - alpha) + slack:
            logger.debug(f"Accumulated inequality fails at k={k}")
            return False
    return True


def check_accumulated_bound(records: Sequence[IterateRecord], p: PrimalDualPoint, config: AdmmConfig,
                            m: GammaMetric) -> BoundCheck:
    """||p_{k+1} - p||^2 + c sum_{j<=k} ||p_tilde_j - p_hat_j||^2 <= (1 + factor) ||p_0 - p||^2."""
    c = config.tau * (1.0 - config.tau) * (1.0 - config.sigma) ** 2
    factor = _inertial_factor(config.alpha, config.sigma, config.tau)
    d0_sq = m.norm_sq(records[0].p - p)
    bound = (1.0 + factor) * d0_sq
    slack = BOUND_SLACK * (1.0 + bound)
    total = 0.0
    for rec in records:
        total += c * m.norm_sq(rec.p_tilde - rec.p_hat)
        lhs = m.norm_sq(rec.p_next - p) + total
        if lhs > bound + slack:
            return BoundCheck(False, rec.k, {"lhs": lhs, "bound": bound})
    return BoundCheck(True, records[-1].k, {"bound": bound})
