"""Per-iteration identities and inequalities of the outer loop.

Each ``*_gap`` function returns a nonnegative number that is zero (up to rounding)
when the corresponding property holds. ``InvariantChecker`` applies them to every
record of a checked run and raises ``InvariantViolation`` on the first failure.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from exceptions import InvariantViolation
from inner.second_block import certify
from spaces.linear import GammaMetric, PrimalDualPoint
from .inertial_admm import IterateRecord
from .parameters import AdmmConfig, beta_bound, q_eval
from .problem import Problem

logger = logging.getLogger(__name__)

IDENTITY_TOL = 1e-12
OPTIMALITY_TOL = 1e-10
FEJER_TOL = 1e-8


def convex_combination_gap(rec: IterateRecord, tau: float, m: GammaMetric) -> float:
    """p_{k+1} = (1 - tau) p_hat + tau p_breve, relative error."""
    combo = (1.0 - tau) * rec.p_hat + tau * rec.p_breve
    scale = 1.0 + m.norm(rec.p_hat) + m.norm(rec.p_breve)
    return m.norm(rec.p_next - combo) / scale


def residual_identity_gap(rec: IterateRecord, m: GammaMetric) -> float:
    """||p_tilde - p_breve||^2 = (||e||^2 + ||v - z_hat||^2) / gamma, relative error."""
    lhs = m.norm_sq(rec.p_tilde - rec.p_breve)
    e = rec.approx.e
    vz = rec.approx.v - rec.z_hat
    rhs = (float(e @ e) + float(vz @ vz)) / m.gamma
    return abs(lhs - rhs) / (1.0 + lhs + rhs)


def contraction_gap(rec: IterateRecord, m: GammaMetric) -> float:
    """||p_breve - p_hat|| <= 2 ||p_tilde - p_hat||, relative excess."""
    lhs = m.norm(rec.p_breve - rec.p_hat)
    rhs = 2.0 * m.norm(rec.p_tilde - rec.p_hat)
    return max(lhs - rhs, 0.0) / (1.0 + rhs)


def pointwise_identity_gap(rec: IterateRecord, m: GammaMetric) -> float:
    """r_k = ||p_breve - p_hat||^2, relative error."""
    r = rec.pointwise_r(m)
    direct = m.norm_sq(rec.p_breve - rec.p_hat)
    return abs(r - direct) / (1.0 + r + direct)


def first_block_gap(rec: IterateRecord, problem: Problem, m: GammaMetric) -> Tuple[float, int]:
    """Violation of -L* z' in df(x_k), scaled by the size of the x-step inputs."""
    violation, index = problem.first.optimality_violation(rec.x, problem.L.adjoint(rec.z_prime))
    scale = 1.0 + float(np.abs(rec.z_hat).max()) + m.gamma * float(np.abs(rec.y_hat).max())
    return violation / scale, index


def angle_inequality_gap(rec: IterateRecord, p: PrimalDualPoint, m: GammaMetric) -> float:
    """<p_breve - p_hat, p - p_tilde> + eps_k >= 0 for p in the extended solution set.

    Returns the relative shortfall below zero.
    """
    value = m.inner(rec.p_breve - rec.p_hat, p - rec.p_tilde) + rec.approx.eps
    scale = 1.0 + m.norm(rec.p_breve - rec.p_hat) * m.norm(p - rec.p_tilde)
    return max(-value, 0.0) / scale


def extrapolation_identity_gap(rec: IterateRecord, p: PrimalDualPoint, m: GammaMetric) -> float:
    """||p_hat - p||^2 = (1+a)||p_k - p||^2 - a||p_{k-1} - p||^2 + a(1+a)||p_k - p_{k-1}||^2."""
    a = rec.alpha_k
    lhs = m.norm_sq(rec.p_hat - p)
    hk = m.norm_sq(rec.p - p)
    hk1 = m.norm_sq(rec.p_prev - p)
    rhs = (1.0 + a) * hk - a * hk1 + a * (1.0 + a) * m.norm_sq(rec.p - rec.p_prev)
    return abs(lhs - rhs) / (1.0 + lhs + hk + hk1)


@dataclass(frozen=True)
class FejerTerms:
    """Distance decreases towards p and their lower bounds for one iteration."""

    breve_decrease: float
    next_decrease: float
    bound_breve: float
    bound_relaxed: float
    bound_tilde: float
    bound_step: float
    scale: float

    def holds(self, tol: float = FEJER_TOL) -> bool:
        slack = tol * self.scale
        return (self.breve_decrease >= self.bound_breve - slack
                and self.next_decrease >= self.bound_relaxed - slack
                and self.next_decrease >= self.bound_tilde - slack
                and self.bound_tilde >= self.bound_step - slack)


def fejer_terms(rec: IterateRecord, p: PrimalDualPoint, config: AdmmConfig, m: GammaMetric) -> FejerTerms:
    """All distance-decrease estimates of one iteration measured against p."""
    tau, sigma, gamma = config.tau, config.sigma, m.gamma
    dist_hat = m.norm_sq(p - rec.p_hat)
    lx_yhat = rec.lx - rec.y_hat
    lx_yhat_sq = float(lx_yhat @ lx_yhat)
    tilde_hat = m.norm_sq(rec.p_tilde - rec.p_hat)
    return FejerTerms(
        breve_decrease=dist_hat - m.norm_sq(p - rec.p_breve),
        next_decrease=dist_hat - m.norm_sq(p - rec.p_next),
        bound_breve=gamma * (1.0 - sigma ** 2) * lx_yhat_sq,
        bound_relaxed=tau * gamma * (1.0 - sigma ** 2) * lx_yhat_sq
        + tau * (1.0 - tau) * m.norm_sq(rec.p_breve - rec.p_hat),
        bound_tilde=tau * (1.0 - tau) * (1.0 - sigma) ** 2 * tilde_hat,
        bound_step=(1.0 - tau) * (1.0 - sigma) ** 2 / (4.0 * tau) * m.norm_sq(rec.p_next - rec.p_hat),
        scale=1.0 + dist_hat,
    )


def fejer_gap(rec: IterateRecord, p: PrimalDualPoint, config: AdmmConfig, m: GammaMetric) -> float:
    """||p - p_hat||^2 - ||p - p_{k+1}||^2 >= tau(1-tau)(1-sigma)^2 ||p_tilde - p_hat||^2."""
    terms = fejer_terms(rec, p, config, m)
    return max(terms.bound_tilde - terms.next_decrease, 0.0) / terms.scale


def h_recursion_gap(rec: IterateRecord, p: PrimalDualPoint, config: AdmmConfig, m: GammaMetric) -> float:
    """h_{k+1} - h_k - a_k(h_k - h_{k-1}) + s_{k+1} <= delta_k, relative excess."""
    a = rec.alpha_k
    h_prev = m.norm_sq(rec.p_prev - p)
    h = m.norm_sq(rec.p - p)
    h_next = m.norm_sq(rec.p_next - p)
    s_next = config.tau * (1.0 - config.tau) * (1.0 - config.sigma) ** 2 \
        * m.norm_sq(rec.p_tilde - rec.p_hat)
    delta = a * (1.0 + a) * m.norm_sq(rec.p - rec.p_prev)
    excess = h_next - h - a * (h - h_prev) + s_next - delta
    return max(excess, 0.0) / (1.0 + h)


def hsd_sequences(records: Sequence[IterateRecord], p: PrimalDualPoint, config: AdmmConfig,
                  m: GammaMetric) -> Tuple[List[float], List[float], List[float]]:
    """h = [h_{-1}, h_0, ..., h_K], s = [s_1, ..., s_K], delta = [delta_0, ..., delta_{K-1}]."""
    if not records:
        return [], [], []
    c = config.tau * (1.0 - config.tau) * (1.0 - config.sigma) ** 2
    first = records[0]
    h = [m.norm_sq(first.p_prev - p), m.norm_sq(first.p - p)]
    s: List[float] = []
    delta: List[float] = []
    for rec in records:
        h.append(m.norm_sq(rec.p_next - p))
        s.append(c * m.norm_sq(rec.p_tilde - rec.p_hat))
        delta.append(rec.alpha_k * (1.0 + rec.alpha_k) * m.norm_sq(rec.p - rec.p_prev))
    return h, s, delta


def summability_partial_sums(records: Sequence[IterateRecord], theta: float, k0: int,
                             m: GammaMetric) -> List[Tuple[float, float]]:
    """Pairs (sum_j alpha_j ||p_j - p_{j-1}||^2, sum_{j=k0}^k theta^j) for every k."""
    out = []
    lhs = 0.0
    rhs = 0.0
    for rec in records:
        lhs += rec.alpha_k * m.norm_sq(rec.p - rec.p_prev)
        if rec.k >= k0:
            rhs += theta ** rec.k
        out.append((lhs, rhs))
    return out


def step_sum_bound(records: Sequence[IterateRecord], p: PrimalDualPoint, config: AdmmConfig,
                   m: GammaMetric) -> Tuple[List[float], float]:
    """Partial sums of ||p_j - p_{j-1}||^2 and their bound 2||p_0 - p||^2 / ((1-alpha) q(alpha))."""
    eta, _ = beta_bound(config.sigma, config.tau)
    q = q_eval(config.alpha, eta)
    bound = 2.0 * m.norm_sq(records[0].p - p) / ((1.0 - config.alpha) * q)
    sums = []
    total = 0.0
    for rec in records:
        total += m.norm_sq(rec.p - rec.p_prev)
        sums.append(total)
    # the step p_{K+1} - p_K of the last record also counts
    total += m.norm_sq(records[-1].p_next - records[-1].p)
    sums.append(total)
    return sums, bound


class InvariantChecker:
    """Applies the per-iteration invariants to each record of a checked run."""

    def __init__(self, problem: Problem, config: AdmmConfig,
                 reference: Optional[PrimalDualPoint] = None):
        self.problem = problem
        self.config = config
        self.metric = config.metric
        self.reference = reference
        self.checked = 0

    def _require(self, name: str, rec: IterateRecord, gap: float, tol: float) -> None:
        if not gap <= tol:
            logger.error(f"{self.problem.name}: invariant {name} failed at k={rec.k} (gap {gap:.3e})")
            raise InvariantViolation(name, rec.k, gap)

    def check(self, rec: IterateRecord) -> None:
        m = self.metric
        approx = rec.approx
        if not certify(approx, rec.lx, rec.z_hat, rec.y_hat, m, self.config.sigma):
            e_sq = float(approx.e @ approx.e)
            raise InvariantViolation("relative-error certificate", rec.k, e_sq)

        self._require("convex combination", rec, convex_combination_gap(rec, self.config.tau, m), IDENTITY_TOL)
        self._require("residual identity", rec, residual_identity_gap(rec, m), IDENTITY_TOL)
        self._require("contraction", rec, contraction_gap(rec, m), IDENTITY_TOL)
        self._require("pointwise identity", rec, pointwise_identity_gap(rec, m), IDENTITY_TOL)
        gap, _ = first_block_gap(rec, self.problem, m)
        self._require("first-block optimality", rec, gap, OPTIMALITY_TOL)

        if self.reference is not None:
            p = self.reference
            self._require("Fejer decrease", rec, fejer_gap(rec, p, self.config, m), FEJER_TOL)
            self._require("h recursion", rec, h_recursion_gap(rec, p, self.config, m), FEJER_TOL)
        self.checked += 1
