"""RateReport: pointwise and ergodic rate bounds evaluated on a recorded run."""

import json
import logging
import math
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, Field

from exceptions import ConfigurationError
from admm.inertial_admm import IterateRecord
from admm.parameters import AdmmConfig
from spaces.linear import PrimalDualPoint
from .diagnostics import (
    BOUND_SLACK,
    NONNEG_TOL,
    BoundCheck,
    ErgodicAccumulator,
    constant_C,
    constant_D,
    delta_value,
    ergodic_gap_constant,
    ergodic_report,
    ergodic_update,
)

logger = logging.getLogger(__name__)

D0_NOTE = ("d0 is measured to a certified reference point of the solution set; "
           "it upper-bounds the true distance, so the checked bounds are relaxations.")


class PointwiseEntry(BaseModel):
    k: int
    r: float
    eps: float


class ErgodicEntry(BaseModel):
    k: int
    residual: float
    delta_a: float
    eps_a: float


class RateReport(BaseModel):
    """Constants, per-iteration residuals and bound verdicts of one run."""

    C: Optional[float] = None
    D: Optional[float] = None
    d0: Optional[float] = None
    alpha: float
    sigma: float
    tau: float
    constant_alpha: bool
    pointwise: List[PointwiseEntry] = Field(default_factory=list)
    ergodic: List[ErgodicEntry] = Field(default_factory=list)
    best_index: int = 0
    best_delta: float = math.inf
    pointwise_ok: Optional[bool] = None
    ergodic_ok: Optional[bool] = None
    bounds_ok: Optional[bool] = None
    note: str = D0_NOTE

    def to_json(self, path: Path) -> None:
        """Write the report as a JSON document."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            json.dump(self.model_dump(), f, indent=2)
        logger.info(f"Rate report written to {path}")


def check_pointwise_bound(report: RateReport, k: int) -> BoundCheck:
    """Some i <= k has r_i <= 2 C d0^2 / k and eps_i <= sigma^2 C d0^2 / (2k)."""
    if report.C is None or report.d0 is None:
        return BoundCheck(False, k, {"reason": "C or d0 unavailable"})
    if k < 1 or k >= len(report.pointwise):
        raise ValueError(f"pointwise bound needs 1 <= k < {len(report.pointwise)}, got {k}")
    best, entry = math.inf, None
    for candidate in report.pointwise[:k + 1]:
        d = delta_value(candidate.r, candidate.eps, report.sigma)
        if d < best:
            best, entry = d, candidate
    scale = report.C * report.d0 ** 2
    r_bound = 2.0 * scale / k
    eps_bound = report.sigma ** 2 * scale / (2.0 * k)
    ok = entry.r <= r_bound + BOUND_SLACK * (1.0 + r_bound) \
        and entry.eps <= eps_bound + BOUND_SLACK * (1.0 + eps_bound)
    return BoundCheck(ok, k, {"i": entry.k, "r": entry.r, "eps": entry.eps,
                              "r_bound": r_bound, "eps_bound": eps_bound})


def check_ergodic_bound(report: RateReport, k: int) -> BoundCheck:
    """Ergodic residual <= D^2 d0^2 / k^2 and 0 <= delta^a + eps^a <= (gap constant) d0^2 / k."""
    if report.C is None or report.D is None or report.d0 is None:
        return BoundCheck(False, k, {"reason": "C, D or d0 unavailable"})
    if k < 1 or k >= len(report.ergodic):
        raise ValueError(f"ergodic bound needs 1 <= k < {len(report.ergodic)}, got {k}")
    entry = report.ergodic[k]
    d0_sq = report.d0 ** 2
    residual_bound = report.D ** 2 * d0_sq / k ** 2
    gap_bound = ergodic_gap_constant(report.alpha, report.sigma, report.tau) * d0_sq / k
    gap = entry.delta_a + entry.eps_a
    ok = (entry.residual <= residual_bound + BOUND_SLACK * (1.0 + residual_bound)
          and gap <= gap_bound + BOUND_SLACK * (1.0 + gap_bound)
          and entry.delta_a >= -NONNEG_TOL
          and entry.eps_a >= -NONNEG_TOL)
    return BoundCheck(ok, k, {"residual": entry.residual, "residual_bound": residual_bound,
                              "gap": gap, "gap_bound": gap_bound,
                              "delta_a": entry.delta_a, "eps_a": entry.eps_a})


class RateTracker:
    """Consumes records one at a time (usable as a run callback) and builds a RateReport."""

    def __init__(self, config: AdmmConfig, reference: Optional[PrimalDualPoint] = None):
        self.config = config
        self.metric = config.metric
        self.reference = reference
        self.acc: Optional[ErgodicAccumulator] = None
        self.pointwise: List[PointwiseEntry] = []
        self.ergodic: List[ErgodicEntry] = []
        self.alphas: List[float] = []
        self.d0: Optional[float] = None
        self.best_index = 0
        self.best_delta = math.inf

    def __call__(self, rec: IterateRecord) -> None:
        self.add(rec)

    def add(self, rec: IterateRecord) -> None:
        m = self.metric
        if self.acc is None:
            self.acc = ErgodicAccumulator.empty(rec.lx.size, rec.x.size)
            if self.reference is not None:
                self.d0 = m.norm(rec.p - self.reference)
        self.acc = ergodic_update(self.acc, rec)
        point = ergodic_report(self.acc, m)

        r = rec.pointwise_r(m)
        eps = rec.approx.eps
        d = delta_value(r, eps, self.config.sigma)
        if d < self.best_delta:
            self.best_index, self.best_delta = rec.k, d

        self.alphas.append(rec.alpha_k)
        self.pointwise.append(PointwiseEntry(k=rec.k, r=r, eps=eps))
        self.ergodic.append(ErgodicEntry(k=rec.k, residual=point.residual,
                                         delta_a=point.delta_a, eps_a=point.eps_a))

    def report(self) -> RateReport:
        cfg = self.config
        C = D = None
        try:
            C = constant_C(cfg.alpha, cfg.sigma, cfg.tau)
            D = constant_D(cfg.alpha, cfg.sigma, cfg.tau)
        except ConfigurationError as e:
            logger.info(f"Rate constants unavailable for this configuration: {e}")

        constant_alpha = all(a == cfg.alpha for a in self.alphas)
        report = RateReport(
            C=C, D=D, d0=self.d0,
            alpha=cfg.alpha, sigma=cfg.sigma, tau=cfg.tau,
            constant_alpha=constant_alpha,
            pointwise=self.pointwise, ergodic=self.ergodic,
            best_index=self.best_index, best_delta=self.best_delta,
        )
        if C is None or self.d0 is None or len(self.pointwise) < 2:
            return report

        report.pointwise_ok = _all_pointwise_ok(report)
        if constant_alpha:
            report.ergodic_ok = all(check_ergodic_bound(report, k) for k in range(1, len(self.ergodic)))
            report.bounds_ok = report.pointwise_ok and report.ergodic_ok
        else:
            # ergodic bounds are reported only for constant inertial parameters
            report.bounds_ok = report.pointwise_ok
        return report


def build_rate_report(records: List[IterateRecord], config: AdmmConfig,
                      reference: Optional[PrimalDualPoint] = None) -> RateReport:
    """RateReport of a recorded run."""
    tracker = RateTracker(config, reference)
    for rec in records:
        tracker.add(rec)
    return tracker.report()


def _all_pointwise_ok(report: RateReport) -> bool:
    """check_pointwise_bound for every k >= 1 in one pass over the entries."""
    scale = report.C * report.d0 ** 2
    best, best_entry = math.inf, None
    for k, entry in enumerate(report.pointwise):
        d = delta_value(entry.r, entry.eps, report.sigma)
        if d < best:
            best, best_entry = d, entry
        if k == 0:
            continue
        r_bound = 2.0 * scale / k
        eps_bound = report.sigma ** 2 * scale / (2.0 * k)
        if best_entry.r > r_bound + BOUND_SLACK * (1.0 + r_bound) \
                or best_entry.eps > eps_bound + BOUND_SLACK * (1.0 + eps_bound):
            logger.warning(f"Pointwise bound violated at k={k}: r={best_entry.r:.3e} > {r_bound:.3e}")
            return False
    return True
