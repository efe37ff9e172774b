"""Single-run service: solve one LASSO instance, collect the iterate log and write the run artifacts."""

import json
import logging
import time
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd
from pydantic import BaseModel

from config import settings
from exceptions import CertificationError, InertialAdmmException, OracleError
from admm.inertial_admm import IterateRecord, RunStatus, run
from admm.parameters import AdmmConfig
from admm.problem import build_lasso_problem, lasso_objective
from connectors.dataset_loader import Dataset
from oracle.lasso_oracle import ReferencePoint, lasso_solution, reference_point
from rates.report import RateReport, RateTracker

logger = logging.getLogger(__name__)

ITERATE_COLUMNS = ['k', 'alpha_k', 'residual', 'inner_iters', 'pointwise_r']


class RunSummary(BaseModel):
    """What one run reports; everything except wall_time_seconds is deterministic."""

    name: str
    config: Dict[str, Any]
    outer_iters: int
    total_inner_iters: int
    wall_time_seconds: float
    final_residual: float
    status: str
    converged: bool
    final_objective: Optional[float] = None
    nu: float
    n: int
    d: int


class SolveResult:
    """Summary, iterate log and optional rate report of one run."""

    def __init__(self, summary: RunSummary, iterates: List[Dict[str, Any]],
                 rates: Optional[RateReport] = None, reference: Optional[ReferencePoint] = None):
        self.summary = summary
        self.iterates = iterates
        self.rates = rates
        self.reference = reference

    @property
    def iterates_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.iterates, columns=ITERATE_COLUMNS)

    def to_dict(self) -> Dict[str, Any]:
        data = self.summary.model_dump()
        data['rates_ok'] = self.rates.bounds_ok if self.rates is not None else None
        return data


class SolverService:
    """Runs the inexact inertial ADMM on preprocessed LASSO data."""

    def __init__(self, output_dir: Optional[str] = None):
        self.output_dir = Path(output_dir or settings.output_dir)
        logger.debug(f"SolverService writing to {self.output_dir}")

    def reference_for(self, dataset: Dataset, nu: float) -> Optional[ReferencePoint]:
        """Certified point of the extended solution set, or None when the oracle gives up."""
        try:
            x_star, _ = lasso_solution(dataset.A, dataset.b, nu, settings.oracle_tol)
            return reference_point(dataset.A, dataset.b, nu, x_star, tol=settings.oracle_tol)
        except (OracleError, CertificationError) as e:
            logger.warning(f"{dataset.name}: no certified reference point, continuing without d0 ({e})")
            return None

    def solve(self, dataset: Dataset, nu: float, config: AdmmConfig, rates: bool = False,
              out_dir: Optional[Path] = None) -> SolveResult:
        """Solve min 0.5||Ax - b||^2 + nu||x||_1 for a preprocessed dataset.

        Args:
            dataset: Scaled dataset
            nu: l1 weight
            config: Solver configuration
            rates: Build a RateReport alongside the run
            out_dir: Write run_summary.json, iterates.csv (and rates.json) here when given

        Returns:
            SolveResult
        """
        problem = build_lasso_problem(dataset.A, dataset.b, nu, name=dataset.name)

        reference = None
        if rates or config.checked:
            reference = self.reference_for(dataset, nu)
        ref_point = reference.point if reference is not None else None

        iterates: List[Dict[str, Any]] = []
        tracker = RateTracker(config, ref_point) if rates else None
        metric = config.metric

        def on_record(rec: IterateRecord) -> None:
            iterates.append({
                'k': rec.k,
                'alpha_k': rec.alpha_k,
                'residual': rec.stopping_residual,
                'inner_iters': rec.inner_iters,
                'pointwise_r': rec.pointwise_r(metric),
            })
            if tracker is not None:
                tracker.add(rec)

        started = time.perf_counter()
        try:
            records, status = run(problem, config, reference=ref_point,
                                  on_record=on_record, keep_records=False)
        except InertialAdmmException as e:
            logger.error(f"Run on {dataset.name} failed: {e}")
            raise
        wall_time = time.perf_counter() - started

        summary = self._summarize(dataset, nu, config, records[-1], status, wall_time)
        result = SolveResult(summary, iterates, tracker.report() if tracker else None, reference)
        logger.info(f"{dataset.name}: {summary.status} outer={summary.outer_iters} "
                    f"inner={summary.total_inner_iters} time={wall_time:.3f}s")

        if out_dir is not None:
            self.write_outputs(result, out_dir)
        return result

    def _summarize(self, dataset: Dataset, nu: float, config: AdmmConfig, last: IterateRecord,
                   status: RunStatus, wall_time: float) -> RunSummary:
        return RunSummary(
            name=dataset.name,
            config=config.echo(),
            outer_iters=status.outer_iters,
            total_inner_iters=status.total_inner_iters,
            wall_time_seconds=wall_time,
            final_residual=status.final_residual,
            status=str(status),
            converged=status.converged,
            final_objective=lasso_objective(last.x, dataset.A, dataset.b, nu),
            nu=nu,
            n=dataset.n,
            d=dataset.d,
        )

    def write_outputs(self, result: SolveResult, out_dir: Optional[Path] = None) -> Path:
        """run_summary.json, iterates.csv and, when present, rates.json."""
        out_dir = Path(out_dir) if out_dir is not None else self.output_dir
        out_dir.mkdir(parents=True, exist_ok=True)

        with open(out_dir / 'run_summary.json', 'w') as f:
            json.dump(result.summary.model_dump(), f, indent=2)
        result.iterates_frame.to_csv(out_dir / 'iterates.csv', index=False)
        if result.rates is not None:
            result.rates.to_json(out_dir / 'rates.json')

        logger.info(f"Run artifacts written to {out_dir}")
        return out_dir
