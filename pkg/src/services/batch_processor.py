"""Benchmark service: inexact ADMM (alpha = 0) against inexact inertial ADMM over a problem suite."""

import logging
import math
import threading
from concurrent.futures import ThreadPoolExecutor, as_completed
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.stats import gmean
from tabulate import tabulate

from config import settings
from exceptions import InertialAdmmException
from admm.parameters import AdmmConfig, InertialRule
from connectors.dataset_loader import Dataset
from .solver_service import RunSummary, SolverService

logger = logging.getLogger(__name__)

# Geometric means observed on the UCI regression suite, printed for context only.
REFERENCE_RATIOS = {'outer_ratio': 0.7149, 'inner_ratio': 0.7466, 'time_ratio': 0.7414}

METRICS = [('outer', 'outer_iters'), ('inner', 'total_inner_iters'), ('time', 'wall_time_seconds')]

TABLE_COLUMNS = [
    'problem', 'n', 'd',
    'outer_plain', 'outer_inertial', 'outer_ratio',
    'inner_plain', 'inner_inertial', 'inner_ratio',
    'time_plain', 'time_inertial', 'time_ratio',
    'status_plain', 'status_inertial', 'error',
]


def ratio(numerator: float, denominator: float) -> float:
    """numerator / denominator, NaN when the denominator is zero."""
    if denominator == 0:
        return math.nan
    return numerator / denominator


def geometric_mean(values) -> float:
    """Geometric mean of the finite positive entries; NaN when there are none."""
    arr = np.asarray([v for v in values if v is not None], dtype=np.float64)
    arr = arr[np.isfinite(arr) & (arr > 0)]
    if arr.size == 0:
        return math.nan
    return float(gmean(arr))


class ProblemComparison:
    """Both runs of one problem, or the error that stopped them."""

    def __init__(self, name: str, n: int, d: int, plain: Optional[RunSummary] = None,
                 inertial: Optional[RunSummary] = None, error: str = ""):
        self.name = name
        self.n = n
        self.d = d
        self.plain = plain
        self.inertial = inertial
        self.error = error

    @property
    def success(self) -> bool:
        return self.plain is not None and self.inertial is not None and not self.error

    def to_dict(self) -> Dict[str, Any]:
        row: Dict[str, Any] = {'problem': self.name, 'n': self.n, 'd': self.d}
        for label, attr in METRICS:
            plain = getattr(self.plain, attr) if self.plain else None
            inertial = getattr(self.inertial, attr) if self.inertial else None
            row[f'{label}_plain'] = plain
            row[f'{label}_inertial'] = inertial
            row[f'{label}_ratio'] = ratio(inertial, plain) if self.success else math.nan
        row['status_plain'] = self.plain.status if self.plain else ''
        row['status_inertial'] = self.inertial.status if self.inertial else ''
        row['error'] = self.error
        return row


class BatchProcessor:
    """Runs the plain and inertial configurations on every problem of a suite."""

    def __init__(self, solver_service: SolverService, max_workers: Optional[int] = None):
        self.solver_service = solver_service
        self.max_workers = max_workers or settings.bench_workers
        self._processing_lock = threading.Lock()
        logger.info(f"BatchProcessor initialized with {self.max_workers} workers")

    @staticmethod
    def plain_config(config: AdmmConfig) -> AdmmConfig:
        """Same sigma, tau, gamma and tolerances with the inertial step switched off."""
        return config.with_updates(alpha=0.0, inertial_rule=InertialRule(kind='constant'))

    def compare(self, dataset: Dataset, nu: float, config: AdmmConfig,
                log_dir: Optional[Path] = None, rates: bool = False) -> ProblemComparison:
        """Solve one problem with both configurations.

        A failing run sets error; summaries recorded before the failure are kept.
        """
        plain_dir = inertial_dir = None
        if log_dir is not None:
            plain_dir = Path(log_dir) / dataset.name / 'plain'
            inertial_dir = Path(log_dir) / dataset.name / 'inertial'

        comparison = ProblemComparison(dataset.name, dataset.n, dataset.d)
        stage = 'plain'
        try:
            plain = self.solver_service.solve(dataset, nu, self.plain_config(config),
                                              rates=rates, out_dir=plain_dir)
            comparison.plain = plain.summary
            stage = 'inertial'
            inertial = self.solver_service.solve(dataset, nu, config, rates=rates, out_dir=inertial_dir)
            comparison.inertial = inertial.summary
        except InertialAdmmException as e:
            logger.error(f"{stage} run on {dataset.name} failed: {e}")
            comparison.error = str(e)
        return comparison

    def run_bench(self, problems: List[Tuple[Dataset, float]], config: AdmmConfig,
                  out_dir: Optional[Path] = None, rates: bool = False) -> Dict[str, Any]:
        """Compare both methods on every problem and write the bench table.

        Args:
            problems: (preprocessed dataset, nu) pairs
            config: Configuration of the inertial method
            out_dir: Where bench_table.csv / bench_table.md and per-run logs go
            rates: Also write rates.json for every run under runs/

        Returns:
            Dict containing the table, the geometric means and failure counts
        """
        if not problems:
            return {
                'total_problems': 0,
                'completed': 0,
                'failed': 0,
                'table': pd.DataFrame(columns=TABLE_COLUMNS),
                'geometric_mean': {},
                'comparisons': [],
            }

        logger.info(f"Starting bench on {len(problems)} problems with {self.max_workers} workers")
        log_dir = Path(out_dir) / 'runs' if out_dir is not None else None

        with self._processing_lock:
            comparisons = self._compare_parallel(problems, config, log_dir, rates)
            table = self.build_table(comparisons)
            means = {col: geometric_mean(table[col]) for col in REFERENCE_RATIOS}

            completed = sum(1 for c in comparisons if c.success)
            failed = len(comparisons) - completed
            summary = {
                'total_problems': len(problems),
                'completed': completed,
                'failed': failed,
                'table': table,
                'geometric_mean': means,
                'comparisons': comparisons,
            }
            if out_dir is not None:
                summary['files'] = self.write_table(table, means, out_dir)

            logger.info(f"Bench completed: {completed} compared, {failed} failed, "
                        f"outer ratio gmean {means['outer_ratio']:.4f}")
            return summary

    def _compare_parallel(self, problems: List[Tuple[Dataset, float]], config: AdmmConfig,
                          log_dir: Optional[Path], rates: bool = False) -> List[ProblemComparison]:
        """One task per problem; results come back in input order."""
        results: List[Optional[ProblemComparison]] = [None] * len(problems)

        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            future_to_index = {
                executor.submit(self.compare, dataset, nu, config, log_dir, rates): i
                for i, (dataset, nu) in enumerate(problems)
            }

            for future in as_completed(future_to_index):
                i = future_to_index[future]
                dataset = problems[i][0]
                try:
                    results[i] = future.result()
                    logger.debug(f"Compared {dataset.name}")
                except Exception as e:
                    logger.error(f"Exception benchmarking {dataset.name}: {e}")
                    results[i] = ProblemComparison(dataset.name, dataset.n, dataset.d, error=str(e))

        return results

    @staticmethod
    def build_table(comparisons: List[ProblemComparison]) -> pd.DataFrame:
        return pd.DataFrame([c.to_dict() for c in comparisons], columns=TABLE_COLUMNS)

    @staticmethod
    def _summary_rows(means: Dict[str, float]) -> pd.DataFrame:
        gm = {'problem': 'Geometric mean', **means}
        ref = {'problem': 'Reference suite (geometric mean)', **REFERENCE_RATIOS}
        return pd.DataFrame([gm, ref], columns=TABLE_COLUMNS)

    def write_table(self, table: pd.DataFrame, means: Dict[str, float], out_dir) -> Dict[str, str]:
        """bench_table.csv and bench_table.md, per-problem rows then the two summary rows."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        full = pd.concat([table, self._summary_rows(means)], ignore_index=True)

        csv_path = out_dir / 'bench_table.csv'
        full.to_csv(csv_path, index=False)

        md_path = out_dir / 'bench_table.md'
        shown = full.drop(columns=['error'])
        shown = shown.astype(object).where(shown.notna(), '')
        with open(md_path, 'w') as f:
            f.write(tabulate(shown.values.tolist(), headers=list(shown.columns), tablefmt='github',
                             floatfmt='.4f'))
            f.write('\n')
            errors = [(row.problem, row.error) for row in table.itertuples() if row.error]
            if errors:
                f.write('\nFailed problems:\n\n')
                for name, message in errors:
                    f.write(f'- {name}: {message}\n')

        logger.info(f"Bench table written to {csv_path} and {md_path}")
        return {'csv': str(csv_path), 'markdown': str(md_path)}
