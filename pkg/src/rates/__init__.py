"""Convergence-rate diagnostics and reports."""

from .diagnostics import (
    BoundCheck,
    ErgodicAccumulator,
    ErgodicPoint,
    best_index,
    check_accumulated_bound,
    check_lemma_A1,
    constant_C,
    constant_D,
    delta_value,
    ergodic_gap_constant,
    ergodic_gap_identity,
    ergodic_report,
    ergodic_update,
    pointwise_residual,
)
from .report import (
    ErgodicEntry,
    PointwiseEntry,
    RateReport,
    RateTracker,
    build_rate_report,
    check_ergodic_bound,
    check_pointwise_bound,
)

__all__ = [
    'BoundCheck',
    'ErgodicAccumulator',
    'ErgodicEntry',
    'ErgodicPoint',
    'PointwiseEntry',
    'RateReport',
    'RateTracker',
    'best_index',
    'build_rate_report',
    'check_accumulated_bound',
    'check_ergodic_bound',
    'check_lemma_A1',
    'check_pointwise_bound',
    'constant_C',
    'constant_D',
    'delta_value',
    'ergodic_gap_constant',
    'ergodic_gap_identity',
    'ergodic_report',
    'ergodic_update',
    'pointwise_residual',
]
