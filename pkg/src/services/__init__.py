"""Services package: single runs and inertial-vs-plain benchmarks."""

from .solver_service import RunSummary, SolveResult, SolverService
from .batch_processor import BatchProcessor, ProblemComparison, geometric_mean, ratio

__all__ = [
    'BatchProcessor',
    'ProblemComparison',
    'RunSummary',
    'SolveResult',
    'SolverService',
    'geometric_mean',
    'ratio',
]
