"""First-block (x-step) solvers."""

from .first_block import CustomQuadratic, FirstBlock, L1, soft_threshold, solve_first_block

__all__ = ['CustomQuadratic', 'FirstBlock', 'L1', 'soft_threshold', 'solve_first_block']
