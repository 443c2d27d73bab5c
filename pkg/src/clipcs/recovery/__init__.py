"""Receiver-side estimators of the sparse clipping signal."""
from .fbmp import beta_fbmp, candidate_pool, evaluation_count, search_reduction
from .phase import (
    antiphase,
    force_digital_magnitudes,
    phase_rotate_model,
    recover_rts,
    recover_str,
    rotate,
    stack_observation,
)
from .refine import oracle_ls, refine_lmmse, refine_ls
from .solvers import lasso, prune_support, solve_l1, weighted_lasso
from .types import Method, RecoveryEstimate
from .weights import W_MIN, ps_distances, ps_weights

__all__ = [
    "Method",
    "RecoveryEstimate",
    "W_MIN",
    "antiphase",
    "beta_fbmp",
    "candidate_pool",
    "evaluation_count",
    "force_digital_magnitudes",
    "lasso",
    "oracle_ls",
    "phase_rotate_model",
    "prune_support",
    "ps_distances",
    "ps_weights",
    "recover_rts",
    "recover_str",
    "refine_lmmse",
    "refine_ls",
    "rotate",
    "search_reduction",
    "solve_l1",
    "stack_observation",
    "weighted_lasso",
]
