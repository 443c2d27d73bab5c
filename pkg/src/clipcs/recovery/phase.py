"""Phase augmentation for homogeneous clippers.

Nonzero clipper coefficients point opposite to the transmitted samples, so the
receiver's equalized block supplies their phases: theta_c = arg(xbar_hat) + pi.
Sense-then-rotate (StR) swaps phases into a finished estimate; rotate-then-sense
(RtS) folds them into the operator and solves a real nonnegative problem for |c|.
"""
from __future__ import annotations

import numpy as np

from .refine import refine_ls
from .solvers import prune_support, solve_l1, weighted_lasso
from .types import Method, RecoveryEstimate

__all__ = [
    "antiphase",
    "rotate",
    "phase_rotate_model",
    "stack_observation",
    "recover_rts",
    "recover_str",
    "force_digital_magnitudes",
]


def antiphase(xbar_hat) -> np.ndarray:
    """Phases opposite to the data estimate, wrapped to (-pi, pi]."""
    return np.angle(-np.asarray(xbar_hat))


def rotate(v, theta) -> np.ndarray:
    """Apply the diagonal phase matrix Theta = diag(e^{j theta}) to v."""
    return np.exp(1j * np.asarray(theta)) * v


def phase_rotate_model(psi, theta) -> np.ndarray:
    """The 2m x N real operator [Re(Psi Theta); Im(Psi Theta)]."""
    pt = np.asarray(psi) * np.exp(1j * np.asarray(theta))[None, :]
    return np.concatenate([pt.real, pt.imag], axis=0)


def stack_observation(y) -> np.ndarray:
    y = np.asarray(y)
    return np.concatenate([y.real, y.imag])


def recover_rts(y, psi, theta, lam: float, w=None, *, tol: float = 1e-8, max_iters: int = 2000,
                support_threshold: float = 1e-3, method: Method | None = None) -> RecoveryEstimate:
    """Rotate-then-sense: nonnegative LASSO over |c| on the phase-rotated real model."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    n = np.shape(psi)[1]
    w = np.ones(n) if w is None else np.asarray(w, dtype=float)
    if method is None:
        method = Method.PAL_RTS if np.all(w == 1.0) else Method.WPAL
    A = phase_rotate_model(psi, theta)
    mag, info = solve_l1(A, stack_observation(y), lam * w, nonneg=True, tol=tol, max_iters=max_iters)
    mag = prune_support(mag, support_threshold)
    info["weights"] = w
    info["lam"] = lam
    info["phases"] = np.asarray(theta)
    return RecoveryEstimate(rotate(mag, theta), method, info)


def recover_str(y, psi, theta, lam: float, w=None, *, refine: bool = False, tol: float = 1e-8,
                max_iters: int = 2000, support_threshold: float = 1e-3) -> RecoveryEstimate:
    """Sense-then-rotate: solve the (weighted) LASSO, then replace phases on the support.

    With ``refine=True`` the magnitudes come from an LS re-fit on the detected support.
    """
    n = np.shape(psi)[1]
    est = weighted_lasso(y, psi, lam, np.ones(n) if w is None else w, tol=tol, max_iters=max_iters,
                         support_threshold=support_threshold)
    if refine:
        est = refine_ls(est, y, psi)
    mag = np.abs(est.c_hat)
    return RecoveryEstimate(rotate(mag, theta) * (mag > 0), Method.PAL_STR, est.diagnostics)


def force_digital_magnitudes(estimate: RecoveryEstimate, zeta: float) -> RecoveryEstimate:
    """Snap every magnitude to the nearer of {0, zeta}; phases are kept."""
    c = np.asarray(estimate.c_hat)
    mag = np.abs(c)
    keep = mag > 0.5 * zeta
    out = np.zeros_like(c)
    out[keep] = zeta * c[keep] / mag[keep]
    return RecoveryEstimate(out, estimate.method, dict(estimate.diagnostics, forced_zeta=zeta))
