"""Amplitude refinement on a detected support: least squares and LMMSE."""
from __future__ import annotations

import numpy as np

from .types import Method, RecoveryEstimate

__all__ = ["refine_ls", "refine_lmmse", "oracle_ls"]


def _stack(a):
    return np.concatenate([a.real, a.imag], axis=0)


def refine_ls(estimate: RecoveryEstimate, y, psi, phases=None) -> RecoveryEstimate:
    """Re-fit the amplitudes on ``estimate.support_hat`` by least squares.

    With ``phases`` given the coefficients are constrained to ``v e^{j phases}`` with
    real ``v`` and the fit is done on the stacked real/imaginary system.
    Rank-deficient supports fall back to the pseudo-inverse and set
    ``diagnostics['rank_deficient']``.
    """
    y = np.asarray(y)
    support = estimate.support_hat
    n = np.shape(psi)[1]
    out = np.zeros(n, dtype=complex)
    diag = dict(estimate.diagnostics)
    if support.size == 0:
        return RecoveryEstimate(out, estimate.method, diag)
    phi = np.asarray(psi)[:, support]
    if phases is None:
        v, _, rank, _ = np.linalg.lstsq(phi, y, rcond=None)
        out[support] = v
    else:
        rot = np.exp(1j * np.asarray(phases)[support])
        v, _, rank, _ = np.linalg.lstsq(_stack(phi * rot), _stack(y), rcond=None)
        out[support] = v * rot
    diag["rank_deficient"] = bool(rank < support.size)
    diag["refined"] = "ls"
    return RecoveryEstimate(out, estimate.method, diag)


def refine_lmmse(estimate: RecoveryEstimate, y, psi, prior_var: float, prior_mean=0.0,
                 noise_var: float = 0.0) -> RecoveryEstimate:
    """LMMSE amplitudes on the detected support for a prior with the given mean and variance.

    Computes ``mu + var Phi^H (var Phi Phi^H + noise I)^-1 (y - Phi mu)`` in its
    s x s form, ``mu + (Phi^H Phi + noise/var I)^-1 Phi^H (y - Phi mu)``.
    """
    if prior_var <= 0:
        raise ValueError("prior_var must be positive")
    support = estimate.support_hat
    n = np.shape(psi)[1]
    out = np.zeros(n, dtype=complex)
    diag = dict(estimate.diagnostics)
    if support.size:
        phi = np.asarray(psi)[:, support]
        mu = np.broadcast_to(np.asarray(prior_mean, dtype=complex), (support.size,))
        gram = phi.conj().T @ phi + (noise_var / prior_var) * np.eye(support.size)
        rhs = phi.conj().T @ (np.asarray(y) - phi @ mu)
        out[support] = mu + np.linalg.lstsq(gram, rhs, rcond=None)[0]
    diag["refined"] = "lmmse"
    return RecoveryEstimate(out, estimate.method, diag)


def oracle_ls(y, psi, true_support) -> RecoveryEstimate:
    """Least squares on the true clipping support (genie-aided baseline)."""
    support = np.asarray(true_support, dtype=np.intp)
    marker = np.zeros(np.shape(psi)[1], dtype=complex)
    marker[support] = 1.0
    return refine_ls(RecoveryEstimate(marker, Method.ORACLE_LS), y, psi)
