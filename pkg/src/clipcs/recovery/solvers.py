"""Accelerated proximal gradient for (weighted) l1-penalized least squares.

Solves ``min_u ||b - A u||_2^2 + sum_i t_i |u_i|`` for complex ``u`` (magnitude
soft-threshold, phase preserved) or for real nonnegative ``u`` (one-sided
threshold). Iterates follow the monotone variant of FISTA so the objective never
increases.
"""
from __future__ import annotations

import math

import numpy as np

from .types import Method, RecoveryEstimate

__all__ = ["solve_l1", "lasso", "weighted_lasso", "prune_support", "lipschitz"]


def lipschitz(A) -> float:
    """Lipschitz constant of the gradient of ||b - A u||^2, i.e. 2 ||A||_2^2."""
    return 2.0 * float(np.linalg.norm(A, 2)) ** 2


def _shrink_complex(v, t):
    mag = np.abs(v)
    scale = np.maximum(1.0 - np.divide(t, mag, out=np.full_like(mag, np.inf), where=mag > 0), 0.0)
    return v * scale


def _shrink_nonneg(v, t):
    return np.maximum(v - t, 0.0)


def solve_l1(A, b, thresholds, *, nonneg: bool = False, tol: float = 1e-8, max_iters: int = 2000,
             lip: float | None = None, x0=None):
    """Minimize ``||b - A u||^2 + sum(thresholds * |u|)``.

    Returns ``(u, info)`` where ``info`` has ``iterations``, ``objective``,
    ``history`` (objective after every iteration) and ``converged``. Convergence is a
    relative objective change below ``tol`` on an accepted step.
    """
    A = np.asarray(A)
    b = np.asarray(b)
    n = A.shape[1]
    t = np.broadcast_to(np.asarray(thresholds, dtype=float), (n,))
    if nonneg:
        if np.iscomplexobj(A) or np.iscomplexobj(b):
            raise ValueError("nonnegative mode needs a real operator and observation")
        prox, dtype = _shrink_nonneg, float
    else:
        prox, dtype = _shrink_complex, np.result_type(A, b, complex)
    L = lipschitz(A) if lip is None else lip
    if L == 0.0:
        return np.zeros(n, dtype=dtype), {"iterations": 0, "objective": float(np.vdot(b, b).real),
                                          "history": [], "converged": True}
    step = 1.0 / L
    AH = A.conj().T

    def objective(Au, u):
        r = b - Au
        return float(np.vdot(r, r).real + np.dot(t, np.abs(u)))

    x = np.zeros(n, dtype=dtype) if x0 is None else np.asarray(x0, dtype=dtype).copy()
    Ax = A @ x
    f = objective(Ax, x)
    z, Az, tk = x, Ax, 1.0
    history = []
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        grad = 2.0 * (AH @ (Az - b))
        v = prox(z - step * grad, step * t)
        Av = A @ v
        fv = objective(Av, v)
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * tk * tk))
        accepted = fv <= f
        if accepted:
            x_new, Ax_new, f_new = v, Av, fv
        else:
            x_new, Ax_new, f_new = x, Ax, f
        a, c = tk / t_next, (tk - 1.0) / t_next
        z = x_new + a * (v - x_new) + c * (x_new - x)
        Az = Ax_new + a * (Av - Ax_new) + c * (Ax_new - Ax)
        done = accepted and abs(f - f_new) <= tol * max(abs(f_new), np.finfo(float).tiny)
        x, Ax, f, tk = x_new, Ax_new, f_new, t_next
        history.append(f)
        if done:
            converged = True
            break
    return x, {"iterations": it, "objective": f, "history": history, "converged": converged}


def prune_support(u, rel: float = 1e-3):
    """Zero every entry below ``rel * max|u|`` (the detected support is what remains)."""
    u = np.array(u, copy=True)
    mag = np.abs(u)
    if mag.size and mag.max() > 0:
        u[mag <= rel * mag.max()] = 0
    return u


def lasso(y, psi, lam: float, *, tol: float = 1e-8, max_iters: int = 2000, support_threshold: float = 1e-3,
          method: Method = Method.LASSO) -> RecoveryEstimate:
    """Complex LASSO ``min ||y - Psi c||^2 + lam ||c||_1``."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    return weighted_lasso(y, psi, lam, np.ones(np.shape(psi)[1]), tol=tol, max_iters=max_iters,
                          support_threshold=support_threshold, method=method)


def weighted_lasso(y, psi, lam: float, w, *, tol: float = 1e-8, max_iters: int = 2000,
                   support_threshold: float = 1e-3, method: Method = Method.WL) -> RecoveryEstimate:
    """``min ||y - Psi c||^2 + lam * sum_i w_i |c_i|`` solved once (no reweighting)."""
    w = np.asarray(w, dtype=float)
    if lam <= 0:
        raise ValueError("lam must be positive")
    if w.shape != (np.shape(psi)[1],) or not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ValueError("weights must be finite, nonnegative and one per column")
    u, info = solve_l1(psi, y, lam * w, tol=tol, max_iters=max_iters)
    info["weights"] = w
    info["lam"] = lam
    return RecoveryEstimate(prune_support(u, support_threshold).astype(complex), method, info)
