"""Data-derived l1 weights for peak-suppression clippers.

A sample whose equalized envelope sits close to the clipping threshold is a likely
clip location. The weight is the posterior probability that no clip happened
given the distance d(i) = ||xbar_hat(i)| - gamma|, with Rayleigh models for the
estimation error (|E|) and for the noisy envelope (|X + E|).
"""
from __future__ import annotations

import numpy as np

__all__ = ["ps_distances", "ps_weights", "W_MIN"]

W_MIN = 1e-6


def ps_distances(xbar_hat, gamma: float) -> np.ndarray:
    return np.abs(np.abs(np.asarray(xbar_hat)) - gamma)


def _terms(d, gamma, sigma_x, sigma_e):
    # complex variances of X and E; Rayleigh parameters are sigma_x, sigma_e
    vx, ve = 2.0 * sigma_x**2, 2.0 * sigma_e**2
    eta = 1.0 - np.exp(-(gamma**2) / vx)  # P(no clip) = P(|X| <= gamma)
    a = np.abs(gamma - d)  # the envelope model is evaluated at |gamma - d|
    diamond = 2.0 * eta * a / (vx + ve)
    club = a**2 / (vx + ve)
    triangle = 2.0 * (1.0 - eta) * d / ve
    spade = d**2 / ve
    return diamond, club, triangle, spade


def _branch_club(diamond, club, triangle, spade):
    """Form scaled by e^{-spade}; safe where club >= spade."""
    num = diamond * np.exp(-(club - spade))
    return num / (num + triangle)


def _branch_spade(diamond, club, triangle, spade):
    """Form scaled by e^{-club}; safe where spade >= club."""
    return diamond / (diamond + triangle * np.exp(-(spade - club)))


def ps_weights(xbar_hat, gamma: float, sigma_x: float, sigma_e: float, w_min: float = W_MIN) -> np.ndarray:
    """Posterior no-clip probability per sample, clamped to ``[w_min, 1]``.

    ``sigma_x`` and ``sigma_e`` are the Rayleigh parameters of the data envelope and
    of the envelope estimation error.
    """
    if sigma_e <= 0:
        raise ValueError("sigma_e must be positive")
    d = ps_distances(xbar_hat, gamma)
    diamond, club, triangle, spade = _terms(d, gamma, sigma_x, sigma_e)
    use_club = club >= spade
    w = np.empty_like(d)
    with np.errstate(invalid="ignore", divide="ignore"):
        w[use_club] = _branch_club(diamond[use_club], club[use_club], triangle[use_club], spade[use_club])
        w[~use_club] = _branch_spade(diamond[~use_club], club[~use_club], triangle[~use_club], spade[~use_club])
    # 0/0 only when both likelihoods vanish; treat as uninformative
    w = np.where(np.isnan(w), 1.0, w)
    return np.clip(w, w_min, 1.0)
