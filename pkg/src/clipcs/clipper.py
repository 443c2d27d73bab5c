"""Sparse peak-reducing clippers (peak suppression and digital-magnitude clipping).

Both clippers are homogeneous: every nonzero c(i) points opposite to x(i).
Thresholds ``gamma`` and magnitudes ``zeta`` are absolute amplitudes, not multiples
of the envelope parameter.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import integrate

from .ofdm import OfdmConfig, ToneMap, dft

__all__ = [
    "Scheme",
    "ClipOutcome",
    "clip",
    "clip_ps",
    "clip_dmc",
    "rayleigh_pdf",
    "tail_probability",
    "expected_sparsity",
    "gamma_for_sparsity",
    "ps_tail_moment",
    "zeta_for_cnr_match",
    "zeta_safe_floor",
    "projected_energy",
    "cnr",
]

log = logging.getLogger(__name__)

EULER_GAMMA = 0.5772156649015329


class Scheme(str, Enum):
    PS = "PS"
    DMC = "DMC"


@dataclass(frozen=True)
class ClipOutcome:
    c: np.ndarray
    support: np.ndarray
    scheme: Scheme
    gamma: float
    zeta: float | None = None

    @property
    def sparsity(self) -> int:
        return int(self.support.size)


def _unit_phasor(x: np.ndarray) -> np.ndarray:
    mag = np.abs(x)
    return np.divide(x, mag, out=np.ones_like(x), where=mag > 0)


def clip_ps(x, gamma: float) -> ClipOutcome:
    """Suppress every sample with |x(i)| > gamma down to gamma, keeping its phase."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    x = np.asarray(x, dtype=complex)
    mag = np.abs(x)
    support = np.flatnonzero(mag > gamma)
    c = np.zeros_like(x)
    # c = (gamma - |x|) e^{j arg x}: anti-phased, and x + c lands on the circle of radius gamma
    c[support] = (gamma - mag[support]) * _unit_phasor(x[support])
    return ClipOutcome(c, support, Scheme.PS, float(gamma))


def zeta_safe_floor(gamma: float, sigma: float, n: int) -> float:
    """Smallest zeta that pulls the expected largest envelope sample down to gamma.

    Uses E[max |x|] ~ sigma sqrt(2 ln N + 2 euler_gamma) for N i.i.d. Rayleigh samples.
    """
    peak = sigma * math.sqrt(2.0 * math.log(n) + 2.0 * EULER_GAMMA)
    return max(0.0, peak - gamma)


def clip_dmc(x, gamma: float, zeta: float, sigma: float | None = None) -> ClipOutcome:
    """Subtract a fixed magnitude zeta along the phase of every sample above gamma.

    If ``sigma`` (the envelope parameter) is given, a warning is logged when zeta is
    below the floor that keeps typical peaks at or under gamma.
    """
    if gamma <= 0 or zeta <= 0:
        raise ValueError("gamma and zeta must be positive")
    x = np.asarray(x, dtype=complex)
    if sigma is not None:
        floor = zeta_safe_floor(gamma, sigma, x.size)
        if zeta < floor:
            log.warning("zeta=%.4g below safe floor %.4g: clipped peaks may stay above gamma", zeta, floor)
    support = np.flatnonzero(np.abs(x) > gamma)
    c = np.zeros_like(x)
    c[support] = -zeta * _unit_phasor(x[support])
    return ClipOutcome(c, support, Scheme.DMC, float(gamma), float(zeta))


def clip(x, scheme: Scheme | str, gamma: float, zeta: float | None = None, sigma: float | None = None) -> ClipOutcome:
    scheme = Scheme(scheme)
    if scheme is Scheme.PS:
        return clip_ps(x, gamma)
    if zeta is None:
        raise ValueError("DMC clipping needs zeta")
    return clip_dmc(x, gamma, zeta, sigma)


def rayleigh_pdf(r, sigma: float):
    r = np.asarray(r, dtype=float)
    return np.where(r >= 0, r / sigma**2 * np.exp(-(r**2) / (2 * sigma**2)), 0.0)


def tail_probability(gamma: float, sigma: float) -> float:
    """P(|X| > gamma) for a Rayleigh envelope with parameter sigma."""
    return math.exp(-(gamma**2) / (2 * sigma**2))


def expected_sparsity(gamma: float, cfg: OfdmConfig) -> float:
    """Mean number of clipped samples per block, N * P(|X| > gamma)."""
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    return cfg.n_subcarriers * tail_probability(gamma, cfg.envelope_sigma)


def gamma_for_sparsity(target: float, cfg: OfdmConfig) -> float:
    """Threshold whose expected sparsity is ``target`` (0 < target < N)."""
    n = cfg.n_subcarriers
    if not 0 < target < n:
        raise ValueError("target sparsity must lie in (0, N)")
    return cfg.envelope_sigma * math.sqrt(2.0 * math.log(n / target))


def ps_tail_moment(gamma: float, sigma: float, power: int = 2) -> float:
    """E[(|X| - gamma)^power | |X| > gamma] by quadrature of the Rayleigh tail."""
    tail = tail_probability(gamma, sigma)
    if tail == 0.0:
        return 0.0
    # substitute r = gamma + u and integrate the conditional density over u >= 0
    f = lambda u: u**power * (gamma + u) / sigma**2 * math.exp(-(u * u + 2 * gamma * u) / (2 * sigma**2))
    val, err = integrate.quad(f, 0.0, math.inf, epsabs=0.0, epsrel=1e-13, limit=200)
    if not np.isfinite(val):
        raise ArithmeticError(f"tail integration failed (gamma={gamma}, sigma={sigma})")
    return val


def zeta_for_cnr_match(gamma: float, cfg_or_sigma) -> float:
    """DMC magnitude whose per-coefficient energy equals that of peak suppression.

    Solves zeta^2 = E[(|X| - gamma)^2 | |X| > gamma], so both clippers yield the
    same expected projected energy for the same support.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    sigma = cfg_or_sigma.envelope_sigma if isinstance(cfg_or_sigma, OfdmConfig) else float(cfg_or_sigma)
    return math.sqrt(ps_tail_moment(gamma, sigma, 2))


def projected_energy(c, tones: ToneMap, channel_freq) -> float:
    """||Psi c||^2 with Psi = S_m^T D F."""
    k = tones.measurement_tones
    return float(np.sum(np.abs(np.asarray(channel_freq)[k] * dft(c)[k]) ** 2))


def cnr(outcome: ClipOutcome, tones: ToneMap, channel_freq, noise_var: float) -> float:
    """Clipper-to-noise ratio ||Psi c||^2 / E||z'||^2 in dB (-inf when c = 0)."""
    if noise_var <= 0:
        raise ValueError("CNR needs a positive noise variance")
    e = projected_energy(outcome.c, tones, channel_freq)
    if e == 0.0:
        return -math.inf
    return 10.0 * math.log10(e / (tones.m * noise_var))
