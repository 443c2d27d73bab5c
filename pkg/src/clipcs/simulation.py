"""One Monte Carlo trial end to end: transmitter, channel, receiver estimators, metrics.

Every random draw of a trial comes from a generator seeded by
``(master_seed, trial_index, stream)``, so a trial is reproducible on its own and
the same data, channel and noise are shared by every threshold and method.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from . import channel as ch
from .clipper import ClipOutcome, Scheme, clip, ps_tail_moment, tail_probability
from .metrics import TrialRecord, nmse, papr_reduction_db, ser
from .ofdm import OfdmConfig, ToneMap, dft, draw_tone_map, idft, modulate
from .qam import constellation
from .recovery import (
    Method,
    RecoveryEstimate,
    antiphase,
    beta_fbmp,
    force_digital_magnitudes,
    lasso,
    oracle_ls,
    ps_distances,
    ps_weights,
    recover_rts,
    refine_lmmse,
    refine_ls,
    weighted_lasso,
)

__all__ = [
    "Stream",
    "ReceiverSettings",
    "Trial",
    "trial_rng",
    "transmit",
    "draw_trial",
    "estimate",
    "decode",
    "evaluate",
    "run_trial",
    "full_band_clip_var",
]


class Stream(IntEnum):
    TONES = 0
    DATA = 1
    CHANNEL = 2
    NOISE = 3
    FULL_BAND = 4


def trial_rng(master_seed: int, trial: int, stream: Stream) -> np.random.Generator:
    return np.random.default_rng([int(master_seed), int(trial), int(stream)])


@dataclass(frozen=True)
class ReceiverSettings:
    """Receiver knobs not covered by ``OfdmConfig``.

    ``sigma_e`` selects the envelope-error model used by the weights: ``"zf"`` is the
    exact per-sample variance of the zero-forcing error, ``"rms"`` the noise
    variance divided by the mean channel power.
    """

    refine: str = "ls"
    sigma_e: str = "zf"
    beta_fraction: float = 0.3
    rho: int = 5
    s_max_factor: float = 1.5
    force_digital: bool = False

    def __post_init__(self):
        if self.refine not in ("ls", "lmmse", "none"):
            raise ValueError(f"unknown refinement {self.refine!r}")
        if self.sigma_e not in ("zf", "rms"):
            raise ValueError(f"unknown sigma_e model {self.sigma_e!r}")


@dataclass(frozen=True)
class Trial:
    cfg: OfdmConfig
    index: int
    gamma: float
    tones: ToneMap
    labels: np.ndarray
    x: np.ndarray
    outcome: ClipOutcome
    channel: ch.ChannelRealization
    y_freq: np.ndarray
    y_meas: np.ndarray
    psi: np.ndarray
    xbar_hat: np.ndarray
    error_var: float
    seed: int = 0

    @property
    def sigma_e(self) -> float:
        """Rayleigh parameter of the envelope estimation error."""
        return math.sqrt(self.error_var / 2.0)


def transmit(cfg: OfdmConfig, index: int, master_seed: int | None = None):
    """Tone map, data labels and unclipped time block of trial ``index``."""
    seed = cfg.seed if master_seed is None else master_seed
    tones = draw_tone_map(cfg, trial_rng(seed, index, Stream.TONES))
    const = constellation(cfg.qam_order)
    labels = trial_rng(seed, index, Stream.DATA).integers(const.order, size=tones.k)
    return tones, labels, modulate(const.symbols(labels), tones)


def draw_trial(cfg: OfdmConfig, index: int, gamma: float, scheme: Scheme | str = Scheme.PS,
               zeta: float | None = None, settings: ReceiverSettings | None = None,
               master_seed: int | None = None) -> Trial:
    """Build the transmitted block, clip it, pass it through the channel and demodulate."""
    settings = settings or ReceiverSettings()
    seed = cfg.seed if master_seed is None else master_seed
    tones, labels, x = transmit(cfg, index, seed)
    outcome = clip(x, scheme, gamma, zeta)
    channel = ch.draw_channel(cfg, trial_rng(seed, index, Stream.CHANNEL))
    y = ch.apply(channel, x + outcome.c, cfg.noise_var, trial_rng(seed, index, Stream.NOISE))
    y_freq = dft(y)
    y_meas, psi = y_freq[tones.measurement_tones], ch.measurement_operator(channel, tones)
    h = channel.freq_response
    xbar_hat = idft(y_freq * np.conj(h) / (np.abs(h) ** 2 + ch.ZF_FLOOR))
    if settings.sigma_e == "zf":
        err = ch.zf_error_var(channel, cfg.noise_var)
    else:
        err = cfg.noise_var / float(np.mean(np.abs(h) ** 2))
    return Trial(cfg, index, gamma, tones, labels, x, outcome, channel, y_freq, y_meas, psi, xbar_hat, err, seed)


def _refine(est: RecoveryEstimate, trial: Trial, settings: ReceiverSettings, phases=None) -> RecoveryEstimate:
    if settings.refine == "none":
        return est
    if settings.refine == "lmmse" and phases is None:
        prior_var = _prior_var(trial)
        return refine_lmmse(est, trial.y_meas, trial.psi, prior_var, 0.0, trial.cfg.noise_var)
    return refine_ls(est, trial.y_meas, trial.psi, phases=phases)


def _prior_var(trial: Trial) -> float:
    o = trial.outcome
    if o.scheme is Scheme.DMC:
        return float(o.zeta) ** 2
    return ps_tail_moment(trial.gamma, trial.cfg.envelope_sigma, 2)


def estimate(trial: Trial, method: Method | str, settings: ReceiverSettings | None = None) -> RecoveryEstimate:
    """Run one receiver estimator on a drawn trial."""
    settings = settings or ReceiverSettings()
    method = Method(method)
    cfg = trial.cfg
    n = cfg.n_subcarriers
    y, psi = trial.y_meas, trial.psi
    lam = cfg.lasso_lambda
    opts = dict(tol=cfg.lasso_tol, max_iters=cfg.lasso_max_iters, support_threshold=cfg.support_threshold)
    sigma = cfg.envelope_sigma
    phases = antiphase(trial.xbar_hat)

    if method is Method.NONE:
        return RecoveryEstimate.zero(n)
    if method is Method.ORACLE_LS:
        return oracle_ls(y, psi, trial.outcome.support)
    if method is Method.LASSO:
        return _refine(lasso(y, psi, lam, **opts), trial, settings)
    if method is Method.WL:
        w = ps_weights(trial.xbar_hat, trial.gamma, sigma, trial.sigma_e)
        return _refine(weighted_lasso(y, psi, lam, w, **opts), trial, settings)
    if method is Method.BETA_FBMP:
        p = tail_probability(trial.gamma, sigma)
        beta = max(1, int(round(settings.beta_fraction * n)))
        s_max = max(1, math.ceil(settings.s_max_factor * n * p))
        rank = ps_distances(trial.xbar_hat, trial.gamma)
        p = min(max(p, 1e-12), 1 - 1e-12)
        return beta_fbmp(y, psi, rank, beta, settings.rho, s_max, prior_var=_prior_var(trial),
                         noise_var=cfg.noise_var, p_active=p)

    if method is Method.PAL_STR:
        base = _refine(lasso(y, psi, lam, **opts), trial, settings)
        mag = np.abs(base.c_hat)
        est = RecoveryEstimate(np.exp(1j * phases) * mag, Method.PAL_STR, base.diagnostics)
    elif method is Method.ORACLE_PHASE:
        phases = antiphase(trial.x)
        est = _refine(recover_rts(y, psi, phases, lam, method=Method.ORACLE_PHASE, **opts), trial, settings,
                      phases)
    elif method is Method.PAL_RTS:
        est = _refine(recover_rts(y, psi, phases, lam, method=Method.PAL_RTS, **opts), trial, settings, phases)
    elif method is Method.WPAL:
        w = ps_weights(trial.xbar_hat, trial.gamma, sigma, trial.sigma_e)
        est = _refine(recover_rts(y, psi, phases, lam, w, method=Method.WPAL, **opts), trial, settings, phases)
    else:  # pragma: no cover - enum is exhaustive
        raise ValueError(method)
    if settings.force_digital and trial.outcome.zeta is not None:
        est = force_digital_magnitudes(est, trial.outcome.zeta)
    return est


def decode(trial: Trial, c_hat) -> np.ndarray:
    """Zero-force the data tones, remove the estimated clipper and slice."""
    d = trial.tones.data_tones
    h = trial.channel.freq_response[d]
    eq = trial.y_freq[d] * np.conj(h) / (np.abs(h) ** 2 + ch.ZF_FLOOR)
    return constellation(trial.cfg.qam_order).decide(eq - dft(c_hat)[d])


def full_band_clip_var(trial: Trial, scheme: Scheme | str, zeta: float | None = None) -> float:
    """Per-tone clipping-noise variance of the companion system that puts data on all N tones."""
    cfg = trial.cfg
    const = constellation(cfg.qam_order)
    labels = trial_rng(trial.seed, trial.index, Stream.FULL_BAND).integers(const.order, size=cfg.n_subcarriers)
    x_full = idft(const.symbols(labels))
    c_full = clip(x_full, scheme, trial.gamma, zeta).c
    return float(np.vdot(c_full, c_full).real) / cfg.n_subcarriers


def evaluate(trial: Trial, method: Method | str, settings: ReceiverSettings | None = None,
             clip_var_full: float = math.nan) -> TrialRecord:
    method = Method(method)
    start = time.perf_counter()
    est = estimate(trial, method, settings)
    wall = time.perf_counter() - start
    c = trial.outcome.c
    d = trial.tones.data_tones
    resid = dft(c - est.c_hat)[d]
    clip_tones = dft(c)[d]
    return TrialRecord(
        trial=trial.index,
        seed=trial.seed,
        gamma=trial.gamma,
        method=method.value,
        ser=ser(decode(trial, est.c_hat), trial.labels),
        nmse=nmse(c, est.c_hat),
        papr_reduction_db=papr_reduction_db(trial.x, trial.gamma),
        resid_var=float(np.mean(np.abs(resid) ** 2)),
        clip_var=float(np.mean(np.abs(clip_tones) ** 2)),
        sparsity=trial.outcome.sparsity,
        wall_time=wall,
        channel_gain=float(np.mean(np.abs(trial.channel.freq_response) ** 2)),
        clip_var_full=clip_var_full,
    )


def run_trial(cfg: OfdmConfig, index: int, gamma: float, methods, scheme: Scheme | str = Scheme.PS,
              zeta: float | None = None, settings: ReceiverSettings | None = None, capacity: bool = False,
              master_seed: int | None = None) -> list[TrialRecord]:
    """Draw trial ``index`` once and evaluate every method on it."""
    trial = draw_trial(cfg, index, gamma, scheme, zeta, settings, master_seed)
    full = full_band_clip_var(trial, scheme, zeta) if capacity else math.nan
    return [evaluate(trial, m, settings, full) for m in methods]
