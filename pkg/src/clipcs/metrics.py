"""Performance measures: SER, NMSE, PAPR reduction, capacity and their aggregation."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .ofdm import OfdmConfig

__all__ = [
    "TrialRecord",
    "ser",
    "nmse",
    "papr_reduction_db",
    "empirical_ccdf",
    "papr_reduction_ccdf",
    "capacity_per_tone",
    "capacity_pair",
    "capacity_condition",
    "capacity_from_records",
    "aggregate",
    "support_included",
]


@dataclass(frozen=True)
class TrialRecord:
    """Metrics of one method on one Monte Carlo trial.

    ``nmse`` is NaN when the trial produced no clipping. ``clip_var_full`` is the
    per-tone clipping-noise variance of the companion all-data-tones system and is
    NaN unless capacity was requested.
    """

    trial: int
    seed: int
    gamma: float
    method: str
    ser: float
    nmse: float
    papr_reduction_db: float
    resid_var: float
    clip_var: float
    sparsity: int
    wall_time: float
    channel_gain: float = math.nan
    clip_var_full: float = math.nan

    def as_dict(self) -> dict:
        return asdict(self)


def ser(decoded, true) -> float:
    decoded, true = np.asarray(decoded), np.asarray(true)
    if decoded.shape != true.shape:
        raise ValueError("decoded and true symbols differ in length")
    if true.size == 0:
        return 0.0
    return float(np.mean(decoded != true))


def nmse(c, c_hat) -> float:
    """||c - c_hat||^2 / ||c||^2, or NaN for an empty clipper (excluded from averages)."""
    c, c_hat = np.asarray(c), np.asarray(c_hat)
    energy = float(np.vdot(c, c).real)
    if energy == 0.0:
        return math.nan
    e = c - c_hat
    return float(np.vdot(e, e).real) / energy


def papr_reduction_db(x, gamma: float) -> float:
    """10 log10(max|x|^2 / gamma^2): peak power removed by clipping x at gamma."""
    return float(10.0 * np.log10(np.max(np.abs(np.asarray(x)) ** 2) / gamma**2))


def empirical_ccdf(samples) -> tuple[np.ndarray, np.ndarray]:
    """Sorted sample values v and the empirical P(X > v) at each of them."""
    v = np.sort(np.asarray(samples, dtype=float).ravel())
    n = v.size
    # count of samples strictly greater than each value
    greater = n - np.searchsorted(v, v, side="right")
    return v, greater / n if n else greater.astype(float)


def papr_reduction_ccdf(values, min_trials: int = 100) -> tuple[np.ndarray, np.ndarray]:
    values = np.asarray(values, dtype=float)
    if values.size < min_trials:
        raise ValueError(f"need at least {min_trials} trials, got {values.size}")
    return empirical_ccdf(values)


def capacity_per_tone(n_tones: int, n_total: int, data_power: float, distortion_var: float, noise_var: float,
                      channel_gain: float = 1.0) -> float:
    """(n_tones / n_total) log2(1 + |D|^2 Px / (|D|^2 distortion + noise))."""
    sinr = channel_gain * data_power / (channel_gain * distortion_var + noise_var)
    return n_tones / n_total * math.log2(1.0 + sinr)


def capacity_pair(clip_var_full: float, resid_var: float, cfg: OfdmConfig, channel_gain: float = 1.0,
                  data_power: float = 1.0) -> tuple[float, float]:
    """Capacities per transmitted tone of the all-data system (C1) and the reserved-tone system (C2).

    C1 carries data on all N tones and suffers the full clipping noise; C2 uses
    N - m tones and only the residual after subtracting the estimated clipper.
    """
    n, k = cfg.n_subcarriers, cfg.n_data_tones
    s2 = cfg.noise_var
    c1 = capacity_per_tone(n, n, data_power, clip_var_full, s2, channel_gain)
    c2 = capacity_per_tone(k, n, data_power, resid_var, s2, channel_gain)
    return c1, c2


def capacity_condition(resid_var: float, clip_var_full: float, cfg: OfdmConfig, channel_gain: float = 1.0,
                       data_power: float = 1.0) -> bool:
    """True when reserving tones for clipper estimation beats using them for data.

    Evaluated as a bound on the residual variance:
    resid < Px / ((1 + |D|^2 Px / (|D|^2 clip + noise))^(N / (N - m)) - 1) - noise / |D|^2.
    """
    if min(resid_var, clip_var_full) < 0:
        raise ValueError("variances must be nonnegative")
    n, k = cfg.n_subcarriers, cfg.n_data_tones
    s2 = cfg.noise_var
    sinr_full = channel_gain * data_power / (channel_gain * clip_var_full + s2)
    bound = data_power / ((1.0 + sinr_full) ** (n / k) - 1.0) - s2 / channel_gain
    return resid_var < bound


def capacity_from_records(records, cfg: OfdmConfig) -> tuple[float, float]:
    """(C1, C2) from the trial-averaged variances and channel gain of ``records``."""
    clip_full = float(np.mean([r.clip_var_full for r in records]))
    resid = float(np.mean([r.resid_var for r in records]))
    gain = float(np.mean([r.channel_gain for r in records]))
    return capacity_pair(clip_full, resid, cfg, gain)


def aggregate(records) -> dict:
    """Order-independent summary of a batch of records for one (gamma, method) cell."""
    records = sorted(records, key=lambda r: r.trial)
    n = len(records)
    if n == 0:
        raise ValueError("nothing to aggregate")
    sers = np.array([r.ser for r in records])
    nm = np.array([r.nmse for r in records])
    nm = nm[np.isfinite(nm)]
    half = 1.959963984540054 * sers.std(ddof=1) / math.sqrt(n) if n > 1 else math.nan
    return {
        "trials": n,
        "ser": float(sers.mean()),
        "ser_ci95": float(half),
        "nmse": float(nm.mean()) if nm.size else math.nan,
        "papr_red_db_mean": float(np.mean([r.papr_reduction_db for r in records])),
        "resid_var": float(np.mean([r.resid_var for r in records])),
        "wall_ms_median": float(np.median([r.wall_time for r in records]) * 1e3),
        "sparsity_mean": float(np.mean([r.sparsity for r in records])),
    }


def support_included(rank, support, beta: int) -> bool:
    """True when every index of ``support`` is among the ``beta`` smallest entries of ``rank``."""
    pool = np.argsort(np.asarray(rank), kind="stable")[:beta]
    return bool(np.isin(np.asarray(support), pool).all())
