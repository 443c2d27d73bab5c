"""OFDM block construction, tone partitioning and unitary DFT helpers.

All transforms are unitary: ``dft(x) = F x`` with ``F[k, l] = exp(-2j pi k l / N) / sqrt(N)``.
Blocks are plain complex numpy vectors; whether a vector lives in the time or the
frequency domain is tracked by the caller.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "OfdmConfig",
    "ToneMap",
    "dft",
    "idft",
    "dft_matrix",
    "draw_tone_map",
    "modulate",
    "papr",
]


@dataclass(frozen=True)
class OfdmConfig:
    """System constants shared by every stage of a trial.

    ``n_measurement_tones`` defaults to ``round(0.2 * N)``. Solver knobs live here so a
    whole experiment is described by one immutable object.
    """

    n_subcarriers: int = 256
    n_measurement_tones: int | None = None
    qam_order: int = 32
    channel_taps: int = 32
    snr_db: float = 30.0
    seed: int = 0
    lasso_kappa: float = 1.0
    lasso_tol: float = 1e-8
    lasso_max_iters: int = 2000
    support_threshold: float = 1e-3

    def __post_init__(self):
        n = self.n_subcarriers
        if n < 1:
            raise ValueError("n_subcarriers must be positive")
        if self.n_measurement_tones is None:
            object.__setattr__(self, "n_measurement_tones", int(round(0.2 * n)))
        m = self.n_measurement_tones
        if not 0 <= m < n:
            raise ValueError(f"need 0 <= m < N, got m={m}, N={n}")
        if not 1 <= self.channel_taps <= n:
            raise ValueError(f"need 1 <= L <= N, got L={self.channel_taps}")
        if self.qam_order < 4:
            raise ValueError("qam_order must be at least 4")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @property
    def n_data_tones(self) -> int:
        return self.n_subcarriers - self.n_measurement_tones

    @property
    def envelope_sigma(self) -> float:
        """Rayleigh parameter of the time-domain envelope |x(i)|.

        With unit-power symbols on k of N tones each sample is CN(0, k/N), so the
        envelope parameter is sqrt(k / 2N).
        """
        return math.sqrt(self.n_data_tones / (2.0 * self.n_subcarriers))

    @property
    def noise_var(self) -> float:
        """Per-sample noise variance giving E||Hx||^2 / E||z||^2 = SNR."""
        return (self.n_data_tones / self.n_subcarriers) / 10.0 ** (self.snr_db / 10.0)

    @property
    def lasso_lambda(self) -> float:
        return self.lasso_kappa * math.sqrt(self.noise_var) * math.sqrt(2.0 * math.log(self.n_subcarriers))

    def replace(self, **changes) -> "OfdmConfig":
        return replace(self, **changes)


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=np.intp)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ToneMap:
    """Partition of the N subcarriers into data tones and measurement tones."""

    data_tones: np.ndarray
    measurement_tones: np.ndarray
    n_subcarriers: int = field(default=0)

    def __post_init__(self):
        d = _readonly(np.sort(self.data_tones))
        m = _readonly(np.sort(self.measurement_tones))
        n = self.n_subcarriers or d.size + m.size
        both = np.concatenate([d, m])
        if both.size != n or not np.array_equal(np.sort(both), np.arange(n)):
            raise ValueError("data and measurement tones must partition 0..N-1")
        object.__setattr__(self, "data_tones", d)
        object.__setattr__(self, "measurement_tones", m)
        object.__setattr__(self, "n_subcarriers", n)

    @classmethod
    def from_measurement_tones(cls, measurement_tones, n_subcarriers: int) -> "ToneMap":
        mask = np.zeros(n_subcarriers, dtype=bool)
        mask[np.asarray(measurement_tones, dtype=np.intp)] = True
        return cls(np.flatnonzero(~mask), np.flatnonzero(mask), n_subcarriers)

    @property
    def k(self) -> int:
        return self.data_tones.size

    @property
    def m(self) -> int:
        return self.measurement_tones.size

    def selection_data(self) -> np.ndarray:
        """The N x k matrix S_x."""
        s = np.zeros((self.n_subcarriers, self.k))
        s[self.data_tones, np.arange(self.k)] = 1.0
        return s

    def selection_measurement(self) -> np.ndarray:
        """The N x m matrix S_m."""
        s = np.zeros((self.n_subcarriers, self.m))
        s[self.measurement_tones, np.arange(self.m)] = 1.0
        return s


def dft(x, axis: int = -1) -> np.ndarray:
    return np.fft.fft(x, axis=axis, norm="ortho")


def idft(x, axis: int = -1) -> np.ndarray:
    return np.fft.ifft(x, axis=axis, norm="ortho")


def dft_matrix(n: int) -> np.ndarray:
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)


def draw_tone_map(cfg: OfdmConfig, rng: np.random.Generator) -> ToneMap:
    """Uniformly random m-subset of the tones reserved for measurements."""
    n, m = cfg.n_subcarriers, cfg.n_measurement_tones
    meas = rng.choice(n, size=m, replace=False) if m else np.empty(0, dtype=np.intp)
    return ToneMap.from_measurement_tones(meas, n)


def modulate(data_symbols, tones: ToneMap) -> np.ndarray:
    """Time-domain block ``F^H S_x d``; measurement tones stay empty."""
    d = np.asarray(data_symbols, dtype=complex)
    if d.shape != (tones.k,):
        raise ValueError(f"expected {tones.k} data symbols, got shape {d.shape}")
    spectrum = np.zeros(tones.n_subcarriers, dtype=complex)
    spectrum[tones.data_tones] = d
    return idft(spectrum)


def papr(block) -> float:
    """Peak-to-average power ratio of a time-domain block in dB."""
    p = np.abs(np.asarray(block)) ** 2
    mean = p.mean() if p.size else 0.0
    if mean == 0.0:
        raise ValueError("PAPR undefined for an all-zero block")
    return float(10.0 * np.log10(p.max() / mean))
