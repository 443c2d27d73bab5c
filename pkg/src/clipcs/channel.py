"""Rayleigh multipath channel as a circulant operator, AWGN and measurement projection."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ofdm import OfdmConfig, ToneMap, dft, idft

__all__ = [
    "ChannelRealization",
    "draw_channel",
    "apply",
    "project_measurements",
    "measurement_operator",
    "equalize",
    "zf_error_var",
    "ZF_FLOOR",
]

ZF_FLOOR = 1e-12


@dataclass(frozen=True)
class ChannelRealization:
    taps: np.ndarray
    freq_response: np.ndarray  # sqrt(N) F h, i.e. the plain FFT of the zero-padded taps

    @classmethod
    def from_taps(cls, taps, n_subcarriers: int) -> "ChannelRealization":
        h = np.asarray(taps, dtype=complex).ravel()
        if h.size > n_subcarriers:
            raise ValueError("channel longer than the OFDM block")
        padded = np.zeros(n_subcarriers, dtype=complex)
        padded[: h.size] = h
        return cls(h, np.fft.fft(padded))

    @property
    def n_subcarriers(self) -> int:
        return self.freq_response.size

    def circulant(self) -> np.ndarray:
        """Dense circulant H with H[k, l] = h[(k - l) mod N]."""
        n = self.n_subcarriers
        col = np.zeros(n, dtype=complex)
        col[: self.taps.size] = self.taps
        idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
        return col[idx]


def draw_channel(cfg: OfdmConfig, rng: np.random.Generator) -> ChannelRealization:
    """L i.i.d. CN(0, 1/L) taps, so E||h||^2 = 1."""
    L = cfg.channel_taps
    taps = (rng.standard_normal(L) + 1j * rng.standard_normal(L)) * np.sqrt(0.5 / L)
    return ChannelRealization.from_taps(taps, cfg.n_subcarriers)


def apply(channel: ChannelRealization, block, noise_var: float = 0.0, rng: np.random.Generator | None = None) -> np.ndarray:
    """Circular convolution with the taps (done as F^H D F) plus CN(0, noise_var) noise."""
    x = np.asarray(block, dtype=complex)
    y = idft(channel.freq_response * dft(x))
    if noise_var > 0:
        if rng is None:
            raise ValueError("noise requested without an RNG")
        y = y + (rng.standard_normal(x.size) + 1j * rng.standard_normal(x.size)) * np.sqrt(noise_var / 2)
    return y


def measurement_operator(channel: ChannelRealization, tones: ToneMap) -> np.ndarray:
    """The m x N matrix Psi = S_m^T D F."""
    n = channel.n_subcarriers
    k = tones.measurement_tones
    rows = np.exp(-2j * np.pi * np.outer(k, np.arange(n)) / n) / np.sqrt(n)
    return channel.freq_response[k, None] * rows


def project_measurements(y, channel: ChannelRealization, tones: ToneMap) -> tuple[np.ndarray, np.ndarray]:
    """Reserved-tone observations y' = S_m^T F y and the operator Psi with y' = Psi c + z'."""
    y_meas = dft(np.asarray(y, dtype=complex))[tones.measurement_tones]
    return y_meas, measurement_operator(channel, tones)


def equalize(y, channel: ChannelRealization, eps: float = ZF_FLOOR) -> np.ndarray:
    """Per-tone zero-forcing in the frequency domain, floored at |h|^2 + eps."""
    h = channel.freq_response
    return dft(np.asarray(y, dtype=complex)) * np.conj(h) / (np.abs(h) ** 2 + eps)


def zf_error_var(channel: ChannelRealization, noise_var: float, eps: float = ZF_FLOOR) -> float:
    """Per-sample variance of the time-domain zero-forcing error F^H D^-1 z."""
    g = np.abs(channel.freq_response) ** 2
    return float(noise_var * np.mean(g / (g + eps) ** 2))
