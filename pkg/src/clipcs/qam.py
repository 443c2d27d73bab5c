"""Unit-power QAM constellations with Gray(-like) labels and hard decisions."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = ["Constellation", "constellation", "qam_map", "qam_demap"]


def _gray(n: int) -> np.ndarray:
    i = np.arange(n)
    return i ^ (i >> 1)


def _pam_levels(bits: int) -> tuple[np.ndarray, np.ndarray]:
    """Amplitude levels -(2^b - 1) .. (2^b - 1) and the Gray label of each."""
    n = 1 << bits
    return 2 * np.arange(n) - (n - 1), _gray(n)


@dataclass(frozen=True)
class Constellation:
    points: np.ndarray   # points[label] is the unit-power symbol carrying that label
    bits_per_symbol: int

    @property
    def order(self) -> int:
        return self.points.size

    def symbols(self, labels) -> np.ndarray:
        return self.points[np.asarray(labels, dtype=np.intp)]

    def decide(self, received) -> np.ndarray:
        """Minimum-distance label for every received sample."""
        r = np.asarray(received, dtype=complex)
        d2 = np.abs(r.reshape(-1, 1) - self.points[None, :]) ** 2
        return d2.argmin(axis=1).reshape(r.shape)


def _square(order: int) -> np.ndarray:
    half = int(np.log2(order)) // 2
    levels, gray = _pam_levels(half)
    pts = np.empty(order, dtype=complex)
    for a, ga in zip(levels, gray):
        for b, gb in zip(levels, gray):
            pts[(ga << half) | gb] = a + 1j * b
    return pts


def _cross32() -> np.ndarray:
    # Start from a Gray-labelled 8x4 rectangle and fold the outer columns
    # (|I| = 7) onto the missing rows (|Q| = 5), giving the 6x6-minus-corners cross.
    i_levels, i_gray = _pam_levels(3)
    q_levels, q_gray = _pam_levels(2)
    pts = np.empty(32, dtype=complex)
    for a, ga in zip(i_levels, i_gray):
        for b, gb in zip(q_levels, q_gray):
            if abs(a) == 7:
                a2, b2 = np.sign(a) * (4 - abs(b)), np.sign(b) * 5
            else:
                a2, b2 = a, b
            pts[(ga << 2) | gb] = a2 + 1j * b2
    return pts


@lru_cache(maxsize=None)
def constellation(order: int) -> Constellation:
    """Unit-average-power constellation for square M-QAM (M = 4^n) or 32-cross."""
    bits = int(round(np.log2(order))) if order > 0 else 0
    if order < 4 or 1 << bits != order:
        raise ValueError(f"unsupported QAM order {order}")
    if bits % 2 == 0:
        pts = _square(order)
    elif order == 32:
        pts = _cross32()
    else:
        raise ValueError(f"unsupported QAM order {order}")
    pts = pts / np.sqrt(np.mean(np.abs(pts) ** 2))
    pts.setflags(write=False)
    return Constellation(pts, bits)


def qam_map(bits, order: int) -> np.ndarray:
    """Map a flat 0/1 bit array (MSB first per symbol) to complex symbols."""
    const = constellation(order)
    b = np.asarray(bits, dtype=np.int64).ravel()
    k = const.bits_per_symbol
    if b.size % k:
        raise ValueError(f"bit count {b.size} is not a multiple of {k}")
    labels = b.reshape(-1, k) @ (1 << np.arange(k)[::-1])
    return const.symbols(labels)


def qam_demap(symbols, order: int) -> np.ndarray:
    """Hard minimum-distance demapping back to a flat bit array."""
    const = constellation(order)
    labels = const.decide(np.ravel(symbols))
    k = const.bits_per_symbol
    return ((labels[:, None] >> np.arange(k)[::-1]) & 1).astype(np.int8).ravel()
