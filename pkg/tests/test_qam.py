import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from clipcs.qam import constellation, qam_demap, qam_map


@pytest.mark.parametrize("order", [4, 16, 32, 64, 256])
def test_unit_energy(order):
    pts = constellation(order).points
    assert pts.size == order
    assert abs(np.mean(np.abs(pts) ** 2) - 1) < 1e-12
    assert np.unique(np.round(pts, 9)).size == order


def test_qpsk_points():
    want = {complex(a, b) / np.sqrt(2) for a in (-1, 1) for b in (-1, 1)}
    got = set(np.round(constellation(4).points, 12))
    assert got == {complex(np.round(w, 12)) for w in want}


def test_cross32_shape():
    # 6x6 grid of odd levels minus the four corners, before normalization
    raw = constellation(32).points * np.sqrt(20.0)
    grid = {(int(round(p.real)), int(round(p.imag))) for p in raw}
    levels = [-5, -3, -1, 1, 3, 5]
    want = {(a, b) for a in levels for b in levels if not (abs(a) == 5 and abs(b) == 5)}
    assert grid == want


@pytest.mark.parametrize("order", [16, 64])
def test_square_gray(order):
    # horizontal and vertical neighbours differ in exactly one bit
    const = constellation(order)
    pts = const.points
    dmin = np.min(np.abs(pts[:, None] - pts[None, :]) + 10 * np.eye(order))
    for a in range(order):
        for b in range(order):
            if abs(abs(pts[a] - pts[b]) - dmin) < 1e-9:
                assert bin(a ^ b).count("1") == 1


@pytest.mark.parametrize("order", [4, 16, 32, 64])
def test_round_trip(order):
    rng = np.random.default_rng(order)
    bits = rng.integers(0, 2, size=int(np.log2(order)) * 500)
    assert np.array_equal(qam_demap(qam_map(bits, order), order), bits)


@given(st.lists(st.integers(0, 31), min_size=1, max_size=64))
def test_decide_inverts_symbols(labels):
    const = constellation(32)
    assert np.array_equal(const.decide(const.symbols(labels)), labels)


def test_bit_count_checked():
    with pytest.raises(ValueError):
        qam_map(np.ones(7), 32)


@pytest.mark.parametrize("order", [2, 8, 128, 0])
def test_unsupported(order):
    with pytest.raises(ValueError):
        constellation(order)
