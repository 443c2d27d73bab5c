import numpy as np
import pytest

from clipcs import channel as ch
from clipcs.ofdm import OfdmConfig, dft, draw_tone_map, idft, modulate
from clipcs.qam import constellation


def circular_convolve(h, x):
    """Direct O(N L) circular convolution."""
    n = x.size
    out = np.zeros(n, dtype=complex)
    for i in range(n):
        for l, tap in enumerate(h):
            out[i] += tap * x[(i - l) % n]
    return out


def cn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def test_flat_channel():
    chan = ch.draw_channel(OfdmConfig(channel_taps=1), np.random.default_rng(0))
    mag = np.abs(chan.freq_response)
    assert np.allclose(mag, mag[0])


def test_unit_average_energy():
    cfg = OfdmConfig()
    rng = np.random.default_rng(1)
    e = [np.sum(np.abs(ch.draw_channel(cfg, rng).taps) ** 2) for _ in range(10_000)]
    assert abs(np.mean(e) - 1) < 0.02


def test_reproducible():
    cfg = OfdmConfig()
    a = ch.draw_channel(cfg, np.random.default_rng(9))
    b = ch.draw_channel(cfg, np.random.default_rng(9))
    assert np.array_equal(a.taps, b.taps)


def test_identity_channel():
    rng = np.random.default_rng(2)
    x = cn(rng, 64)
    chan = ch.ChannelRealization.from_taps([1.0], 64)
    assert np.allclose(ch.apply(chan, x), x, atol=1e-14)


def test_convolution_oracle():
    rng = np.random.default_rng(3)
    for _ in range(5):
        h, x = cn(rng, 32), cn(rng, 256)
        chan = ch.ChannelRealization.from_taps(h, 256)
        assert np.max(np.abs(ch.apply(chan, x) - circular_convolve(h, x))) < 1e-10


def test_circulant_diagonalization():
    rng = np.random.default_rng(4)
    chan = ch.ChannelRealization.from_taps(cn(rng, 8), 64)
    x = cn(rng, 64)
    assert np.linalg.norm(chan.circulant() @ x - idft(chan.freq_response * dft(x))) < 1e-10


def test_too_long():
    with pytest.raises(ValueError):
        ch.ChannelRealization.from_taps(np.ones(9), 8)


def test_noise_needs_rng():
    with pytest.raises(ValueError):
        ch.apply(ch.ChannelRealization.from_taps([1.0], 8), np.ones(8), noise_var=0.1)


def test_output_snr():
    cfg = OfdmConfig(snr_db=30)
    rng = np.random.default_rng(5)
    const = constellation(cfg.qam_order)
    sig = noise = 0.0
    for _ in range(10_000):
        tm = draw_tone_map(cfg, rng)
        chan = ch.draw_channel(cfg, rng)
        x = modulate(const.symbols(rng.integers(32, size=tm.k)), tm)
        hx = ch.apply(chan, x)
        y = ch.apply(chan, x, cfg.noise_var, rng)
        sig += np.sum(np.abs(hx) ** 2)
        noise += np.sum(np.abs(y - hx) ** 2)
    assert abs(10 * np.log10(sig / noise) - 30) < 0.2


def test_measurements_see_only_the_clipper():
    cfg = OfdmConfig()
    rng = np.random.default_rng(6)
    tm = draw_tone_map(cfg, rng)
    chan = ch.draw_channel(cfg, rng)
    x = modulate(constellation(32).symbols(rng.integers(32, size=tm.k)), tm)
    y_meas, _ = ch.project_measurements(ch.apply(chan, x), chan, tm)
    assert np.max(np.abs(y_meas)) < 1e-12


def test_operator_matches_convolution():
    cfg = OfdmConfig()
    rng = np.random.default_rng(7)
    tm = draw_tone_map(cfg, rng)
    chan = ch.draw_channel(cfg, rng)
    c = np.zeros(256, complex)
    c[rng.choice(256, 10, replace=False)] = cn(rng, 10)
    psi = ch.measurement_operator(chan, tm)
    direct = dft(circular_convolve(chan.taps, c))[tm.measurement_tones]
    assert np.max(np.abs(psi @ c - direct)) < 1e-10


def test_measurement_noise_white():
    cfg = OfdmConfig(n_subcarriers=64, channel_taps=4, snr_db=10)
    rng = np.random.default_rng(8)
    tm = draw_tone_map(cfg, rng)
    chan = ch.draw_channel(cfg, rng)
    z = np.array([ch.project_measurements(ch.apply(chan, np.zeros(64), cfg.noise_var, rng), chan, tm)[0]
                  for _ in range(20_000)])
    cov = z.T @ z.conj() / z.shape[0]
    s2 = cfg.noise_var
    assert np.allclose(np.diag(cov).real, s2, rtol=0.05)
    assert np.max(np.abs(cov - np.diag(np.diag(cov)))) < 0.05 * s2


def test_equalize_inverts_channel():
    rng = np.random.default_rng(9)
    chan = ch.draw_channel(OfdmConfig(), rng)
    x = cn(rng, 256)
    assert np.allclose(idft(ch.equalize(ch.apply(chan, x), chan)), x, atol=1e-8)


def test_zf_error_var():
    cfg = OfdmConfig()
    rng = np.random.default_rng(10)
    chan = ch.draw_channel(cfg, rng)
    errs = [np.mean(np.abs(idft(ch.equalize(ch.apply(chan, np.zeros(256), cfg.noise_var, rng), chan))) ** 2)
            for _ in range(4000)]
    assert abs(np.mean(errs) / ch.zf_error_var(chan, cfg.noise_var) - 1) < 0.05
