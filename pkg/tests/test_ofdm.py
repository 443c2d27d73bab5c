import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from clipcs.ofdm import OfdmConfig, ToneMap, dft, dft_matrix, draw_tone_map, idft, modulate, papr
from clipcs.qam import constellation


def random_symbols(rng, k, order=32):
    return constellation(order).symbols(rng.integers(order, size=k))


class TestConfig:
    def test_defaults(self):
        cfg = OfdmConfig()
        assert cfg.n_measurement_tones == 51
        assert cfg.n_data_tones == 205
        assert math.isclose(cfg.envelope_sigma, math.sqrt(205 / 512))

    def test_noise_var_matches_snr(self):
        cfg = OfdmConfig(snr_db=20)
        assert math.isclose(cfg.noise_var, 205 / 256 / 100)

    def test_lambda(self):
        cfg = OfdmConfig(lasso_kappa=2.0)
        assert math.isclose(cfg.lasso_lambda, 2 * math.sqrt(cfg.noise_var * 2 * math.log(256)))

    @pytest.mark.parametrize("kw", [
        dict(n_measurement_tones=256),
        dict(n_measurement_tones=-1),
        dict(channel_taps=0),
        dict(channel_taps=257),
        dict(qam_order=2),
        dict(seed=-1),
        dict(seed=2**64),
    ])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            OfdmConfig(**kw)

    def test_replace_revalidates(self):
        with pytest.raises(ValueError):
            OfdmConfig().replace(channel_taps=1000)


class TestToneMap:
    def test_empty_reservation(self):
        tm = draw_tone_map(OfdmConfig(n_subcarriers=4, n_measurement_tones=0, channel_taps=1), np.random.default_rng(0))
        assert tm.m == 0
        assert list(tm.data_tones) == [0, 1, 2, 3]

    def test_default_partition(self):
        tm = draw_tone_map(OfdmConfig(), np.random.default_rng(3))
        assert tm.m == 51 and tm.k == 205
        assert np.intersect1d(tm.data_tones, tm.measurement_tones).size == 0
        assert np.array_equal(np.union1d(tm.data_tones, tm.measurement_tones), np.arange(256))

    def test_deterministic(self):
        cfg = OfdmConfig()
        a = draw_tone_map(cfg, np.random.default_rng(11))
        b = draw_tone_map(cfg, np.random.default_rng(11))
        assert np.array_equal(a.measurement_tones, b.measurement_tones)

    def test_selections_orthogonal(self):
        tm = draw_tone_map(OfdmConfig(), np.random.default_rng(1))
        assert not np.any(tm.selection_data().T @ tm.selection_measurement())

    def test_not_a_partition(self):
        with pytest.raises(ValueError):
            ToneMap(np.array([0, 1]), np.array([1, 2]), 3)

    def test_read_only(self):
        tm = ToneMap.from_measurement_tones([2], 4)
        with pytest.raises(ValueError):
            tm.data_tones[0] = 3


class TestDft:
    def test_matrix_unitary(self):
        F = dft_matrix(64)
        assert np.allclose(F.conj().T @ F, np.eye(64), atol=1e-12)

    def test_matches_matrix(self):
        rng = np.random.default_rng(0)
        v = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        assert np.allclose(dft(v), dft_matrix(64) @ v, atol=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 512), st.integers(0, 2**32 - 1))
    def test_parseval_and_round_trip(self, n, seed):
        rng = np.random.default_rng(seed)
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        norm = np.linalg.norm(v)
        assert abs(np.linalg.norm(dft(v)) - norm) <= 1e-12 * norm
        assert np.linalg.norm(idft(dft(v)) - v) <= 1e-12 * norm


class TestModulate:
    def test_single_tone(self):
        tm = ToneMap.from_measurement_tones([3, 5], 16)
        d = np.zeros(tm.k, complex)
        d[0] = 1.0  # tone 0
        assert np.allclose(modulate(d, tm), 1 / 4)

    def test_reserved_tones_empty(self):
        rng = np.random.default_rng(4)
        tm = draw_tone_map(OfdmConfig(), rng)
        x = modulate(random_symbols(rng, tm.k), tm)
        assert np.max(np.abs(dft(x)[tm.measurement_tones])) < 1e-12

    def test_length_checked(self):
        tm = ToneMap.from_measurement_tones([0], 4)
        with pytest.raises(ValueError):
            modulate(np.ones(4), tm)

    def test_mean_energy(self):
        rng = np.random.default_rng(5)
        tm = draw_tone_map(OfdmConfig(), rng)
        const = constellation(32)
        d = const.points[rng.integers(32, size=(10_000, tm.k))]
        spec = np.zeros((10_000, 256), complex)
        spec[:, tm.data_tones] = d
        x = idft(spec, axis=1)
        ratio = np.mean(np.sum(np.abs(x) ** 2, axis=1)) / tm.k
        assert abs(ratio - 1) < 0.01

    def test_envelope_is_rayleigh(self):
        cfg = OfdmConfig()
        rng = np.random.default_rng(6)
        env = []
        for _ in range(400):
            tm = draw_tone_map(cfg, rng)
            env.append(np.abs(modulate(random_symbols(rng, tm.k), tm)))
        env = np.concatenate(env)
        assert env.size >= 100_000
        assert stats.kstest(env, stats.rayleigh(scale=cfg.envelope_sigma).cdf).statistic < 0.01


class TestPapr:
    def test_constant_envelope(self):
        assert abs(papr(np.exp(1j * np.linspace(0, 6, 32)))) < 1e-12

    def test_spike(self):
        x = np.zeros(256)
        x[17] = 256
        assert math.isclose(papr(x), 10 * math.log10(256))

    def test_zero_block(self):
        with pytest.raises(ValueError):
            papr(np.zeros(8))

    def test_typical_band(self):
        rng = np.random.default_rng(7)
        tm = draw_tone_map(OfdmConfig(), rng)
        vals = [papr(modulate(random_symbols(rng, tm.k), tm)) for _ in range(500)]
        assert 7 <= np.median(vals) <= 12
