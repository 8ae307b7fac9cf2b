import math

import numpy as np
import pytest

from deepsc_sr import channel as ch
from deepsc_sr.errors import InputError


class TestNoiseVariance:
    @pytest.mark.parametrize("snr,expected", [(0.0, 1.0), (10.0, 0.1), (20.0, 0.01), (-6.0, 10 ** 0.6)])
    def test_values(self, snr, expected):
        assert ch.snr_to_noise_variance(snr) == pytest.approx(expected, rel=1e-12)

    def test_infinite_snr(self):
        assert ch.snr_to_noise_variance(math.inf) == 0.0

    def test_signal_power_scales(self):
        assert ch.snr_to_noise_variance(10.0, 4.0) == pytest.approx(0.4)

    def test_bad_power(self):
        with pytest.raises(InputError):
            ch.snr_to_noise_variance(0.0, 0.0)

    @pytest.mark.parametrize("snr", [0.0, 10.0, 20.0])
    def test_monte_carlo_variance(self, snr):
        x = np.zeros(1_000_000, dtype=complex)
        y = ch.awgn_transmit(x, snr, np.random.default_rng(1))
        target = 10 ** (-snr / 10)
        assert abs(np.mean(np.abs(y) ** 2) / target - 1) < 0.01
        # half the variance on each real component
        assert abs(np.var(y.real) / (target / 2) - 1) < 0.01
        assert abs(np.var(y.imag) / (target / 2) - 1) < 0.01

    def test_ten_db_drop_scales_noise_tenfold(self):
        x = np.zeros(1_000_000, dtype=complex)
        lo = np.mean(np.abs(ch.awgn_transmit(x, 0.0, np.random.default_rng(2))) ** 2)
        hi = np.mean(np.abs(ch.awgn_transmit(x, 10.0, np.random.default_rng(3))) ** 2)
        assert abs(lo / hi / 10 - 1) < 0.01


class TestAwgn:
    def test_noise_off_is_exact(self):
        x = np.exp(1j * np.arange(8))
        y = ch.awgn_transmit(x, math.inf, np.random.default_rng(0))
        assert np.array_equal(y, x) and y is not x

    def test_same_seed_same_output(self):
        x = np.ones(16, dtype=complex)
        a = ch.awgn_transmit(x, 3.0, np.random.default_rng(9))
        b = ch.awgn_transmit(x, 3.0, np.random.default_rng(9))
        assert np.array_equal(a, b)


class TestRayleigh:
    def test_noise_off_equalizes_exactly(self):
        x = np.exp(1j * np.linspace(0, 3, 10))
        y, h = ch.rayleigh_transmit(x, math.inf, np.random.default_rng(4))
        assert np.allclose(y / h, x, atol=1e-12)

    def test_one_gain_per_block(self):
        x = np.ones(5, dtype=complex)
        y, h = ch.rayleigh_transmit(x, math.inf, np.random.default_rng(5))
        assert np.allclose(y, h)

    def test_mean_gain_power(self):
        rng = np.random.default_rng(6)
        power = np.mean([abs(ch.draw_fading(rng)) ** 2 for _ in range(100_000)])
        assert abs(power - 1) < 0.02

    def test_deep_fade_redrawn(self):
        class Scripted:
            def __init__(self):
                self.values = iter([1e-9, 1e-9, 0.5, 0.5])

            def standard_normal(self):
                return next(self.values)

        h = ch.draw_fading(Scripted())
        assert h == pytest.approx(complex(0.5, 0.5) / math.sqrt(2))

    def test_matches_awgn_when_noise_off(self):
        x = np.exp(2j * np.arange(6))
        a, _ = ch.transmit(x, "awgn", math.inf, np.random.default_rng(0))
        r, _ = ch.transmit(x, "rayleigh", math.inf, np.random.default_rng(0))
        assert np.abs(a - r).max() <= 1e-9


class TestEqualize:
    def test_identity(self):
        y = np.array([1 + 2j, 3 - 1j])
        assert np.array_equal(ch.equalize(y, 1.0), y)

    def test_imaginary_gain(self):
        x = np.array([1 + 1j, -2 + 0.5j])
        assert np.allclose(ch.equalize(2j * x, 2j), x)

    def test_floor(self):
        with pytest.raises(InputError):
            ch.equalize(np.ones(2), 1e-9)


class TestSpec:
    def test_unknown_kind(self):
        with pytest.raises(InputError):
            ch.ChannelSpec("rician", 3.0)

    @pytest.mark.parametrize("snr", [float("nan"), -math.inf])
    def test_bad_snr(self, snr):
        with pytest.raises(InputError):
            ch.ChannelSpec("awgn", snr)

    def test_inf_allowed(self):
        assert ch.ChannelSpec("rayleigh", math.inf).snr_db == math.inf
