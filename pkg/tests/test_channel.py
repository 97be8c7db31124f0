import json
import math

import numpy as np
import numpy.testing as npt
import pytest
from scipy import stats

from thuwb.channel import (
    ChannelRealization,
    FadingModel,
    SyncMode,
    decompose_delay,
    fixed_channel,
    gen_delays,
    gen_lognormal_channel,
)
from thuwb.model import SystemParams


class TestFixedChannel:
    def test_reference_profile(self):
        ch = fixed_channel()
        assert ch.n_taps == 10
        assert ch.delay == 0.0
        assert float(ch.taps @ ch.taps) == pytest.approx(1.0, abs=5e-4)
        assert ch.taps[3] == -0.4536  # sign preserved

    def test_taps_are_frozen(self):
        ch = fixed_channel()
        with pytest.raises(ValueError):
            ch.taps[0] = 9.9

    def test_validation(self):
        with pytest.raises(ValueError):
            ChannelRealization(np.array([]))
        with pytest.raises(ValueError):
            ChannelRealization(np.array([1.0, np.inf]))
        with pytest.raises(ValueError):
            ChannelRealization(np.array([1.0]), delay=-0.5)

    def test_json_round_trip(self):
        ch = ChannelRealization(np.array([0.3, -0.2]), delay=1.25)
        text = json.dumps(ch.to_dict())
        back = ChannelRealization.from_dict(json.loads(text))
        npt.assert_array_equal(back.taps, ch.taps)
        assert back.delay == ch.delay


class TestFadingModel:
    def test_leading_tap_energy_value(self):
        model = FadingModel(n_taps=20, decay=0.25, log_variance=1.0)
        direct = (1 - math.exp(-0.25)) / (1 - math.exp(-0.25 * 20))
        assert model.leading_tap_energy == pytest.approx(direct, abs=1e-15)
        assert model.leading_tap_energy == pytest.approx(0.22270, abs=1e-5)

    def test_profile_sums_to_one(self):
        model = FadingModel(n_taps=20, decay=0.25, log_variance=1.0)
        assert model.tap_energy_profile().sum() == pytest.approx(1.0, abs=1e-12)

    def test_first_log_mean_value(self):
        model = FadingModel(n_taps=20, decay=0.25, log_variance=1.0)
        direct = 0.5 * (math.log((1 - math.exp(-0.25)) / (1 - math.exp(-5.0))) - 2.0)
        assert model.log_means()[0] == pytest.approx(direct, abs=1e-12)
        assert model.log_means()[0] == pytest.approx(-1.7509654, abs=1e-6)

    def test_log_means_give_profile(self):
        # mean tap energy of a lognormal magnitude is exp(2 mu + 2 s2)
        model = FadingModel(n_taps=12, decay=0.4, log_variance=0.7)
        implied = np.exp(2 * model.log_means() + 2 * model.log_variance)
        npt.assert_allclose(implied, model.tap_energy_profile(), rtol=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            FadingModel(0, 0.25, 1.0)
        with pytest.raises(ValueError):
            FadingModel(5, -0.1, 1.0)
        with pytest.raises(ValueError):
            FadingModel(5, 0.25, 0.0)


@pytest.fixture(scope="module")
def draws():
    model = FadingModel(n_taps=20, decay=0.25, log_variance=1.0)
    rng = np.random.default_rng(2024)
    taps = np.array([gen_lognormal_channel(model, rng).taps for _ in range(100_000)])
    return model, taps


class TestLognormalDraws:
    def test_mean_total_energy(self, draws):
        _, taps = draws
        total = (taps**2).sum(axis=1)
        assert 0.98 <= total.mean() <= 1.02

    def test_per_tap_energy_profile(self, draws):
        model, taps = draws
        profile = model.tap_energy_profile()
        second_moment = (taps**2).mean(axis=0)
        for l in range(10):
            assert second_moment[l] == pytest.approx(profile[l], rel=0.05)

    def test_sign_symmetry(self, draws):
        _, taps = draws
        n = taps.shape[0]
        bound = 3.0 * taps.std(axis=0) / math.sqrt(n)
        assert np.all(np.abs(taps.mean(axis=0)) <= bound)


class TestDelays:
    def params(self, n_users=4):
        return SystemParams(
            n_users=n_users, n_frames=15, n_chips_per_frame=5, bit_energy=1.0, noise_psd=0.0
        )

    def test_symbol_sync_all_zero(self):
        npt.assert_array_equal(gen_delays(self.params(), SyncMode.SYMBOL_SYNC, 1), 0.0)

    def test_chip_sync_whole_chips(self):
        delays = gen_delays(self.params(1001), SyncMode.CHIP_SYNC, 2)
        assert delays[0] == 0.0
        npt.assert_array_equal(delays % 1.0, 0.0)
        assert delays.max() <= 74
        assert delays.min() >= 0

    def test_async_uniform_mean(self):
        p = SystemParams(
            n_users=1_000_001, n_frames=15, n_chips_per_frame=5, bit_energy=1.0, noise_psd=0.0
        )
        delays = gen_delays(p, SyncMode.ASYNC, 3)[1:]
        span = 75.0
        assert abs(delays.mean() - span / 2) <= 0.005 * span
        assert delays.min() >= 0.0 and delays.max() < span

    def test_user_one_always_zero(self):
        for mode in SyncMode:
            assert gen_delays(self.params(), mode, 4)[0] == 0.0


class TestDecomposeDelay:
    def test_zero(self):
        assert decompose_delay(0.0) == (0, 0.0)

    def test_whole_plus_fraction(self):
        offset, jitter = decompose_delay(7.25)
        assert offset == 7
        assert jitter == pytest.approx(0.25, abs=1e-15)

    def test_reconstruction(self):
        rng = np.random.default_rng(8)
        for delay in rng.uniform(0, 200, size=2000):
            offset, jitter = decompose_delay(float(delay))
            assert 0.0 <= jitter < 1.0
            assert offset * 1.0 + jitter == pytest.approx(delay, abs=1e-12)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            decompose_delay(-0.1)

    def test_uniform_delay_splits_independently(self):
        # uniform on [0, N): whole-chip part uniform on {0..N-1}, jitter
        # uniform on [0, 1), and the two independent
        n_span = 75
        rng = np.random.default_rng(99)
        delays = rng.uniform(0, n_span, size=1_000_000)
        offsets = np.floor(delays).astype(int)
        jitters = delays - offsets
        k_bins = 8
        table = np.zeros((n_span, k_bins))
        jitter_bin = np.minimum((jitters * k_bins).astype(int), k_bins - 1)
        np.add.at(table, (offsets, jitter_bin), 1)
        chi2, p_value, _, _ = stats.chi2_contingency(table)[0:4]
        assert p_value > 1e-3
        assert stats.chisquare(table.sum(axis=1)).pvalue > 1e-3
        assert stats.chisquare(table.sum(axis=0)).pvalue > 1e-3
