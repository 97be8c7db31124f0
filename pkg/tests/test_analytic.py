import math

import mpmath
import numpy as np
import numpy.testing as npt
import pytest
from scipy import integrate

from thuwb.analytic import (
    BepMode,
    BepQuery,
    VarianceBreakdown,
    average_bep,
    bep,
    bep_async_exact,
    ifi_variance_adjacent,
    ifi_variance_components,
    mai_variance_async,
    mai_variance_jitter,
    mai_variance_sync,
    q_function,
    variance_breakdown,
)
from thuwb.channel import ChannelRealization, fixed_channel
from thuwb.model import PulseShape, SystemParams, gamma_factor
from thuwb.rake import select_weights

from _oracles import enumerate_ifi_variance, enumerate_mai_variance

DOUBLET = PulseShape.gaussian_doublet()
RECT = PulseShape.rectangular()
UNIT = ChannelRealization(np.ones(1))


def make_params(n_users, noise, e1=0.5, e_int=1.0, n_frames=15, n_chips=5):
    energies = (e1,) + (e_int,) * (n_users - 1)
    return SystemParams(
        n_users=n_users,
        n_frames=n_frames,
        n_chips_per_frame=n_chips,
        bit_energy=energies,
        noise_psd=noise,
    )


def awgn_query(mode, params, pulse=DOUBLET, **kwargs):
    return BepQuery(params=params, mode=mode, pulse=pulse, **kwargs)


def unit_channel_query(mode, params, pulse=DOUBLET, **kwargs):
    channels = tuple([UNIT] * params.n_users)
    weights = select_weights(UNIT, "arake")
    return BepQuery(
        params=params, mode=mode, channels=channels, weights=weights, pulse=pulse, **kwargs
    )


class TestQFunction:
    def test_half_at_zero(self):
        assert q_function(0.0) == 0.5

    def test_reflection(self):
        x = np.random.default_rng(1).normal(size=200) * 3
        npt.assert_allclose(q_function(-x), 1.0 - q_function(x), atol=1e-15)

    def test_five_percent_point(self):
        assert q_function(1.6449) == pytest.approx(0.05, abs=1e-4)
        density_tail, _ = integrate.quad(
            lambda t: math.exp(-t * t / 2) / math.sqrt(2 * math.pi), 1.6449, 12.0
        )
        assert q_function(1.6449) == pytest.approx(density_tail, abs=1e-12)

    def test_high_precision_reference(self):
        mpmath.mp.dps = 40
        for x in np.linspace(-8.0, 8.0, 33):
            reference = float(0.5 * mpmath.erfc(x / mpmath.sqrt(2)))
            value = q_function(float(x))
            assert abs(value - reference) <= 1e-12 * abs(reference)


class TestIfiVariance:
    def test_no_multipath_means_no_ifi(self):
        assert ifi_variance_components(np.ones(1), np.ones(1), 5) == (0.0, 0.0)

    def test_single_finger_reduction(self):
        rng = np.random.default_rng(4)
        alpha = rng.normal(size=5)
        beta = np.zeros(5)
        beta[0] = 1.0
        near, far = ifi_variance_components(alpha, beta, 8)
        expected = sum(l * alpha[l] ** 2 for l in range(1, 5))
        assert near == pytest.approx(expected, abs=1e-12)
        assert far == 0.0
        assert ifi_variance_adjacent(alpha, beta) == pytest.approx(expected, abs=1e-12)

    def test_enumeration_oracle_long_spread(self):
        ch = fixed_channel()
        beta = select_weights(ch, "arake").beta
        near, far = ifi_variance_components(ch.taps, beta, 5)
        assembled = near / 25 + far / 5
        oracle = enumerate_ifi_variance(ch.taps, beta, 5, DOUBLET)
        assert assembled == pytest.approx(oracle, abs=1e-9)

    def test_enumeration_oracle_random(self):
        rng = np.random.default_rng(12)
        for n_chips in (3, 5, 8):
            alpha = rng.normal(size=6)
            beta = rng.normal(size=6)
            near, far = ifi_variance_components(alpha, beta, n_chips)
            assembled = near / n_chips**2 + far / n_chips
            oracle = enumerate_ifi_variance(alpha, beta, n_chips, DOUBLET)
            assert assembled == pytest.approx(oracle, abs=1e-9)

    def test_adjacent_form_matches_components_through_boundary(self):
        # the uncapped adjacent-frame form and the two capped components agree
        # (after scaling) whenever the spread is at most one frame plus a chip
        rng = np.random.default_rng(13)
        for n_chips in (5, 6):
            alpha = rng.normal(size=6)
            beta = rng.normal(size=6)
            near, far = ifi_variance_components(alpha, beta, n_chips)
            assembled = near / n_chips**2 + far / n_chips
            adjacent = ifi_variance_adjacent(alpha, beta) / n_chips**2
            assert assembled == pytest.approx(adjacent, abs=1e-12)


class TestMaiVariance:
    def test_single_finger_collects_all_taps(self):
        rng = np.random.default_rng(7)
        alpha = rng.normal(size=8)
        beta = np.zeros(8)
        beta[0] = 1.0
        assert mai_variance_sync(alpha, beta) == pytest.approx(float(alpha @ alpha), abs=1e-12)

    def test_single_path_single_finger(self):
        assert mai_variance_sync(np.ones(1), np.ones(1)) == 1.0

    def test_enumeration_oracle(self):
        rng = np.random.default_rng(21)
        alpha = rng.normal(size=6)
        beta = rng.normal(size=6)
        value = mai_variance_sync(alpha, beta)
        for chip_offset in (0, 3, 17):
            oracle = enumerate_mai_variance(alpha, beta, 5, DOUBLET, chip_offset=chip_offset)
            assert value == pytest.approx(oracle, abs=1e-9)

    def test_zero_jitter_reduces_to_sync(self):
        rng = np.random.default_rng(22)
        for _ in range(10):
            n = int(rng.integers(1, 12))
            alpha = rng.normal(size=n)
            beta = rng.normal(size=n)
            jitter0 = float(mai_variance_jitter(alpha, beta, 0.0, DOUBLET))
            assert jitter0 == pytest.approx(mai_variance_sync(alpha, beta), abs=1e-12)

    def test_jitter_enumeration_oracle(self):
        rng = np.random.default_rng(23)
        alpha = rng.normal(size=5)
        beta = rng.normal(size=5)
        for jitter in (0.2, 0.65):
            value = float(mai_variance_jitter(alpha, beta, jitter, DOUBLET))
            oracle = enumerate_mai_variance(alpha, beta, 4, DOUBLET, chip_offset=6, jitter=jitter)
            assert value == pytest.approx(oracle, abs=1e-9)

    def test_jitter_variance_is_cross_correlation_energy(self):
        # the conditional variance is the squared cross-correlation summed
        # over every chip offset with support
        from thuwb.rake import cross_correlation

        rng = np.random.default_rng(26)
        for _ in range(10):
            n = int(rng.integers(1, 11))
            alpha = rng.normal(size=n)
            beta = rng.normal(size=n)
            jitter = float(rng.uniform(0.0, 1.0))
            value = float(mai_variance_jitter(alpha, beta, jitter, DOUBLET))
            by_phi = sum(
                cross_correlation(alpha, beta, j, jitter, DOUBLET) ** 2 for j in range(-n, n)
            )
            assert value == pytest.approx(by_phi, abs=1e-9)

    def test_single_path_rectangular_half_chip(self):
        value = float(mai_variance_jitter(np.ones(1), np.ones(1), 0.5, RECT))
        assert value == pytest.approx(0.5, abs=1e-12)

    def test_jitter_domain(self):
        with pytest.raises(ValueError):
            mai_variance_jitter(np.ones(2), np.ones(2), 1.0, RECT)

    def test_async_single_path_equals_gamma(self):
        for pulse in (DOUBLET, RECT):
            value = mai_variance_async(np.ones(1), np.ones(1), pulse)
            assert value == pytest.approx(gamma_factor(pulse), abs=1e-6)
        assert mai_variance_async(np.ones(1), np.ones(1), RECT) == pytest.approx(
            2.0 / 3.0, abs=1e-6
        )

    def test_async_is_between_jitter_extremes(self):
        rng = np.random.default_rng(24)
        grid = np.linspace(0.0, 1.0, 1000, endpoint=False)
        for pulse in (DOUBLET, RECT):
            alpha = rng.normal(size=7)
            beta = rng.normal(size=7)
            values = mai_variance_jitter(alpha, beta, grid, pulse)
            mean = mai_variance_async(alpha, beta, pulse)
            assert values.min() <= mean <= values.max()

    def test_quadrature_converged(self):
        rng = np.random.default_rng(25)
        alpha = rng.normal(size=9)
        beta = rng.normal(size=9)
        for pulse in (DOUBLET, RECT):
            coarse = mai_variance_async(alpha, beta, pulse, nodes=32)
            fine = mai_variance_async(alpha, beta, pulse, nodes=64)
            assert abs(coarse - fine) <= 1e-9


class TestBepAwgn:
    def test_sync_anchor(self):
        # E1=0.5, nine unit-energy interferers, N=75, noise 0.12
        params = make_params(10, 0.12)
        value = bep(awgn_query(BepMode.AWGN_SYNC, params))
        assert value == pytest.approx(0.0745, abs=1e-4)

    def test_zero_snr_limit(self):
        queries = []
        params = make_params(10, 1e9)
        for mode in (BepMode.AWGN_SYNC, BepMode.AWGN_ASYNC, BepMode.AWGN_NO_POLARITY_SYNC):
            queries.append(awgn_query(mode, params))
        queries.append(unit_channel_query(BepMode.SYNC, params))
        queries.append(unit_channel_query(BepMode.ASYNC_SGA, params))
        queries.append(unit_channel_query(BepMode.ASYNC_EXACT, params))
        for query in queries:
            value = bep(query)
            assert 0.4999 < value < 0.5

    def test_no_polarity_is_worse(self):
        params = make_params(10, 0.05)
        with_polarity = bep(awgn_query(BepMode.AWGN_SYNC, params))
        without = bep(awgn_query(BepMode.AWGN_NO_POLARITY_SYNC, params))
        assert without >= with_polarity

    def test_processing_gain_split_invariance(self):
        for n_frames, n_chips in ((75, 1), (15, 5), (5, 15)):
            params = SystemParams(
                n_users=10,
                n_frames=n_frames,
                n_chips_per_frame=n_chips,
                bit_energy=(0.5,) + (1.0,) * 9,
                noise_psd=0.08,
            )
            sync = bep(awgn_query(BepMode.AWGN_SYNC, params))
            asyn = bep(awgn_query(BepMode.AWGN_ASYNC, params))
            if n_frames == 75:
                sync_ref, async_ref = sync, asyn
            else:
                assert abs(sync - sync_ref) <= 1e-12
                assert abs(asyn - async_ref) <= 1e-12

    def test_unequal_interferer_energies_rejected(self):
        params = SystemParams(
            n_users=3, n_frames=15, n_chips_per_frame=5, bit_energy=(0.5, 1.0, 2.0), noise_psd=0.1
        )
        for mode in (
            BepMode.AWGN_SYNC,
            BepMode.AWGN_ASYNC,
            BepMode.AWGN_NO_POLARITY_SYNC,
        ):
            with pytest.raises(ValueError):
                awgn_query(mode, params)
        with pytest.raises(ValueError):
            unit_channel_query(BepMode.ASYNC_SGA, params)


class TestBepMultipath:
    def fig_params(self, noise):
        return make_params(10, noise)

    def multipath_query(self, mode, noise, scheme="arake", fingers=None, pulse=DOUBLET, **kwargs):
        ch = fixed_channel()
        params = self.fig_params(noise)
        return BepQuery(
            params=params,
            mode=mode,
            channels=tuple([ch] * 10),
            weights=select_weights(ch, scheme, fingers),
            pulse=pulse,
            **kwargs,
        )

    def test_conditional_at_zero_matches_sync(self):
        sync = bep(self.multipath_query(BepMode.SYNC, 0.05))
        conditional = bep(
            self.multipath_query(BepMode.ASYNC_CONDITIONAL, 0.05, jitters=(0.0,) * 9)
        )
        assert conditional == pytest.approx(sync, abs=1e-12)

    def test_single_path_matches_awgn(self):
        params = make_params(10, 0.07)
        sync = bep(unit_channel_query(BepMode.SYNC, params))
        awgn = bep(awgn_query(BepMode.AWGN_SYNC, params))
        assert sync == pytest.approx(awgn, abs=1e-12)

    def test_monotone_in_energy_and_noise(self):
        noise_grid = (0.01, 0.05, 0.2, 1.0)
        modes = (
            lambda n: bep(self.multipath_query(BepMode.SYNC, n)),
            lambda n: bep(self.multipath_query(BepMode.ASYNC_SGA, n)),
            lambda n: bep(awgn_query(BepMode.AWGN_SYNC, self.fig_params(n))),
            lambda n: bep(awgn_query(BepMode.AWGN_ASYNC, self.fig_params(n))),
            lambda n: bep(awgn_query(BepMode.AWGN_NO_POLARITY_SYNC, self.fig_params(n))),
        )
        for evaluate in modes:
            values = [evaluate(n) for n in noise_grid]
            assert all(a < b for a, b in zip(values, values[1:]))
        e_grid = (0.2, 0.4, 0.8, 1.6)
        ch = fixed_channel()
        for mode in (BepMode.SYNC, BepMode.ASYNC_SGA):
            values = []
            for e1 in e_grid:
                params = make_params(10, 0.1, e1=e1)
                query = BepQuery(
                    params=params,
                    mode=mode,
                    channels=tuple([ch] * 10),
                    weights=select_weights(ch, "arake"),
                    pulse=DOUBLET,
                )
                values.append(bep(query))
            assert all(a > b for a, b in zip(values, values[1:]))

    def test_interference_worsens_single_chip_frames(self):
        # with the total gain fixed, putting every pulse in its own frame
        # maximizes the self-interference penalty
        ch = fixed_channel()
        weights = select_weights(ch, "arake")
        configs = ((75, 1), (1, 75))
        values = []
        for n_frames, n_chips in configs:
            params = SystemParams(
                n_users=2,
                n_frames=n_frames,
                n_chips_per_frame=n_chips,
                bit_energy=(0.5, 1.0),
                noise_psd=0.02,
            )
            query = BepQuery(
                params=params,
                mode=BepMode.SYNC,
                channels=(ch, ch),
                weights=weights,
                pulse=DOUBLET,
            )
            values.append(bep(query))
        assert values[0] >= values[1]

    def test_breakdown_components_nonnegative(self):
        query = self.multipath_query(BepMode.SYNC, 0.1)
        vb = variance_breakdown(query)
        assert vb.ifi1 >= 0 and vb.ifi2 >= 0 and vb.noise >= 0
        assert len(vb.mai_per_user) == 9
        assert all(v >= 0 for v in vb.mai_per_user)
        with pytest.raises(ValueError):
            VarianceBreakdown(-1.0, 0.0, (), 0.0)
        with pytest.raises(ValueError):
            variance_breakdown(awgn_query(BepMode.AWGN_SYNC, make_params(10, 0.1)))

    def test_jitter_vector_validation(self):
        with pytest.raises(ValueError):
            self.multipath_query(BepMode.ASYNC_CONDITIONAL, 0.1, jitters=(0.0,) * 4)
        with pytest.raises(ValueError):
            self.multipath_query(BepMode.ASYNC_CONDITIONAL, 0.1, jitters=(1.5,) * 9)


class TestBepAsyncExact:
    def test_two_users_matches_adaptive_quadrature(self):
        ch = fixed_channel()
        params = make_params(2, 0.05)
        weights = select_weights(ch, "arake")
        query = BepQuery(
            params=params,
            mode=BepMode.ASYNC_EXACT,
            channels=(ch, ch),
            weights=weights,
            pulse=DOUBLET,
        )
        value, err = bep_async_exact(query)
        assert err == 0.0

        def conditional(eps):
            q = BepQuery(
                params=params,
                mode=BepMode.ASYNC_CONDITIONAL,
                channels=(ch, ch),
                weights=weights,
                pulse=DOUBLET,
                jitters=(float(eps),),
            )
            return bep(q)

        reference, _ = integrate.quad(conditional, 0.0, 1.0, limit=200)
        assert value == pytest.approx(reference, abs=1e-8)

    def test_monte_carlo_path_agrees_with_tensor(self):
        ch = fixed_channel()
        params = make_params(4, 0.05, e1=0.5)
        weights = select_weights(ch, "arake")
        base = dict(
            params=params,
            mode=BepMode.ASYNC_EXACT,
            channels=tuple([ch] * 4),
            weights=weights,
            pulse=DOUBLET,
        )
        tensor, err_tensor = bep_async_exact(BepQuery(**base))
        assert err_tensor == 0.0
        mc, err_mc = bep_async_exact(BepQuery(**base, exact_quad_max_users=3, seed=2))
        assert err_mc > 0.0
        assert abs(mc - tensor) <= 4.0 * err_mc


class TestAverageBep:
    def test_single_realization(self):
        params = make_params(10, 0.1)
        query = awgn_query(BepMode.AWGN_SYNC, params)
        mean, sem = average_bep([query])
        assert mean == bep(query)
        assert sem == 0.0

    def test_identical_realizations_have_zero_spread(self):
        params = make_params(10, 0.1)
        query = awgn_query(BepMode.AWGN_SYNC, params)
        mean, sem = average_bep([query, query])
        assert mean == bep(query)
        assert sem == 0.0

    def test_fading_average_monotone_in_snr(self):
        from thuwb.channel import FadingModel, gen_lognormal_channel
        from thuwb.model import substream

        fading = FadingModel(n_taps=20, decay=0.25, log_variance=1.0)
        realizations = []
        for r in range(300):
            rng = substream(90, r)
            realizations.append(tuple(gen_lognormal_channel(fading, rng) for _ in range(10)))
        means = []
        for ebno_db in (6.0, 10.0, 14.0, 18.0):
            noise = 1.0 * 10.0 ** (-ebno_db / 10.0) / 2.0
            params = make_params(10, noise, e1=1.0)
            queries = [
                BepQuery(
                    params=params,
                    mode=BepMode.ASYNC_SGA,
                    channels=chans,
                    weights=select_weights(chans[0], "arake"),
                    pulse=DOUBLET,
                )
                for chans in realizations
            ]
            means.append(average_bep(queries)[0])
        assert all(a > b for a, b in zip(means, means[1:]))
