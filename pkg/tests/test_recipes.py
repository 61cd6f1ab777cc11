import math

import numpy as np
import pytest
import scipy.special

from prefec import (
    ChannelSpec,
    ConfigurationError,
    HistogramSpec,
    LHistogram,
    LValueSet,
    MetricReport,
    OutOfDomainError,
    Trace,
    UnsupportedInputError,
    air_b,
    air_b_hd,
    air_b_ps,
    air_pair,
    air_s,
    asi,
    ber,
    binary_entropy,
    build_lvalue_histogram,
    build_square_qam,
    compute_lvalues,
    erfc_inv,
    gaussian_q,
    hard_decide,
    j_function,
    j_inverse,
    net_rate_ps,
    optimize_sigma_scale,
    preber_ps,
    q_hard,
    q_soft,
    ser,
    shape_maxwell_boltzmann,
    simulate,
)


def make_trace(c, indices, rx):
    return Trace(
        constellation=c,
        tx_indices=np.asarray(indices, dtype=np.int64),
        rx=np.asarray(rx, dtype=np.float64),
    )


class TestHardDecisions:
    def test_three_symbol_fixture(self, qam4):
        # second sample is pushed across the decision boundary
        rx = [[1.1, 0.9], [0.2, -0.3], [-1.0, -1.0]]
        t = make_trace(qam4, [1, 2, 3], rx)
        dec = hard_decide(t)
        assert dec.tolist() == [1, 4, 3]
        assert ser(t, dec) == pytest.approx(1.0 / 3.0)

    def test_tie_goes_to_lowest_index(self, qam4):
        t = make_trace(qam4, [1], [[0.0, 0.0]])
        assert hard_decide(t).tolist() == [1]

    def test_ber_counts_bit_flips(self, qam4):
        # symbol 1 "11" decided as symbol 3 "00": both bits wrong
        t = make_trace(qam4, [1], qam4.points[[2]])
        dec = hard_decide(t)
        assert dec.tolist() == [3]
        assert ber(t, dec) == pytest.approx(1.0)

    def test_ser_upper_bounds_ber(self, qam64):
        t = simulate(qam64, ChannelSpec("awgn", 1.5, 0.0, seed=20), 50_000)
        dec = hard_decide(t)
        p_s, p_b = ser(t, dec), ber(t, dec)
        assert p_b <= p_s <= qam64.m * p_b


class TestBinaryEntropyAndHardAir:
    def test_entropy_quarter(self):
        assert binary_entropy(0.25) == pytest.approx(0.8112781244591328, abs=1e-15)

    def test_entropy_endpoints(self):
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(1.0) == 0.0
        assert binary_entropy(0.5) == pytest.approx(1.0, abs=1e-15)

    def test_hard_air_frozen_value(self):
        assert air_b_hd(0.11, 1) == pytest.approx(0.5000840418354720, abs=1e-12)

    def test_hard_air_endpoints(self):
        assert air_b_hd(0.0, 6) == pytest.approx(6.0, abs=1e-15)
        assert air_b_hd(0.5, 6) == pytest.approx(0.0, abs=1e-15)

    def test_rejects_out_of_range(self):
        with pytest.raises(OutOfDomainError):
            air_b_hd(1.2, 4)


class TestErfcInvAndQHard:
    @pytest.mark.parametrize("y", [1e-6, 1e-3, 0.05, 0.3, 0.7, 1.0, 1.3, 1.9, 1.999])
    def test_against_scipy(self, y):
        assert erfc_inv(y) == pytest.approx(float(scipy.special.erfcinv(y)), abs=1e-9)

    def test_round_trip(self):
        for x in (-2.0, -0.5, 0.0, 0.7, 2.5):
            assert erfc_inv(math.erfc(x)) == pytest.approx(x, abs=1e-9)

    def test_domain(self):
        with pytest.raises(OutOfDomainError):
            erfc_inv(0.0)
        with pytest.raises(OutOfDomainError):
            erfc_inv(2.0)

    def test_q_hard_inverts_gaussian_tail(self):
        # BER of Q(1) corresponds to a Q-factor of exactly 1
        p = 0.5 * math.erfc(1.0 / math.sqrt(2.0))
        assert q_hard(p) == pytest.approx(1.0, abs=1e-9)

    def test_q_hard_sentinels(self):
        with pytest.warns(UserWarning):
            assert q_hard(0.0) == math.inf
        with pytest.warns(UserWarning):
            assert q_hard(1.0) == -math.inf

    def test_q_hard_domain(self):
        with pytest.raises(OutOfDomainError):
            q_hard(-0.01)


class TestSoftAirs:
    def test_single_sample_closed_form(self, qam4):
        # one perfectly centered sample at unit variance: the symbol-wise
        # rate loses exactly log2(1 + e^-4 + ...) relative to full m bits
        t = make_trace(qam4, [1], [[1.0, 1.0]])
        v = air_s(t, gaussian_q(1.0))
        d = np.sum((qam4.points - np.array([1.0, 1.0])) ** 2, axis=1)
        expect = 2.0 - math.log2(float(np.sum(np.exp(-d / 2.0))))
        assert v == pytest.approx(expect, abs=1e-12)

    def test_noiseless_trace_recovers_m(self, qam16):
        idx = np.arange(1, 17, dtype=np.int64)
        t = make_trace(qam16, idx, qam16.points.copy())
        assert air_s(t, gaussian_q(1e-30)) == pytest.approx(4.0, abs=1e-6)
        assert air_b(t, gaussian_q(1e-30)) == pytest.approx(4.0, abs=1e-6)

    def test_symbolwise_not_below_bitwise(self, qam64):
        t = simulate(qam64, ChannelSpec("awgn", 0.6, 0.0, seed=21), 30_000)
        v_s, v_b = air_pair(t, gaussian_q(0.6))
        assert v_b <= v_s + 0.01

    def test_scaling_invariance(self, qam16):
        from prefec import custom_q

        t = simulate(qam16, ChannelSpec("awgn", 0.4, 0.0, seed=22), 5000)
        base = gaussian_q(0.4)
        shifted = custom_q(lambda y, s: base.log_q(y, s) + math.log(3.0), name="x3")
        assert air_s(t, shifted) == pytest.approx(air_s(t, base), abs=1e-9)
        assert air_b(t, shifted) == pytest.approx(air_b(t, base), abs=1e-9)

    def test_shaped_input_rejected(self):
        c = shape_maxwell_boltzmann(build_square_qam(16), 3.0)
        t = simulate(c, ChannelSpec("awgn", 0.4, 0.0, seed=23), 100)
        with pytest.raises(UnsupportedInputError, match="air_b_ps"):
            air_s(t, gaussian_q(0.4))
        with pytest.raises(UnsupportedInputError):
            air_b(t, gaussian_q(0.4))


class TestHistogram:
    def test_centers(self):
        spec = HistogramSpec(bins=4, delta=1.0)
        assert spec.centers.tolist() == [-3.0, -1.0, 1.0, 3.0]

    def test_quantizer_rounds_to_nearest_center(self):
        spec = HistogramSpec(bins=4, delta=1.0)
        lv = LValueSet(
            values=np.array([[-2.9, -0.2, 0.4, 2.2]]),
            asymmetric=np.array([[-2.9, -0.2, 0.4, 2.2]]),
            clamp=50.0,
        )
        h = build_lvalue_histogram(lv, spec)
        assert h.counts.tolist() == [1, 1, 1, 1]

    def test_edges_clip_into_outer_bins(self):
        spec = HistogramSpec(bins=2, delta=1.0)
        lv = LValueSet(
            values=np.array([[-40.0, 40.0, -1.0, 1.0]]),
            asymmetric=np.array([[-40.0, 40.0, -1.0, 1.0]]),
            clamp=50.0,
        )
        h = build_lvalue_histogram(lv, spec)
        assert h.counts.tolist() == [2, 2]

    def test_tie_rounds_to_lower_center(self):
        # 0.0 is exactly between the two centers of a 2-bin histogram
        spec = HistogramSpec(bins=2, delta=1.0)
        lv = LValueSet(
            values=np.array([[0.0]]),
            asymmetric=np.array([[0.0]]),
            clamp=50.0,
        )
        h = build_lvalue_histogram(lv, spec)
        assert h.counts.tolist() == [1, 0]

    def test_mass_conserved_exactly(self, qam16):
        t = simulate(qam16, ChannelSpec("awgn", 0.5, 0.0, seed=24), 3000)
        lv = compute_lvalues(t, gaussian_q(0.5))
        h = build_lvalue_histogram(lv, HistogramSpec(bins=32, delta=1.0))
        assert int(h.counts.sum()) == h.total == 3000 * 4
        assert math.fsum(h.mass.tolist()) == pytest.approx(1.0, abs=1e-12)

    def test_bad_spec_rejected(self):
        with pytest.raises(ConfigurationError):
            HistogramSpec(bins=1, delta=1.0)
        with pytest.raises(ConfigurationError):
            HistogramSpec(bins=8, delta=0.0)


class TestAsi:
    def test_frozen_two_bin_value(self):
        h = LHistogram(
            mass=np.array([0.2, 0.8]),
            counts=np.array([2, 8]),
            total=10,
            spec=HistogramSpec(bins=2, delta=1.0),
        )
        assert asi(h) == pytest.approx(0.27807190511263774, abs=1e-12)

    def test_symmetric_histogram_gives_zero(self):
        h = LHistogram(
            mass=np.array([0.25, 0.25, 0.25, 0.25]),
            counts=np.array([1, 1, 1, 1]),
            total=4,
            spec=HistogramSpec(bins=4, delta=1.0),
        )
        assert asi(h) == 0.0

    def test_all_mass_positive_gives_one(self):
        h = LHistogram(
            mass=np.array([0.0, 0.0, 0.5, 0.5]),
            counts=np.array([0, 0, 5, 5]),
            total=10,
            spec=HistogramSpec(bins=4, delta=1.0),
        )
        assert asi(h) == pytest.approx(1.0, abs=1e-12)

    def test_nonnegative_on_simulated_data(self, qam16):
        for seed in range(4):
            t = simulate(qam16, ChannelSpec("awgn", 2.0, 0.0, seed=seed), 2000)
            lv = compute_lvalues(t, gaussian_q(2.0))
            h = build_lvalue_histogram(lv, HistogramSpec())
            assert asi(h) >= 0.0


class TestShapedMetrics:
    def test_air_b_ps_identity_at_full_entropy(self):
        # uniform input: the shaped-rate form collapses to m * ASI
        assert air_b_ps(4.0, 0.7, 4) == pytest.approx(4 * 0.7, abs=1e-15)

    def test_air_b_ps_formula(self):
        assert air_b_ps(6.3, 0.9, 8) == pytest.approx(6.3 - (1 - 0.9) * 8, abs=1e-15)

    def test_preber_counts_nonpositive_asymmetric(self):
        lv = LValueSet(
            values=np.array([[1.0, -2.0], [3.0, 4.0]]),
            asymmetric=np.array([[1.0, -2.0], [0.0, 4.0]]),
            clamp=50.0,
        )
        assert preber_ps(lv) == pytest.approx(0.5)

    def test_net_rate(self):
        assert net_rate_ps(2.7, 0.8, 8) == pytest.approx(2.7 - 0.2 * 8, abs=1e-15)
        with pytest.raises(OutOfDomainError):
            net_rate_ps(2.7, 0.0, 8)


class TestJFunction:
    def test_endpoints(self):
        assert j_function(0.0) == 0.0
        assert j_function(40.0) == pytest.approx(1.0, abs=1e-12)

    def test_monotone(self):
        sig = np.linspace(0.0, 10.0, 41)
        vals = [j_function(s) for s in sig]
        assert all(a < b for a, b in zip(vals, vals[1:]) if b < 1.0 - 1e-15)

    @pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0, 5.0])
    def test_round_trip(self, sigma):
        assert j_inverse(j_function(sigma)) == pytest.approx(sigma, abs=1e-6)

    def test_inverse_domain(self):
        with pytest.raises(OutOfDomainError):
            j_inverse(1.0)
        with pytest.raises(OutOfDomainError):
            j_inverse(-0.1)

    def test_q_soft_of_j_at_two(self):
        # rate J(2) corresponds to sigma=2, so the soft Q-factor is 2/2=1
        assert q_soft(j_function(2.0)) == pytest.approx(1.0, abs=1e-6)

    def test_q_soft_monotone(self):
        rates = [0.1, 0.3, 0.5, 0.7, 0.9]
        qs = [q_soft(r) for r in rates]
        assert all(a < b for a, b in zip(qs, qs[1:]))


class TestSigmaScaleSearch:
    def test_matched_variance_needs_no_rescale(self, qam16):
        t = simulate(qam16, ChannelSpec("awgn", 0.5, 0.0, seed=25), 20_000)
        scale, best = optimize_sigma_scale(t, 0.5)
        assert abs(scale - 1.0) < 0.05
        assert best - air_b(t, gaussian_q(0.5)) < 0.005

    def test_mismatched_variance_recovered(self, qam16):
        # metric built with twice the true variance: the search should
        # walk the scale back toward 0.5
        t = simulate(qam16, ChannelSpec("awgn", 0.5, 0.0, seed=26), 20_000)
        scale, best = optimize_sigma_scale(t, 1.0)
        assert 0.4 < scale < 0.7
        assert best >= air_b(t, gaussian_q(1.0)) - 1e-12

    def test_never_worse_than_unscaled(self, qam16):
        t = simulate(qam16, ChannelSpec("awgn", 0.5, 0.0, seed=27), 5000)
        base = 0.8
        scale, best = optimize_sigma_scale(t, base)
        assert best >= air_b(t, gaussian_q(base)) - 1e-12
        assert air_b(t, gaussian_q(scale * base)) == pytest.approx(best, abs=1e-12)

    def test_agrees_with_grid_search(self, qam16):
        t = simulate(qam16, ChannelSpec("awgn", 0.5, 0.0, seed=28), 10_000)
        base = 1.5
        scale, _ = optimize_sigma_scale(t, base)
        grid = np.linspace(0.25, 4.0, 151)
        vals = [air_b(t, gaussian_q(g * base)) for g in grid]
        best = grid[int(np.argmax(vals))]
        assert air_b(t, gaussian_q(scale * base)) >= max(vals) - 1e-4


class TestMetricReport:
    def test_probability_range_enforced(self):
        with pytest.raises(OutOfDomainError):
            MetricReport("ber", 1.5, "probability", {})

    def test_units_whitelist(self):
        with pytest.raises(ConfigurationError):
            MetricReport("ber", 0.5, "furlongs", {})

    def test_config_is_read_only(self):
        r = MetricReport("ber", 0.5, "probability", {"n": "10"})
        with pytest.raises(TypeError):
            r.config["n"] = "20"
