"""Invariants that must hold across operating points, not just at examples."""

import numpy as np
import pytest

from prefec import (
    ChannelSpec,
    HistogramSpec,
    air_b_hd,
    air_b_ps,
    air_pair,
    asi,
    ber,
    build_lvalue_histogram,
    build_square_qam,
    compute_lvalues,
    estimate_sigma2,
    gaussian_q,
    hard_decide,
    scale_snr,
    ser,
    shape_maxwell_boltzmann,
    simulate,
)

SNRS = [2.0, 8.0, 14.0, 20.0]


def uniform_pipeline(c, snr_db, n=8000, seed=0):
    sz2 = scale_snr(c, snr_db)
    t = simulate(c, ChannelSpec("awgn", sz2, 0.0, seed=seed), n)
    dec = hard_decide(t)
    metric = gaussian_q(sz2)
    v_s, v_b = air_pair(t, metric)
    lv = compute_lvalues(t, metric)
    a = asi(build_lvalue_histogram(lv, HistogramSpec()))
    return {
        "ser": ser(t, dec),
        "ber": ber(t, dec),
        "air_s": v_s,
        "air_b": v_b,
        "asi": a,
        "m": c.m,
    }


@pytest.fixture(scope="module", params=[4, 16, 64])
def sweep_results(request):
    c = build_square_qam(request.param)
    return [uniform_pipeline(c, snr) for snr in SNRS]


class TestUniformInvariants:
    def test_rates_within_bounds(self, sweep_results):
        for r in sweep_results:
            assert 0.0 <= r["ber"] <= r["ser"] <= 1.0
            assert r["ser"] <= r["m"] * r["ber"] + 1e-12
            assert 0.0 <= r["air_b"] <= r["m"] + 1e-9
            assert r["air_s"] <= r["m"] + 1e-9
            assert 0.0 <= r["asi"] <= 1.0

    def test_bitwise_not_above_symbolwise(self, sweep_results):
        for r in sweep_results:
            assert r["air_b"] <= r["air_s"] + 0.01

    def test_hard_air_not_above_soft(self, sweep_results):
        # with zero sampled bit errors the hard-decision estimate pins to
        # m exactly while the soft estimate keeps a finite-sample residue
        # just below it, so the saturated case needs more room
        for r in sweep_results:
            slack = 1e-9 if r["ber"] > 0 else 1e-4
            assert air_b_hd(r["ber"], r["m"]) <= r["air_b"] + slack

    def test_asi_consistent_with_bitwise_rate(self, sweep_results):
        # both estimate the same binary-code rate, one from L-value
        # histograms and one from the metric directly; the default
        # 32-bin unit-width histogram quantizes away part of the soft
        # information at low SNR where most L-values fall in few bins
        for r, snr in zip(sweep_results, SNRS):
            gap = abs(r["asi"] - r["air_b"] / r["m"])
            assert gap <= 0.05
            if snr >= 14.0:
                assert gap <= 0.02

    def test_airs_monotone_in_snr(self, sweep_results):
        airs = [r["air_b"] for r in sweep_results]
        assert all(a < b for a, b in zip(airs, airs[1:]))

    def test_error_rates_decrease_with_snr(self, sweep_results):
        sers = [r["ser"] for r in sweep_results]
        assert all(a >= b for a, b in zip(sers, sers[1:]))


class TestShapedInvariants:
    @pytest.mark.parametrize("h_target", [7.0, 6.3])
    @pytest.mark.parametrize("snr_db", [14.0, 20.0])
    def test_shaped_rate_within_entropy(self, h_target, snr_db):
        c = shape_maxwell_boltzmann(build_square_qam(256), h_target)
        sz2 = scale_snr(c, snr_db)
        t = simulate(c, ChannelSpec("awgn", sz2, 0.0, seed=1), 8000)
        lv = compute_lvalues(t, gaussian_q(estimate_sigma2(t)))
        a = asi(build_lvalue_histogram(lv, HistogramSpec()))
        rate = air_b_ps(c.entropy_bits, a, c.m)
        assert rate <= c.entropy_bits + 1e-9
        assert rate >= c.entropy_bits - c.m

    def test_shaping_gain_visible_at_fixed_snr(self):
        # at moderate SNR the shaped 256-point input achieves a higher
        # fraction of its entropy than the uniform one
        snr_db = 16.0
        c_u = build_square_qam(256)
        c_s = shape_maxwell_boltzmann(c_u, 6.3)
        out = {}
        for tag, c in (("u", c_u), ("s", c_s)):
            sz2 = scale_snr(c, snr_db)
            t = simulate(c, ChannelSpec("awgn", sz2, 0.0, seed=2), 20000)
            lv = compute_lvalues(t, gaussian_q(sz2))
            a = asi(build_lvalue_histogram(lv, HistogramSpec()))
            out[tag] = air_b_ps(c.entropy_bits, a, c.m) / c.entropy_bits
        assert out["s"] > out["u"]


class TestSeedStability:
    def test_metrics_agree_across_seeds_at_high_n(self):
        c = build_square_qam(16)
        sz2 = scale_snr(c, 10.0)
        vals = []
        for seed in (10, 11):
            t = simulate(c, ChannelSpec("awgn", sz2, 0.0, seed=seed), 100_000)
            vals.append(air_pair(t, gaussian_q(sz2))[1])
        assert abs(vals[0] - vals[1]) < 0.02
