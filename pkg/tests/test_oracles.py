"""Brute-force oracle sanity: the reference computations themselves
must be right before they are trusted to judge any closed form, so
each one is pinned here on cases with hand-checkable answers.
"""

import math

import numpy as np
import pytest

from conftest import REF_POWER, REF_SNR, synth_pair
from nfcap.broadcast import BcConfig
from nfcap.geometry import nf_channel_vector
from nfcap.mac import MacConfig, mac_capacity_general
from nfcap.oracles import (
    OracleReport,
    bc_power_grid_oracle,
    bc_simplex_grid_oracle,
    ccf_sum_oracle,
    gain_sum_oracle,
    logdet_capacity_oracle,
    mc_beam_grid_oracle,
    sic_rates_oracle,
)
from nfcap.stats import ccf_exact, ff_ccf_closed, ff_gain_closed, gain_exact


def test_report_compare_and_within():
    rep = OracleReport.compare("gain", 1.0, 1.001)
    assert rep.abs_diff == pytest.approx(0.001, rel=1e-9)
    assert rep.rel_diff == pytest.approx(0.001 / 1.001, rel=1e-9)
    assert rep.within(0.01)
    assert not rep.within(1e-4)
    assert rep.within(0.01, relative=True)
    zero = OracleReport.compare("null", 0.0, 0.0)
    assert zero.rel_diff == 0.0


def test_report_rejects_inconsistent_fields():
    with pytest.raises(ValueError):
        OracleReport("gain", 1.0, 2.0, abs_diff=0.5, rel_diff=0.25)
    with pytest.raises(ValueError):
        OracleReport("gain", 1.0, 1.0, abs_diff=0.0, rel_diff=-0.1)


def test_logdet_edge_cases():
    assert logdet_capacity_oracle([], []) == 0.0
    h = np.array([0.5 + 0.5j, -0.25 + 0j, 0.1j])
    g = float(np.vdot(h, h).real)
    single = logdet_capacity_oracle([h], [40.0])
    assert single == pytest.approx(math.log2(1 + 40.0 * g), rel=1e-12)
    with pytest.raises(ValueError):
        logdet_capacity_oracle([h], [40.0, 1.0])
    with pytest.raises(ValueError):
        logdet_capacity_oracle([h], [-1.0])
    with pytest.raises(ValueError):
        logdet_capacity_oracle([np.ones(10_001, dtype=complex)], [1.0])


def test_logdet_dense_agrees_with_gram_at_reference_size(
    ref_geometry, user1, user2_dd
):
    h1 = nf_channel_vector(ref_geometry, user1)
    h2 = nf_channel_vector(ref_geometry, user2_dd)
    dense = logdet_capacity_oracle([h1, h2], [REF_SNR, REF_SNR])
    gram = mac_capacity_general([h1, h2], MacConfig((REF_SNR, REF_SNR)))
    assert dense == pytest.approx(gram, abs=1e-9)


def test_sic_oracle_rates_sum_to_capacity(rng):
    h1, h2 = synth_pair(0.4, 0.9, 0.35, m=5)
    snrs = [25.0, 60.0]
    cap = logdet_capacity_oracle([h1, h2], snrs)
    for order in ((0, 1), (1, 0)):
        rates = sic_rates_oracle([h1, h2], snrs, order)
        assert sum(rates) == pytest.approx(cap, abs=1e-12)
        clean_user = order[-1]
        h_clean = (h1, h2)[clean_user]
        g_clean = float(np.vdot(h_clean, h_clean).real)
        assert rates[clean_user] == pytest.approx(
            math.log2(1 + snrs[clean_user] * g_clean), rel=1e-12
        )
    with pytest.raises(ValueError):
        sic_rates_oracle([h1, h2], snrs, (0, 0))


def test_bc_grid_symmetric_split():
    cfg = BcConfig(total_power_P=10.0, noise_var_per_user=(1.0, 1.0))
    best, alloc = bc_power_grid_oracle(0.3, 0.3, 0.2, cfg, points=5001)
    assert alloc.p_per_user[0] == pytest.approx(5.0, abs=10.0 / 5000)
    assert best <= math.log2(
        1 + 5.0 * 0.3 + 5.0 * 0.3 + 25.0 * 0.09 * 0.8
    ) + 1e-12


def test_bc_grid_dead_user_takes_nothing():
    cfg = BcConfig(total_power_P=10.0, noise_var_per_user=(1.0, 1.0))
    best, alloc = bc_power_grid_oracle(0.3, 0.0, 0.0, cfg, points=2001)
    assert alloc.p_per_user == (10.0, 0.0)
    assert best == pytest.approx(math.log2(1 + 10.0 * 0.3), rel=1e-12)


def test_bc_simplex_grid_identical_channels_split_invariant():
    h = np.array([0.4 + 0.1j, -0.3 + 0.2j])
    g = float(np.vdot(h, h).real)
    cfg = BcConfig(total_power_P=9.0, noise_var_per_user=(2.0, 2.0, 2.0))
    best, alloc = bc_simplex_grid_oracle([h, h, h], cfg, steps=30)
    assert best == pytest.approx(math.log2(1 + 9.0 * g / 2.0), rel=1e-12)
    assert sum(alloc.p_per_user) == pytest.approx(9.0, rel=1e-12)
    with pytest.raises(ValueError):
        bc_simplex_grid_oracle([h, h], cfg, steps=10)


def test_mc_grid_identical_channels_find_matched_beam():
    h = np.array([0.5 + 0.2j, 0.1 - 0.3j, 0.25 + 0j])
    g = float(np.vdot(h, h).real)
    best, w = mc_beam_grid_oracle(h, 3.0 * h, (1.0, 1.0), 20.0)
    assert best == pytest.approx(math.log2(1 + 20.0 * g), abs=1e-6)
    assert abs(np.vdot(h, w.weights)) ** 2 == pytest.approx(g, rel=1e-6)


def test_mc_grid_orthogonal_channels_balance():
    h1 = np.array([1.0 + 0j, 0.0])
    h2 = np.array([0.0, 1.0 + 0j])
    best, _ = mc_beam_grid_oracle(h1, h2, (1.0, 1.0), 30.0)
    assert best == pytest.approx(math.log2(1 + 15.0), abs=1e-3)


def test_element_sums_match_vector_forms_nf(small_geometry, user1, user2_dd):
    h1 = nf_channel_vector(small_geometry, user1)
    h2 = nf_channel_vector(small_geometry, user2_dd)
    g_sum = gain_sum_oracle(small_geometry, user1)
    assert g_sum == pytest.approx(gain_exact(h1), rel=1e-12)
    ccf_sum = ccf_sum_oracle(small_geometry, user1, user2_dd)
    assert ccf_sum == pytest.approx(ccf_exact(h1, h2), rel=1e-12)
    self_ccf = ccf_sum_oracle(small_geometry, user1, user1)
    assert self_ccf == pytest.approx(1.0, abs=1e-12)


def test_element_sums_match_closed_forms_ff(small_geometry, user1, user2_dd):
    g_sum = gain_sum_oracle(small_geometry, user1, model="ff")
    assert g_sum == pytest.approx(ff_gain_closed(small_geometry, user1), rel=1e-12)
    ccf_sum = ccf_sum_oracle(small_geometry, user1, user2_dd, model="ff")
    closed = ff_ccf_closed(small_geometry, user1, user2_dd)
    assert ccf_sum == pytest.approx(closed, abs=1e-9)
    with pytest.raises(ValueError):
        gain_sum_oracle(small_geometry, user1, model="fresnel")


def test_element_sums_are_deterministic(small_geometry, user1, user2_dd):
    a = ccf_sum_oracle(small_geometry, user1, user2_dd)
    b = ccf_sum_oracle(small_geometry, user1, user2_dd)
    assert a == b
    assert gain_sum_oracle(small_geometry, user1) == gain_sum_oracle(
        small_geometry, user1
    )


def test_grid_oracles_are_deterministic():
    h1, h2 = synth_pair(0.5, 0.8, 0.4, m=4)
    cfg = BcConfig(total_power_P=REF_POWER, noise_var_per_user=(1.0, 1.0))
    a = bc_power_grid_oracle(0.5, 0.8, 0.4, cfg, points=2001)
    b = bc_power_grid_oracle(0.5, 0.8, 0.4, cfg, points=2001)
    assert a[0] == b[0] and a[1].p_per_user == b[1].p_per_user
    r1, w1 = mc_beam_grid_oracle(h1, h2, (1.0, 1.0), 10.0, grid_spec=(50, 50, 16))
    r2, w2 = mc_beam_grid_oracle(h1, h2, (1.0, 1.0), 10.0, grid_spec=(50, 50, 16))
    assert r1 == r2
    np.testing.assert_array_equal(w1.weights, w2.weights)
