import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ehrelay.radio import (LINK_NAMES, LinkSet, NetworkConfig, NodeLayout, dbm_to_mw, derive_links,
                           p_link_success, sample_snr, snr_from_uniform)

from conftest import make_config


def test_unit_conversions():
    assert dbm_to_mw(10) == pytest.approx(10.0)
    assert dbm_to_mw(-50) == pytest.approx(1e-5)
    assert dbm_to_mw(0) == 1.0


def test_omega_sd_hand_arithmetic():
    # d = 100 m, alpha = 3, N0 = 1e-5 mW, P_S = 10 mW  ->  1e6 * 1e-5 / 10 = 1
    cfg = make_config(p_s_dbm=10)
    assert derive_links(cfg).omega_sd == pytest.approx(1.0, rel=1e-12)


def test_all_six_omegas_by_hand(baseline):
    links = derive_links(baseline)
    n0 = 1e-5
    d = {"sd": 100.0, "sr1": math.hypot(30, 20), "sr2": math.hypot(60, 20),
         "r1d": math.hypot(70, 20), "r1r2": math.hypot(30, 40), "r2d": math.hypot(40, 20)}
    power = {"sd": 10.0, "sr1": 10.0, "sr2": 10.0, "r1d": 15.0, "r1r2": 15.0, "r2d": 10.0}
    for name in LINK_NAMES:
        expected = d[name] ** 3 * n0 / power[name]
        assert getattr(links, "omega_" + name) == pytest.approx(expected, rel=1e-12), name


@pytest.mark.parametrize("r0,gamma", [(1, 1.0), (2, 3.0), (3, 7.0), (0.5, math.sqrt(2) - 1)])
def test_gamma_th(r0, gamma):
    assert derive_links(make_config(r0=r0)).gamma_th == pytest.approx(gamma, rel=1e-15)


def test_coincident_nodes_rejected():
    with pytest.raises(ValueError, match="coincide"):
        NodeLayout(r1_pos=(0.0, 0.0))


@pytest.mark.parametrize("field", ["p_s", "m1", "m2", "lambda1", "lambda2", "n0", "alpha", "r0"])
def test_config_rejects_nonpositive(baseline, field):
    with pytest.raises(ValueError):
        baseline.replace(**{field: 0.0})


@pytest.mark.parametrize("eta", [0.0, 1.5, -0.1])
def test_config_rejects_bad_eta(baseline, eta):
    with pytest.raises(ValueError):
        baseline.replace(eta=eta)


def test_linkset_rejects_nonpositive_omega():
    with pytest.raises(ValueError):
        LinkSet(1, 1, 1, 0, 1, 1, 1)


def test_scale_consistency(baseline):
    doubled = baseline.replace(n0=2 * baseline.n0, p_s=2 * baseline.p_s, m1=2 * baseline.m1,
                               m2=2 * baseline.m2)
    np.testing.assert_allclose(derive_links(doubled).omegas(), derive_links(baseline).omegas(),
                               rtol=1e-14)


def test_inverse_cdf_half():
    assert snr_from_uniform(1.0, 0.5) == pytest.approx(math.log(2), rel=1e-15)


def test_inverse_cdf_rejects_out_of_range():
    with pytest.raises(ValueError):
        snr_from_uniform(1.0, 1.0)


def test_sample_mean_lln(rng):
    x = sample_snr(2.0, rng, 1_000_000)
    assert x.min() >= 0
    assert abs(x.mean() - 0.5) < 0.002


def test_sample_exceedance(rng):
    x = sample_snr(1.0, rng, 1_000_000)
    assert abs(np.mean(x >= 1.0) - math.exp(-1)) < 0.002


@pytest.mark.parametrize("omega,gamma", [(0.3, 0.5), (1.0, 1.0), (2.5, 0.2), (0.05, 7.0)])
def test_exceedance_matches_closed_form_within_3_sigma(rng, omega, gamma):
    n = 1_000_000
    p = p_link_success(omega, gamma)
    freq = np.mean(sample_snr(omega, rng, n) >= gamma)
    assert abs(freq - p) < 3 * math.sqrt(p * (1 - p) / n)


def test_p_link_success_examples():
    assert p_link_success(3.0, 0.0) == 1.0
    assert p_link_success(1.0, 1.0) == pytest.approx(math.exp(-1))
    vals = [p_link_success(w, 1.0) for w in (1, 10, 100, 1000)]
    assert all(a > b for a, b in zip(vals, vals[1:])) and vals[-1] < 1e-300


@given(st.floats(1e-3, 50), st.floats(0, 20), st.floats(1.01, 3))
def test_p_link_success_bounded_and_monotone(omega, gamma, factor):
    p = p_link_success(omega, gamma)
    assert 0 <= p <= 1
    assert p_link_success(omega * factor, gamma) <= p
    assert p_link_success(omega, gamma * factor + 1e-6) <= p
