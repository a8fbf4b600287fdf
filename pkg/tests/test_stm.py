import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ehrelay.analysis.stm import (LinkProbs, availability, build_stm, consumption_probabilities,
                                  stability, stationary_distribution)
from ehrelay.errors import NegativeEntry
from ehrelay.protocol import CbnSet, condition_probabilities
from ehrelay.radio import LinkSet, derive_links

from conftest import density_config, make_config

STRUCTURAL_ZEROS = [(1, 2), (2, 1), (2, 3), (3, 1), (3, 2)]


def solve(cfg, **kw):
    links = derive_links(cfg)
    return links, stationary_distribution(links, cfg.lambda1, cfg.lambda2, cfg.m1, cfg.m2, **kw)


def stm_from_conditions(links, a1, a2):
    """Oracle: assemble T by summing protocol-row probabilities into their target sets."""
    t = condition_probabilities(links, a1, a2)
    target = {
        CbnSet.S1: {"C1": 0, "C2": 1, "C3": 2, "C4": 3, "Others": 0},
        CbnSet.S2: {"C1": 0, "C5": 0, "C6": 3, "C7": 3, "C8": 3, "Others": 1},
        CbnSet.S3: {"C1": 0, "C9": 0, "Others": 2},
        CbnSet.S4: {"C1": 0, "C9": 0, "C10": 0, "C11": 0, "Others": 3},
    }
    out = np.zeros((4, 4))
    for s, row in t.items():
        for label, p in row.items():
            out[int(s), target[s][label]] += p
    return out


@pytest.mark.parametrize("r0", [1.0, 1.5, 2.0])
def test_converged_stm_matches_condition_oracle(r0):
    cfg = make_config(r0=r0)
    links, sd = solve(cfg)
    assert sd.converged
    psi1, psi2, b1, b2 = stability(links, sd.p, cfg.lambda1, cfg.lambda2, cfg.m1, cfg.m2)
    t = build_stm(links, sd.p, cfg.lambda1, cfg.lambda2, cfg.m1, cfg.m2).matrix
    want = stm_from_conditions(links, availability(b1, cfg.lambda1, cfg.m1),
                               availability(b2, cfg.lambda2, cfg.m2))
    np.testing.assert_allclose(t, want, atol=1e-15)


@pytest.mark.parametrize("r0", [1.0, 1.5, 2.0])
def test_rows_sum_and_structural_zeros(r0):
    cfg = make_config(r0=r0)
    links, sd = solve(cfg)
    t = build_stm(links, sd.p, cfg.lambda1, cfg.lambda2, cfg.m1, cfg.m2).matrix
    np.testing.assert_allclose(t.sum(axis=1), 1.0, atol=1e-12)
    assert np.all((t >= 0) & (t <= 1))
    for i, j in STRUCTURAL_ZEROS:
        assert t[i, j] == 0.0
    assert t[3, 3] == 1.0 - t[3, 0]


def test_fixed_point_residual(baseline):
    links, sd = solve(baseline)
    t = build_stm(links, sd.p, baseline.lambda1, baseline.lambda2, baseline.m1, baseline.m2).matrix
    assert np.linalg.norm(sd.p - sd.p @ t) < 1e-6
    assert sd.p.sum() == pytest.approx(1.0, abs=1e-9)
    assert np.all((sd.p >= 0) & (sd.p <= 1))
    assert 0 < sd.iterations < 100_000


def test_zero_threshold_collapses_to_direct_delivery():
    links = LinkSet(1.0, 0.5, 0.5, 0.5, 0.5, 0.5, gamma_th=0.0)
    t = build_stm(links, np.full(4, 0.25), 1.0, 1.0, 10.0, 10.0, saturate=True).matrix
    np.testing.assert_array_equal(t[0], [1.0, 0.0, 0.0, 0.0])
    sd = stationary_distribution(links, 1.0, 1.0, 10.0, 10.0, saturate=True)
    np.testing.assert_allclose(sd.p, [1, 0, 0, 0], atol=1e-7)


def test_unreachable_relays_collapse_to_s1():
    links = LinkSet(0.5, 1e6, 1e6, 0.5, 0.5, 0.5, gamma_th=1.0)
    sd = stationary_distribution(links, 1.0, 1.0, 10.0, 10.0, saturate=True)
    assert sd.converged
    np.testing.assert_allclose(sd.p, [1, 0, 0, 0], atol=1e-7)


def test_strict_mode_reports_invalid_iterate():
    # R2 harvests far more than it can spend: availability 1/(b lambda M) > 1
    cfg = make_config(r0=2.0, inv_lambda2_db=7.2)
    links, sd = solve(cfg)
    assert not sd.converged and sd.reason == "negative_entry"
    assert sd.p.sum() == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(NegativeEntry):
        build_stm(links, np.full(4, 0.25), cfg.lambda1, 1e-3, cfg.m1, cfg.m2)


def test_max_iterations_flag(baseline):
    links, sd = solve(baseline, max_iter=3)
    assert not sd.converged and sd.reason == "max_iterations" and sd.iterations == 3


def test_build_stm_rejects_bad_p(baseline):
    links = derive_links(baseline)
    with pytest.raises(ValueError):
        build_stm(links, [0.5, 0.5, 0.5, 0.5], 1, 1, 1, 1)


def test_stability_identities(baseline):
    links, sd = solve(baseline)
    psi1, psi2, b1, b2 = stability(links, sd, baseline.lambda1, baseline.lambda2, baseline.m1,
                                   baseline.m2)
    assert psi2 / b2 == pytest.approx(baseline.lambda2 * baseline.m2, rel=1e-15)
    assert psi1 / b1 == pytest.approx(baseline.lambda1 * baseline.m1, rel=1e-15)


def test_no_r2_occupancy_means_no_r2_consumption():
    lp = LinkProbs(0.3, 0.5, 0.4, 0.6, 0.7, 0.8)
    b1, b2 = consumption_probabilities(lp, [0.5, 0.5, 0.0, 0.0], 1.0, 10.0)
    assert b2 == 0.0
    assert b1 == pytest.approx(0.7 * 0.5 * (0.6 + 0.4 * 0.6 * 0.7))


@pytest.mark.parametrize("m1,m2", [(10, 8), (15, 13)])
def test_density_parameters_are_stable(m1, m2):
    cfg = density_config(m1, m2)
    links, sd = solve(cfg)
    psi1, psi2, _, _ = stability(links, sd.p, cfg.lambda1, cfg.lambda2, cfg.m1, cfg.m2)
    assert sd.converged and psi1 > 1 and psi2 > 1


probs = st.floats(0.0, 1.0)


@settings(max_examples=200)
@given(st.tuples(*[st.floats(0.01, 0.99)] * 6), probs, probs)
def test_any_availability_gives_stochastic_matrix(lps, a1, a2):
    from ehrelay.analysis.stm import _stm_from_availability

    t = _stm_from_availability(LinkProbs(*lps), a1, a2)
    assert np.all(t >= -1e-15)
    np.testing.assert_allclose(t.sum(axis=1), 1.0, atol=1e-12)
    for i, j in STRUCTURAL_ZEROS:
        assert t[i, j] == 0.0
