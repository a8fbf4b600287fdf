import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy import integrate

from ehrelay.analysis.pdf import (LimitingPdf, characteristic_root, limiting_pdf,
                                  pr_buffer_available, verify_stationarity_residual)
from ehrelay.errors import Unstable


def bisect_root(b, lam, m):
    """Oracle: plain bisection on b lam e^{qm} - b lam - q over (-b lam, -ln(psi)/m)."""
    f = lambda q: b * lam * math.exp(q * m) - b * lam - q
    lo, hi = -b * lam, -math.log(b * lam * m) / m
    assert f(lo) >= 0 > f(hi)  # f(lo) underflows to 0 for large psi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_root_against_bisection_example():
    q = characteristic_root(1.0, 2.0, 1.0)
    assert q == pytest.approx(bisect_root(1.0, 2.0, 1.0), abs=1e-13)
    assert q == pytest.approx(-1.5936, abs=5e-5)


stable = st.tuples(st.floats(0.01, 1.0), st.floats(0.01, 20.0), st.floats(0.1, 60.0)).filter(
    lambda t: 1.0 + 1e-6 < t[0] * t[1] * t[2] < 1e4)


@given(stable)
def test_root_residual_and_sign(t):
    b, lam, m = t
    q = characteristic_root(b, lam, m)
    assert q < 0
    assert abs(b * lam * math.exp(q * m) - b * lam - q) < 1e-10
    assert q == pytest.approx(bisect_root(b, lam, m), rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("b,lam,m", [(0.5, 1.0, 2.0), (0.25, 1.0, 4.0), (0.1, 1.0, 1.0), (1.0, 1.0, 1.0 + 5e-10)])
def test_unstable_at_or_below_one(b, lam, m):
    with pytest.raises(Unstable):
        characteristic_root(b, lam, m)
    with pytest.raises(Unstable):
        pr_buffer_available(b, lam, m)
    with pytest.raises(Unstable):
        limiting_pdf(b, lam, m)


def test_pr_available_examples():
    assert pr_buffer_available(0.5, 1.0, 4.0) == 0.5
    assert pr_buffer_available(1.0, 1.0, 1.0 + 1e-6) == pytest.approx(1.0, abs=1e-5)


@settings(max_examples=60, deadline=None)
@given(stable)
def test_normalization_and_tail_mass_by_quadrature(t):
    b, lam, m = t
    g = limiting_pdf(b, lam, m)
    head, _ = integrate.quad(g, 0, m, epsabs=1e-13, epsrel=1e-13)
    tail, _ = integrate.quad(g, m, np.inf, epsabs=1e-13, epsrel=1e-13)
    assert abs(head + tail - 1) < 1e-9
    assert abs(tail - 1 / (b * lam * m)) < 1e-9
    assert g.tail_mass() == pytest.approx(1 / (b * lam * m), rel=1e-12)
    assert g.head_mass() + g.tail_mass() == pytest.approx(1.0, abs=1e-12)


@given(stable)
def test_continuity_at_m(t):
    g = limiting_pdf(*t)
    left = (1 - math.exp(g.q * g.m)) / g.m
    right = g.tail_at_m
    assert abs(left - right) <= 1e-12 * max(1.0, right)


def test_value_at_zero_and_shape():
    g = limiting_pdf(0.4, 1.0, 5.0)
    assert g(0.0) == 0.0
    assert g(-1.0) == 0.0
    xs = np.linspace(0, 5, 50)
    assert np.all(np.diff(g(xs)) > 0)  # head increasing
    xs = np.linspace(5, 40, 50)
    assert np.all(np.diff(g(xs)) < 0)  # tail decreasing
    assert g.max_density() == pytest.approx(float(g(5.0)), rel=1e-12)


def test_cdf_against_quadrature():
    g = limiting_pdf(0.4, 1.0, 5.0)
    for x in (0.0, 1.0, 4.999, 5.0, 7.5, 30.0):
        ref, _ = integrate.quad(g, 0, x, epsabs=1e-13, points=[5.0] if x > 5 else None)
        assert g.cdf(x) == pytest.approx(ref, abs=1e-11)
    assert g.cdf(1e4) == pytest.approx(1.0, abs=1e-12)


def test_k_matches_textbook_form_when_well_conditioned():
    g = limiting_pdf(0.6, 0.8, 3.0)
    assert g.k == pytest.approx(-g.q / (g.m * (g.b * g.lam + g.q)), rel=1e-12)


def test_large_psi_stays_finite():
    g = limiting_pdf(1.0, 50.0, 50.0)
    assert math.isfinite(g.tail_at_m) and g.tail_at_m > 0
    assert g.tail_mass() == pytest.approx(1 / 2500, rel=1e-12)
    assert float(g(60.0)) >= 0 and math.isfinite(float(g(60.0)))


@pytest.mark.parametrize("b,lam,m", [(0.25, 0.8, 10.0), (0.09, 2.5, 8.0), (0.7, 1.5, 1.0)])
def test_stationarity_residual_small_and_sensitive(b, lam, m):
    g = limiting_pdf(b, lam, m)
    xs = np.linspace(0, 5 * m, 10)
    good = verify_stationarity_residual(g, xs)
    assert good < 1e-9
    assert verify_stationarity_residual(g, [0.0]) == 0.0
    q = g.q * 1.01
    bad_pdf = LimitingPdf(b, lam, m, q, -q / (m * b * lam * math.exp(q * m)))
    bad = verify_stationarity_residual(bad_pdf, xs)
    assert bad >= 10 * max(good, 1e-12)
    assert bad > 1e-6


def test_residual_rejects_negative_points():
    with pytest.raises(ValueError):
        verify_stationarity_residual(limiting_pdf(0.5, 1.0, 4.0), [-1.0])
