"""Limiting density of a relay energy buffer and its stationarity check.

The buffer evolves as ``B' = B + X - M*O`` with ``X ~ Exp(lam)`` and ``O = 1``
with probability ``b`` whenever ``B >= M``. For ``b*lam*M > 1`` its limiting
density is

    g(x) = (1 - e^{qx}) / M          0 <= x < M
    g(x) = k e^{qx}                  x >= M,   k = -q / (M (b lam + q))

with ``q < 0`` the nonzero root of ``b lam e^{qM} = b lam + q``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from ..errors import Unstable
from .lambertw import BRANCH_POINT, lambert_w0

__all__ = [
    "LimitingPdf",
    "STABILITY_MARGIN",
    "characteristic_root",
    "limiting_pdf",
    "pr_buffer_available",
    "verify_stationarity_residual",
]

# psi in (1, 1 + STABILITY_MARGIN] is reported unstable: q ~ 0 there and the
# root is lost to cancellation
STABILITY_MARGIN = 1e-9


def _check_stable(b: float, lam: float, m: float) -> float:
    psi = b * lam * m
    if not (psi > 1.0 + STABILITY_MARGIN):
        raise Unstable(f"b*lambda*M = {psi:.12g} <= 1: no limiting buffer distribution")
    return psi


def characteristic_root(b: float, lam: float, m: float) -> float:
    """Negative root q of ``b*lam*exp(q*m) = b*lam + q``.

    Lambert-W closed form, then Newton polishing on the defining equation
    inside the bracket (-b*lam, -ln(psi)/m) where the root is unique.
    """
    psi = _check_stable(b, lam, m)
    bl = b * lam
    arg = max(-psi * math.exp(-psi), BRANCH_POINT)
    q = -lambert_w0(arg) / m - bl

    def f(q):
        return bl * math.exp(q * m) - bl - q

    lo, hi = -bl, -math.log(psi) / m
    if not (lo < q < hi):
        q = 0.5 * (lo + hi)
    for _ in range(8):
        fq = f(q)
        dq = fq / (bl * m * math.exp(q * m) - 1.0)
        q_new = q - dq
        if not (lo < q_new < hi):
            break
        q = q_new
        if abs(dq) <= 1e-16 * abs(q):
            break
    if abs(f(q)) > 1e-12 * max(1.0, bl):
        q = optimize.brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return q


@dataclass(frozen=True)
class LimitingPdf:
    """Piecewise density; ``k`` may overflow for very large psi, so the tail is
    evaluated from its value at ``x = M`` (``tail_at_m``), which stays finite."""

    b: float
    lam: float
    m: float
    q: float
    k: float
    tail_at_m: float = math.nan

    def __post_init__(self):
        if math.isnan(self.tail_at_m):
            object.__setattr__(self, "tail_at_m", self.k * math.exp(self.q * self.m))

    @property
    def psi(self) -> float:
        return self.b * self.lam * self.m

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        head = (1.0 - np.exp(self.q * np.minimum(x, self.m))) / self.m
        tail = self.tail_at_m * np.exp(self.q * (np.maximum(x, self.m) - self.m))
        out = np.where(x < self.m, head, tail)
        out = np.where(x < 0, 0.0, out)
        return out if out.ndim else float(out)

    def head(self, x):
        return (1.0 - np.exp(self.q * np.asarray(x, dtype=float))) / self.m

    def tail(self, x):
        return self.tail_at_m * np.exp(self.q * (np.asarray(x, dtype=float) - self.m))

    def tail_mass(self) -> float:
        """Closed-form Pr{B >= M} from integrating the tail."""
        return -self.tail_at_m / self.q

    def head_mass(self) -> float:
        q, m = self.q, self.m
        return (m - math.expm1(q * m) / q) / m

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        q, m = self.q, self.m
        xh = np.clip(x, 0.0, m)
        head = (xh - np.expm1(q * xh) / q) / m
        xt = np.maximum(x, m)
        tail = self.tail_at_m * np.expm1(q * (xt - m)) / q
        out = np.where(x < 0, 0.0, head + np.where(x > m, tail, 0.0))
        return out if out.ndim else float(out)

    def max_density(self) -> float:
        """Peak of g, reached at x = M from the right (head is increasing, tail decreasing)."""
        return max(self.tail_at_m, float(self.head(self.m)))


def limiting_pdf(b: float, lam: float, m: float) -> LimitingPdf:
    q = characteristic_root(b, lam, m)
    # b*lam + q == b*lam*e^{qM} at the root; g(M) = -q/(M b lam) avoids the
    # cancellation in b*lam + q when psi is large
    at_m = -q / (m * b * lam)
    with np.errstate(over="ignore"):
        k = at_m * float(np.exp(-q * m))
    return LimitingPdf(b=b, lam=lam, m=m, q=q, k=k, tail_at_m=at_m)


def pr_buffer_available(b: float, lam: float, m: float) -> float:
    """Stationary Pr{B >= M} = 1 / (M b lam)."""
    psi = _check_stable(b, lam, m)
    return 1.0 / psi


def _rhs_tail(pdf: LimitingPdf, x: float, epsabs: float) -> float:
    # x >= M: carried-over head mass + idle tail + transmitting tail
    lam, m, b = pdf.lam, pdf.m, pdf.b
    a = 1.0 - b

    def fx(u):
        return lam * math.exp(-lam * u) if u >= 0 else 0.0

    opts = dict(epsabs=epsabs, epsrel=1e-12, limit=200)
    i1, _ = integrate.quad(lambda mu: fx(x - mu) * float(pdf.head(mu)), 0.0, m, **opts)
    i2, _ = integrate.quad(lambda mu: fx(x - mu) * float(pdf.tail(mu)), m, x, **opts) if x > m else (0.0, 0.0)
    i3, _ = integrate.quad(lambda mu: fx(x + m - mu) * float(pdf.tail(mu)), m, x + m, **opts)
    return i1 + a * i2 + b * i3


def _rhs_head(pdf: LimitingPdf, x: float, epsabs: float) -> float:
    # 0 <= x < M: Volterra equation of the second kind for the head
    lam, m, b = pdf.lam, pdf.m, pdf.b

    def fx(u):
        return lam * math.exp(-lam * u)

    opts = dict(epsabs=epsabs, epsrel=1e-12, limit=200)
    i1, _ = integrate.quad(lambda mu: fx(x + m - mu) * float(pdf.tail(mu)), m, x + m, **opts)
    i2, _ = integrate.quad(lambda mu: fx(x - mu) * float(pdf.head(mu)), 0.0, x, **opts) if x > 0 else (0.0, 0.0)
    return b * i1 + i2


def verify_stationarity_residual(pdf: LimitingPdf, xs, epsabs: float = 1e-10) -> float:
    """Max |g(x) - (transition operator applied to g)(x)| over ``xs``.

    Both sides of the one-step balance equations are evaluated by adaptive
    quadrature; ``pdf`` may be any candidate (b, lam, m, q, k), not only the
    exact solution.
    """
    worst = 0.0
    for x in np.atleast_1d(np.asarray(xs, dtype=float)):
        x = float(x)
        if x < 0:
            raise ValueError("sample points must be >= 0")
        if x < pdf.m:
            lhs = float(pdf.head(x))
            rhs = _rhs_head(pdf, x, epsabs)
        else:
            lhs = float(pdf.tail(x))
            rhs = _rhs_tail(pdf, x, epsabs)
        worst = max(worst, abs(lhs - rhs))
    return worst
