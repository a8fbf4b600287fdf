"""Steady-state outage probability, throughput, its rate derivative and the optimal rate."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from ..errors import Unstable
from ..radio import LinkSet, NetworkConfig, derive_links
from .pdf import LimitingPdf, limiting_pdf, pr_buffer_available
from .stm import LinkProbs, StationaryDistribution, consumption_probabilities, stability, \
    stationary_distribution

__all__ = [
    "SteadyStateReport",
    "steady_state",
    "outage_probability",
    "outage_terms",
    "throughput",
    "throughput_derivative",
    "throughput_derivative_as_printed",
    "frozen_throughput",
    "optimal_rate",
    "total_throughput_slope",
    "OptimalRate",
    "RATE_GRID",
]

RATE_GRID = (0.1, 4.0, 0.05)


@dataclass(frozen=True)
class SteadyStateReport:
    p: StationaryDistribution
    b1: float
    b2: float
    psi1: float
    psi2: float
    pdf1: LimitingPdf
    pdf2: LimitingPdf
    pr_b1_ge: float
    pr_b2_ge: float
    op: float
    throughput: float


def _require_stable(psi1: float, psi2: float) -> None:
    if not psi2 > 1.0:
        raise Unstable(f"R2 buffer unstable (psi2 = {psi2:.6g})")
    if not psi1 > 1.0:
        raise Unstable(f"R1 buffer unstable (psi1 = {psi1:.6g})")


def outage_terms(links: LinkSet, p, b1: float, b2: float, lambda1: float, lambda2: float,
                 m1: float, m2: float) -> np.ndarray:
    """Per-state delivery probabilities [P_s1, P_s2, P_s3, P_s4]; OP = 1 - their sum."""
    lp = LinkProbs.from_links(links)
    p1, p2, p3, p4 = (float(v) for v in p)
    f = 1.0 - lp.sd
    via_r1 = f * lp.r1d / (b1 * lambda1 * m1)
    via_r2 = f * lp.r2d / (b2 * lambda2 * m2)
    return np.array([
        p1 * lp.sd,
        p2 * (lp.sd + via_r1),
        p3 * (lp.sd + via_r2),
        p4 * (lp.sd + via_r2 + via_r1 * (1.0 - lp.r2d / (b2 * lambda2 * m2))),
    ])


def _collapsed_success(lp: LinkProbs, p, b1, b2, lambda1, lambda2, m1, m2) -> float:
    _, p2, _, p4 = (float(v) for v in p)
    f = 1.0 - lp.sd
    relay_weight = p2 + p4 * (1.0 - lp.r2d / (b2 * lambda2 * m2))
    return lp.sd + 1.0 / (lambda2 * m2) + relay_weight * f * lp.r1d / (b1 * lambda1 * m1)


def outage_probability(links: LinkSet, p, lambda1: float, lambda2: float, m1: float,
                       m2: float) -> float:
    """Closed-form outage probability at the stationary CBN distribution ``p``.

    R2's relayed deliveries collapse to 1/(lambda2 M2) (its long-run
    spending equals its harvest).
    """
    if isinstance(p, StationaryDistribution):
        p = p.p
    psi1, psi2, b1, b2 = stability(links, p, lambda1, lambda2, m1, m2)
    _require_stable(psi1, psi2)
    lp = LinkProbs.from_links(links)
    return 1.0 - _collapsed_success(lp, p, b1, b2, lambda1, lambda2, m1, m2)


def throughput(op: float, r0: float, eta: float) -> float:
    return eta * r0 * (1.0 - op)


def _unpack(config: NetworkConfig, links: LinkSet | None):
    return links or derive_links(config), config.lambda1, config.lambda2, config.m1, config.m2


def steady_state(config: NetworkConfig, links: LinkSet | None = None) -> SteadyStateReport:
    """Full analytical evaluation; raises :class:`Unstable` outside psi1, psi2 > 1."""
    links, l1, l2, m1, m2 = _unpack(config, links)
    sd = stationary_distribution(links, l1, l2, m1, m2)
    psi1, psi2, b1, b2 = stability(links, sd.p, l1, l2, m1, m2)
    if not sd.converged:
        raise Unstable(f"CBN iteration stopped ({sd.reason}) at psi1 = {psi1:.6g}, psi2 = {psi2:.6g}")
    _require_stable(psi1, psi2)
    op = outage_probability(links, sd.p, l1, l2, m1, m2)
    return SteadyStateReport(
        p=sd,
        b1=b1,
        b2=b2,
        psi1=psi1,
        psi2=psi2,
        pdf1=limiting_pdf(b1, l1, m1),
        pdf2=limiting_pdf(b2, l2, m2),
        pr_b1_ge=pr_buffer_available(b1, l1, m1),
        pr_b2_ge=pr_buffer_available(b2, l2, m2),
        op=op,
        throughput=throughput(op, config.r0, config.eta),
    )


def frozen_throughput(config: NetworkConfig, r0: float, p, b2: float) -> float:
    """Throughput in collapsed closed form at rate ``r0`` with ``p`` and ``b2`` held fixed.

    ``b1`` is re-evaluated at the new threshold. This is the function whose
    derivative :func:`throughput_derivative` returns.
    """
    links = derive_links(config).with_rate(r0)
    lp = LinkProbs.from_links(links)
    b1, _ = _b1_with_b2(lp, p, b2, config.lambda2, config.m2)
    s = _collapsed_success(lp, p, b1, b2, config.lambda1, config.lambda2, config.m1, config.m2)
    return config.eta * r0 * s


def _b1_with_b2(lp, p, b2, lambda2, m2):
    _, p2, _, p4 = (float(v) for v in p)
    f = 1.0 - lp.sd
    chain = lp.r1d + (1.0 - lp.r1d) * (1.0 - lp.sr2) * lp.r1r2
    return f * (p2 * chain + p4 * lp.r1d * (1.0 - lp.r2d / (m2 * b2 * lambda2))), b2


def _rate_terms(config, r0, p, b2):
    links = derive_links(config).with_rate(r0)
    lp = LinkProbs.from_links(links)
    b1, _ = _b1_with_b2(lp, p, b2, config.lambda2, config.m2)
    c = 2.0**r0 * math.log(2.0)  # d gamma_th / d r0
    return links, lp, b1, c


def _db1_dr0(links, lp, p, b2, c, lambda2, m2) -> float:
    _, p2, _, p4 = (float(v) for v in p)
    o_sd, o_sr2, o_r1d, o_r1r2, o_r2d = (links.omega_sd, links.omega_sr2, links.omega_r1d,
                                          links.omega_r1r2, links.omega_r2d)
    f = 1.0 - lp.sd
    a2 = 1.0 / (b2 * lambda2 * m2)
    chain = lp.r1d + (1.0 - lp.r1d) * (1.0 - lp.sr2) * lp.r1r2
    d = p2 * c * o_sd * lp.sd * chain
    d += p2 * f * (c * o_r1d * lp.r1d * ((1.0 - lp.sr2) * lp.r1r2 - 1.0)
                   + c * (1.0 - lp.r1d) * lp.r1r2 * ((o_sr2 + o_r1r2) * lp.sr2 - o_r1r2))
    d += p4 * c * lp.r1d * ((o_sd + o_r1d) * lp.sd - o_r1d) * (1.0 - lp.r2d * a2)
    d += p4 * c * o_r2d * f * lp.r1d * lp.r2d * a2
    return d


def throughput_derivative(config: NetworkConfig, p, b2: float, r0: float | None = None) -> float:
    """d(throughput)/d(r0) with the CBN distribution ``p`` and ``b2`` held fixed.

    Analytic derivative of :func:`frozen_throughput`; ``b1`` varies with
    the threshold.
    """
    r0 = config.r0 if r0 is None else r0
    if isinstance(p, StationaryDistribution):
        p = p.p
    links, lp, b1, c = _rate_terms(config, r0, p, b2)
    l1, l2, m1, m2, eta = config.lambda1, config.lambda2, config.m1, config.m2, config.eta
    _, p2, _, p4 = (float(v) for v in p)
    o_sd, o_r1d, o_r2d = links.omega_sd, links.omega_r1d, links.omega_r2d
    f = 1.0 - lp.sd
    a2 = 1.0 / (b2 * l2 * m2)
    weight = p2 + p4 * (1.0 - lp.r2d * a2)
    success = _collapsed_success(lp, p, b1, b2, l1, l2, m1, m2)

    d_weight = p4 * c * o_r2d * lp.r2d * a2
    d_relay = c * lp.r1d * (lp.sd * (o_sd + o_r1d) - o_r1d)  # d[(1-e_sd) e_r1d]
    db1 = _db1_dr0(links, lp, p, b2, c, l2, m2)
    d_success = (-c * o_sd * lp.sd
                 + d_weight * f * lp.r1d / (b1 * l1 * m1)
                 + weight * (d_relay / (b1 * l1 * m1) - f * lp.r1d * db1 / (b1**2 * l1 * m1)))
    return eta * success + eta * r0 * d_success


def throughput_derivative_as_printed(config: NetworkConfig, p, b2: float,
                                     r0: float | None = None) -> float:
    """The closed form for d(throughput)/d(r0) exactly as it is printed in the source derivation.

    Kept for comparison only. It differs from the true derivative of
    :func:`frozen_throughput` in three places: the p4 cross term (and its
    counterpart in db1/dr0) carries Omega_SD e^{-Omega_SD Gamma} where the
    chain rule gives Omega_R2D (1 - e^{-Omega_SD Gamma}), and two
    e^{-Omega_SD Gamma} factors appear as e^{-Omega_R1D Gamma}.
    """
    r0 = config.r0 if r0 is None else r0
    if isinstance(p, StationaryDistribution):
        p = p.p
    links, lp, b1, c = _rate_terms(config, r0, p, b2)
    l1, l2, m1, m2, eta = config.lambda1, config.lambda2, config.m1, config.m2, config.eta
    _, p2, _, p4 = (float(v) for v in p)
    o_sd, o_sr2, o_r1d, o_r1r2, o_r2d = (links.omega_sd, links.omega_sr2, links.omega_r1d,
                                          links.omega_r1r2, links.omega_r2d)
    g = links.gamma_th
    f = 1.0 - lp.sd
    a2 = 1.0 / (b2 * l2 * m2)
    weight = p2 + p4 * (1.0 - lp.r2d * a2)
    success = _collapsed_success(lp, p, b1, b2, l1, l2, m1, m2)
    chain = lp.r1d + (1.0 - lp.r1d) * (1.0 - lp.sr2) * lp.r1r2

    db1 = (p2 * c * o_sd * lp.sd * chain
           + p2 * f * (c * o_r1d * lp.r1d * ((1.0 - lp.sr2) * lp.r1r2 - 1.0)
                       + c * (1.0 - lp.r1d) * lp.r1r2 * ((o_sr2 + o_r1r2) * lp.sr2 - o_r1r2))
           + p4 * c * lp.r1d * ((o_sd + o_r1d) * lp.sd - o_r1d) * (1.0 - lp.r2d * a2)
           + p4 * c * o_sd * math.exp(-(o_sd + o_r1d + o_r2d) * g) * a2)
    out = success * eta
    out += p4 * c * eta * r0 * o_sd / (b1 * b2 * l1 * l2 * m1 * m2) * math.exp(-(o_sd + o_r1d + o_r2d) * g)
    out -= c * eta * r0 * o_sd * lp.r1d
    out += eta * r0 * weight * (
        c * lp.r1d / (b1 * l1 * m1) * (lp.r1d * (o_sd + o_r1d) - o_r1d)
        - f * lp.r1d / (b1**2 * l1 * m1) * db1
    )
    return out


@dataclass(frozen=True)
class OptimalRate:
    r0_star: float
    throughput: float
    grid: np.ndarray
    grid_throughput: np.ndarray
    at_boundary: bool


def _self_consistent_throughput(config: NetworkConfig, r0: float) -> float:
    return steady_state(config.replace(r0=float(r0))).throughput


def total_throughput_slope(config: NetworkConfig, r0: float | None = None, h: float = 1e-5) -> float:
    """Central difference of the self-consistent throughput in ``r0``.

    Unlike :func:`throughput_derivative`, the CBN distribution and ``b2``
    are re-solved at ``r0 +/- h``, so this is the total derivative.
    """
    r0 = config.r0 if r0 is None else r0
    return (_self_consistent_throughput(config, r0 + h)
            - _self_consistent_throughput(config, r0 - h)) / (2 * h)


def optimal_rate(config: NetworkConfig, grid=RATE_GRID, *, refine: bool = True) -> OptimalRate:
    """Maximize throughput over the rate, re-solving the CBN fixed point at every rate.

    Grid search followed by golden-section refinement inside the bracketing
    grid cells. Unstable grid points count as zero throughput.
    """
    start, stop, step = grid
    rates = np.round(np.arange(start, stop + step / 2, step), 12)
    vals = np.empty_like(rates)
    for i, r in enumerate(rates):
        try:
            vals[i] = _self_consistent_throughput(config, r)
        except Unstable:
            vals[i] = -np.inf
    if not np.isfinite(vals).any():
        raise Unstable("no stable rate on the search grid")
    i = int(np.argmax(vals))
    at_boundary = i in (0, len(rates) - 1)
    r_star, v_star = float(rates[i]), float(vals[i])
    if refine and not at_boundary:
        lo, hi = rates[i - 1], rates[i + 1]

        def neg(r):
            try:
                return -_self_consistent_throughput(config, r)
            except Unstable:
                return 0.0

        res = optimize.minimize_scalar(neg, bracket=(lo, r_star, hi), method="golden",
                                       options={"xtol": 1e-6})
        if lo <= res.x <= hi and -res.fun >= v_star:
            r_star, v_star = float(res.x), float(-res.fun)
    return OptimalRate(r_star, v_star, rates, vals, at_boundary)
