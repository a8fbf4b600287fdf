"""CBN-set transition matrix and its self-consistent stationary distribution."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from ..errors import NegativeEntry
from ..radio import LinkSet

__all__ = [
    "Stm",
    "StationaryDistribution",
    "LinkProbs",
    "consumption_probabilities",
    "availability",
    "build_stm",
    "stationary_distribution",
    "stability",
    "MAX_ITERATIONS",
    "TOLERANCE",
]

log = logging.getLogger(__name__)

MAX_ITERATIONS = 100_000
TOLERANCE = 1e-7


@dataclass(frozen=True)
class LinkProbs:
    """Per-link success probabilities e^(-omega * gamma_th)."""

    sd: float
    sr1: float
    sr2: float
    r1d: float
    r1r2: float
    r2d: float

    @classmethod
    def from_links(cls, links: LinkSet) -> "LinkProbs":
        g = links.gamma_th
        return cls(
            sd=math.exp(-links.omega_sd * g),
            sr1=math.exp(-links.omega_sr1 * g),
            sr2=math.exp(-links.omega_sr2 * g),
            r1d=math.exp(-links.omega_r1d * g),
            r1r2=math.exp(-links.omega_r1r2 * g),
            r2d=math.exp(-links.omega_r2d * g),
        )


@dataclass(frozen=True)
class Stm:
    matrix: np.ndarray

    def __post_init__(self):
        if self.matrix.shape != (4, 4):
            raise ValueError("STM must be 4x4")

    def __getitem__(self, idx):
        return self.matrix[idx]


@dataclass(frozen=True)
class StationaryDistribution:
    p: np.ndarray
    iterations: int
    converged: bool
    reason: str = "converged"

    @property
    def p1(self):
        return float(self.p[0])

    @property
    def p2(self):
        return float(self.p[1])

    @property
    def p3(self):
        return float(self.p[2])

    @property
    def p4(self):
        return float(self.p[3])


def availability(b: float, lam: float, m: float) -> float:
    """1 / (b lam M), the stable-regime Pr{B >= M}; ``inf`` when b = 0."""
    denom = b * lam * m
    return math.inf if denom <= 0 else 1.0 / denom


def consumption_probabilities(lp: LinkProbs, p, lambda2: float, m2: float) -> tuple[float, float]:
    """Per-slot transmit probabilities (b1, b2) of R1 and R2 given that energy is available.

    ``b1`` folds in R2's availability through 1/(M2 b2 lambda2).
    """
    p1, p2, p3, p4 = (float(v) for v in p)
    f = 1.0 - lp.sd
    b2 = (p3 + p4) * f * lp.r2d
    r1_chain = lp.r1d + (1.0 - lp.r1d) * (1.0 - lp.sr2) * lp.r1r2
    b1 = f * p2 * r1_chain
    if p4 > 0 and f > 0 and lp.r2d > 0:
        b1 += f * p4 * lp.r1d * (1.0 - lp.r2d * availability(b2, lambda2, m2))
    elif p4 > 0 and f > 0:
        b1 += f * p4 * lp.r1d
    return b1, b2


def _stm_from_availability(lp: LinkProbs, a1: float, a2: float) -> np.ndarray:
    sd, sr1, sr2, r1d, r1r2, r2d = lp.sd, lp.sr1, lp.sr2, lp.r1d, lp.r1r2, lp.r2d
    f = 1.0 - sd
    t = np.zeros((4, 4))
    t[0, 0] = f * (1 - sr1) * (1 - sr2) + sd
    t[0, 1] = f * sr1 * (1 - sr2)
    t[0, 2] = f * (1 - sr1) * sr2
    t[0, 3] = f * sr1 * sr2

    t[1, 0] = sd + f * r1d * a1
    t[1, 1] = f * (1 - sr2) * ((1 - r1d) * (1 - r1r2) * a1 + (1 - a1))
    t[1, 3] = f * (sr2 * (1 - r1d * a1) + (1 - r1d) * (1 - sr2) * r1r2 * a1)

    t[2, 0] = sd + f * r2d * a2
    t[2, 2] = f * (1 - r2d * a2)

    t[3, 0] = sd + f * r2d * a2 + f * r1d * a1 * (1 - r2d * a2)
    t[3, 3] = 1.0 - t[3, 0]
    return t


def build_stm(links: LinkSet, p, lambda1: float, lambda2: float, m1: float, m2: float,
              *, saturate: bool = False) -> Stm:
    """Transition matrix T(p) of the CBN set for the current iterate ``p``.

    Buffer availabilities enter as 1/(b lam M). With ``saturate=False`` an
    availability above 1 or a negative entry raises :class:`NegativeEntry`.
    With ``saturate=True`` availabilities are capped at 1, the limit in
    which a relay whose harvest outpaces its spending always has energy.
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (4,) or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"p must be a probability 4-vector, got {p!r}")
    lp = LinkProbs.from_links(links)
    b1, b2 = _consumption_for_stm(lp, p, lambda2, m2, saturate)
    a1 = availability(b1, lambda1, m1)
    a2 = availability(b2, lambda2, m2)
    if saturate:
        a1, a2 = min(a1, 1.0), min(a2, 1.0)
    elif a1 > 1.0 or a2 > 1.0:
        raise NegativeEntry(f"buffer availability exceeds 1 (R1: {a1:.6g}, R2: {a2:.6g})")
    t = _stm_from_availability(lp, a1, a2)
    if np.any(t < 0):
        raise NegativeEntry("negative transition probability")
    return Stm(t)


def _consumption_for_stm(lp, p, lambda2, m2, saturate):
    b1, b2 = consumption_probabilities(lp, p, lambda2, m2)
    if saturate and availability(b2, lambda2, m2) > 1.0:
        # R2 always has energy: b1 uses Pr{B2 >= M2} = 1
        f = 1.0 - lp.sd
        r1_chain = lp.r1d + (1.0 - lp.r1d) * (1.0 - lp.sr2) * lp.r1r2
        b1 = f * (p[1] * r1_chain + p[3] * lp.r1d * (1.0 - lp.r2d))
    return b1, b2


def stationary_distribution(links: LinkSet, lambda1: float, lambda2: float, m1: float, m2: float,
                            *, saturate: bool = False, max_iter: int = MAX_ITERATIONS,
                            tol: float = TOLERANCE) -> StationaryDistribution:
    """Iterate p <- p T(p) from the uniform vector until successive iterates are within ``tol``.

    Strict mode stops on a non-positive component of p or an invalid T and
    returns the previous iterate flagged non-converged. Saturated mode
    tolerates zero components (e.g. relays that are never reached).
    """
    p = np.full(4, 0.25)
    prev = p
    for i in range(max_iter):
        try:
            t = build_stm(links, p, lambda1, lambda2, m1, m2, saturate=saturate).matrix
        except NegativeEntry as exc:
            log.debug("iteration %d aborted: %s", i, exc)
            return StationaryDistribution(prev.copy(), i, False, "negative_entry")
        if not saturate and np.any(p <= 0):
            return StationaryDistribution(prev.copy(), i, False, "negative_entry")
        nxt = p @ t
        if np.linalg.norm(p - nxt) < tol:
            return StationaryDistribution(p.copy(), i, True)
        prev, p = p, nxt
    log.warning("stationary distribution did not converge in %d iterations", max_iter)
    return StationaryDistribution(p.copy(), max_iter, False, "max_iterations")


def stability(links: LinkSet, p, lambda1: float, lambda2: float, m1: float, m2: float):
    """Return ``(psi1, psi2, b1, b2)`` for the distribution ``p``."""
    if isinstance(p, StationaryDistribution):
        p = p.p
    lp = LinkProbs.from_links(links)
    b1, b2 = consumption_probabilities(lp, p, lambda2, m2)
    return lambda1 * m1 * b1, lambda2 * m2 * b2, b1, b2
