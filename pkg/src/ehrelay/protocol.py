"""Opportunistic-routing protocol table: who broadcasts, what is delivered, next CBN set.

The decision logic lives in :func:`decide`, a function of booleans only, so
the same code runs inside the compiled simulation kernel and behind the
friendlier :func:`evaluate`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ._jit import njit
from .radio import LinkSet

__all__ = [
    "CbnSet",
    "Broadcaster",
    "SlotSnrs",
    "SlotDecision",
    "CONDITION_LABELS",
    "DELIVERING",
    "CONSUMES_R1",
    "CONSUMES_R2",
    "decide",
    "evaluate",
    "condition_probabilities",
]


class CbnSet(enum.IntEnum):
    S1 = 0  # {S}
    S2 = 1  # {S, R1}
    S3 = 2  # {S, R2}
    S4 = 3  # {S, R1, R2}


class Broadcaster(enum.IntEnum):
    NONE = 0
    S = 1
    R1 = 2
    R2 = 3


# condition code 0 is "Others"; codes 1..11 are C1..C11
CONDITION_LABELS = ("Others",) + tuple(f"C{i}" for i in range(1, 12))
DELIVERING = frozenset({1, 5, 9, 10, 11})
CONSUMES_R1 = frozenset({5, 8, 10, 11})
CONSUMES_R2 = frozenset({9})

# broadcaster for each condition code
_BN = (Broadcaster.NONE, Broadcaster.S, Broadcaster.S, Broadcaster.S, Broadcaster.S,
       Broadcaster.R1, Broadcaster.S, Broadcaster.S, Broadcaster.R1, Broadcaster.R2,
       Broadcaster.R1, Broadcaster.R1)


@njit
def decide(cbn, sd, sr1, sr2, r1d, r1r2, r2d, e1, e2):
    """Fire one protocol row.

    Arguments are the CBN code (0..3), the six link-success flags
    (SNR >= threshold) and the energy flags ``e1 = B1 >= M1``,
    ``e2 = B2 >= M2``. Returns ``(condition_code, next_cbn)``.
    """
    if sd:
        return 1, 0
    if cbn == 0:
        if sr1 and not sr2:
            return 2, 1
        if sr2 and not sr1:
            return 3, 2
        if sr1 and sr2:
            return 4, 3
        return 0, 0
    if cbn == 1:
        if e1:
            if r1d:
                return 5, 0
            if sr2:
                return 6, 3
            if r1r2:
                return 8, 3
            return 0, 1
        if sr2:
            return 7, 3
        return 0, 1
    if cbn == 2:
        if e2 and r2d:
            return 9, 0
        return 0, 2
    # cbn == 3
    if e2 and r2d:
        return 9, 0
    if e1 and r1d:
        # C10 when R2 had energy but a bad R2-D link, C11 when R2 was empty
        if e2:
            return 10, 0
        return 11, 0
    return 0, 3


@dataclass(frozen=True)
class SlotSnrs:
    gamma_sd: float
    gamma_sr1: float
    gamma_sr2: float
    gamma_r1d: float
    gamma_r1r2: float
    gamma_r2d: float

    def __post_init__(self):
        if min(self.gamma_sd, self.gamma_sr1, self.gamma_sr2,
               self.gamma_r1d, self.gamma_r1r2, self.gamma_r2d) < 0:
            raise ValueError("SNRs must be nonnegative")


@dataclass(frozen=True)
class SlotDecision:
    bn: Broadcaster
    delivered: bool
    consume_r1: bool
    consume_r2: bool
    next_cbn: CbnSet
    fired_condition: str


def evaluate(cbn, snrs: SlotSnrs, b1: float, b2: float, m1: float, m2: float,
             gamma_th: float) -> SlotDecision:
    """Run one slot of the protocol table on concrete SNRs and buffer levels."""
    if b1 < 0 or b2 < 0:
        raise ValueError("buffer levels must be nonnegative")
    if not (m1 > 0 and m2 > 0):
        raise ValueError("transmit energies must be positive")
    g = gamma_th
    code, nxt = decide.py_func(
        int(cbn),
        snrs.gamma_sd >= g, snrs.gamma_sr1 >= g, snrs.gamma_sr2 >= g,
        snrs.gamma_r1d >= g, snrs.gamma_r1r2 >= g, snrs.gamma_r2d >= g,
        b1 >= m1, b2 >= m2,
    )
    return SlotDecision(
        bn=_BN[code],
        delivered=code in DELIVERING,
        consume_r1=code in CONSUMES_R1,
        consume_r2=code in CONSUMES_R2,
        next_cbn=CbnSet(nxt),
        fired_condition=CONDITION_LABELS[code],
    )


def condition_probabilities(links: LinkSet, pr_b1_ge: float, pr_b2_ge: float) -> dict:
    """Probability of every protocol row, per CBN state.

    SNR events and buffer-availability events are treated as independent.
    Returns ``{CbnSet: {label: probability}}`` where the labels present in
    each state are the rows of that state plus ``"Others"``.
    """
    for v in (pr_b1_ge, pr_b2_ge):
        if not (0.0 <= v <= 1.0):
            raise ValueError("buffer probabilities must lie in [0, 1]")
    g = links.gamma_th
    sd = math.exp(-links.omega_sd * g)
    sr1 = math.exp(-links.omega_sr1 * g)
    sr2 = math.exp(-links.omega_sr2 * g)
    r1d = math.exp(-links.omega_r1d * g)
    r1r2 = math.exp(-links.omega_r1r2 * g)
    r2d = math.exp(-links.omega_r2d * g)
    e1, e2 = pr_b1_ge, pr_b2_ge
    f = 1.0 - sd

    s1 = {
        "C1": sd,
        "C2": f * sr1 * (1 - sr2),
        "C3": f * (1 - sr1) * sr2,
        "C4": f * sr1 * sr2,
        "Others": f * (1 - sr1) * (1 - sr2),
    }
    s2 = {
        "C1": sd,
        "C5": f * e1 * r1d,
        "C6": f * e1 * (1 - r1d) * sr2,
        "C7": f * (1 - e1) * sr2,
        "C8": f * e1 * (1 - r1d) * (1 - sr2) * r1r2,
        "Others": f * (e1 * (1 - r1d) * (1 - sr2) * (1 - r1r2) + (1 - e1) * (1 - sr2)),
    }
    s3 = {
        "C1": sd,
        "C9": f * e2 * r2d,
        "Others": f * (1 - e2 * r2d),
    }
    s4 = {
        "C1": sd,
        "C9": f * e2 * r2d,
        "C10": f * e2 * (1 - r2d) * e1 * r1d,
        "C11": f * (1 - e2) * e1 * r1d,
        "Others": f * (1 - e2 * r2d) * (1 - e1 * r1d),
    }
    return {CbnSet.S1: s1, CbnSet.S2: s2, CbnSet.S3: s3, CbnSet.S4: s4}


def condition_matrix(table: dict) -> np.ndarray:
    """Pack :func:`condition_probabilities` output into a 4x12 array (state, code)."""
    out = np.zeros((4, 12))
    for state, row in table.items():
        for label, p in row.items():
            out[int(state), CONDITION_LABELS.index(label)] = p
    return out
