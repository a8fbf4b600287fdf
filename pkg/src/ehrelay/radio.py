"""Geometry, link parameters and Rayleigh-fading SNR draws for the S-R1-R2-D network."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "NodeLayout",
    "NetworkConfig",
    "LinkSet",
    "LINK_NAMES",
    "dbm_to_mw",
    "db_to_linear",
    "derive_links",
    "sample_snr",
    "snr_from_uniform",
    "p_link_success",
]

LINK_NAMES = ("sd", "sr1", "sr2", "r1d", "r1r2", "r2d")


def dbm_to_mw(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class NodeLayout:
    s_pos: tuple[float, float] = (0.0, 0.0)
    r1_pos: tuple[float, float] = (30.0, 20.0)
    r2_pos: tuple[float, float] = (60.0, -20.0)
    d_pos: tuple[float, float] = (100.0, 0.0)

    def __post_init__(self):
        pts = {"S": self.s_pos, "R1": self.r1_pos, "R2": self.r2_pos, "D": self.d_pos}
        names = list(pts)
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                if math.dist(pts[a], pts[b]) <= 0.0:
                    raise ValueError(f"nodes {a} and {b} coincide")

    def distances(self) -> dict[str, float]:
        """Pairwise distances in meters, keyed by link name."""
        s, r1, r2, d = self.s_pos, self.r1_pos, self.r2_pos, self.d_pos
        return {
            "sd": math.dist(s, d),
            "sr1": math.dist(s, r1),
            "sr2": math.dist(s, r2),
            "r1d": math.dist(r1, d),
            "r1r2": math.dist(r1, r2),
            "r2d": math.dist(r2, d),
        }


@dataclass(frozen=True)
class NetworkConfig:
    """Linear-unit parameterization of the network.

    Powers are in mW and relay energies in mJ; with 1 s slots a relay
    transmitting at ``m1`` mW spends ``m1`` mJ per slot. ``lambda1`` and
    ``lambda2`` are the rates (1/mJ) of the exponential per-slot harvest.
    """

    layout: NodeLayout
    p_s: float
    m1: float
    m2: float
    lambda1: float
    lambda2: float
    n0: float
    alpha: float
    r0: float
    eta: float

    def __post_init__(self):
        for name in ("p_s", "m1", "m2", "lambda1", "lambda2", "n0", "alpha", "r0"):
            v = getattr(self, name)
            if not (v > 0):
                raise ValueError(f"{name} must be > 0, got {v!r}")
        if not (0 < self.eta <= 1):
            raise ValueError(f"eta must lie in (0, 1], got {self.eta!r}")

    @classmethod
    def from_db(
        cls,
        p_s_dbm: float,
        m1: float,
        m2: float,
        inv_lambda1_db: float,
        inv_lambda2_db: float,
        r0: float,
        *,
        layout: NodeLayout | None = None,
        n0_dbm: float = -50.0,
        alpha: float = 3.0,
        eta: float = 0.05,
    ) -> "NetworkConfig":
        """Build a config from the dB/dBm quantities used in experiment captions.

        Mean harvests given in dB are read relative to 1 mJ.
        """
        return cls(
            layout=layout or NodeLayout(),
            p_s=dbm_to_mw(p_s_dbm),
            m1=float(m1),
            m2=float(m2),
            lambda1=1.0 / db_to_linear(inv_lambda1_db),
            lambda2=1.0 / db_to_linear(inv_lambda2_db),
            n0=dbm_to_mw(n0_dbm),
            alpha=float(alpha),
            r0=float(r0),
            eta=float(eta),
        )

    def replace(self, **changes) -> "NetworkConfig":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class LinkSet:
    """Exponential SNR rates (SNR ~ Exp(rate=omega)) and the decoding threshold."""

    omega_sd: float
    omega_sr1: float
    omega_sr2: float
    omega_r1d: float
    omega_r1r2: float
    omega_r2d: float
    gamma_th: float

    def __post_init__(self):
        for name in LINK_NAMES:
            if not (getattr(self, "omega_" + name) > 0):
                raise ValueError(f"omega_{name} must be > 0")
        if self.gamma_th < 0:
            raise ValueError("gamma_th must be >= 0")

    def omegas(self) -> np.ndarray:
        """Rates in ``LINK_NAMES`` order."""
        return np.array([getattr(self, "omega_" + n) for n in LINK_NAMES])

    def success(self) -> dict[str, float]:
        """Per-link success probability e^(-omega * gamma_th)."""
        return {n: p_link_success(getattr(self, "omega_" + n), self.gamma_th) for n in LINK_NAMES}

    def with_rate(self, r0: float) -> "LinkSet":
        from dataclasses import replace

        return replace(self, gamma_th=2.0**r0 - 1.0)


def derive_links(config: NetworkConfig) -> LinkSet:
    """Per-link omega = d^alpha * N0 / P_tx; relay links use the relay energy as power."""
    d = config.layout.distances()
    a, n0 = config.alpha, config.n0
    tx = {"sd": config.p_s, "sr1": config.p_s, "sr2": config.p_s,
          "r1d": config.m1, "r1r2": config.m1, "r2d": config.m2}
    om = {name: d[name] ** a * n0 / tx[name] for name in LINK_NAMES}
    return LinkSet(
        omega_sd=om["sd"],
        omega_sr1=om["sr1"],
        omega_sr2=om["sr2"],
        omega_r1d=om["r1d"],
        omega_r1r2=om["r1r2"],
        omega_r2d=om["r2d"],
        gamma_th=2.0**config.r0 - 1.0,
    )


def sample_snr(omega, rng: np.random.Generator, size=None):
    """Draw instantaneous SNR(s) from Exp(rate=omega)."""
    return rng.standard_exponential(size) / omega


def snr_from_uniform(omega, u):
    """Inverse-CDF map of a uniform draw ``u`` in [0, 1) to an Exp(rate=omega) SNR."""
    u = np.asarray(u, dtype=float)
    if np.any((u < 0) | (u >= 1)):
        raise ValueError("u must lie in [0, 1)")
    out = -np.log1p(-u) / omega
    return out if out.ndim else float(out)


def p_link_success(omega: float, gamma_th: float) -> float:
    return math.exp(-omega * gamma_th)
