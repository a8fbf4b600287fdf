"""Monte-Carlo execution of the network, slot by slot."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..analysis.stm import stability, stationary_distribution
from ..protocol import CONDITION_LABELS, CbnSet
from ..radio import NetworkConfig, derive_links
from .kernels import N_CODES, STATE_SIZE, run_slots

__all__ = [
    "SimStats",
    "run",
    "run_degenerate_check",
    "DegenerateCheck",
    "HIST_BINS_PER_M",
    "HIST_RANGE_M",
    "DEFAULT_WARMUP",
    "DEFAULT_BATCHES",
]

HIST_BINS_PER_M = 20
HIST_RANGE_M = 10
DEFAULT_WARMUP = 10_000
DEFAULT_BATCHES = 20
CHUNK = 1 << 16


def _batch_stderr(counts: np.ndarray, sizes: np.ndarray) -> float:
    means = counts / sizes
    if len(means) < 2:
        return math.nan
    return float(np.std(means, ddof=1) / math.sqrt(len(means)))


@dataclass
class SimStats:
    """Counters from one run; every rate is over the post-warmup slots only."""

    n_slots: int
    warmup: int
    eta: float
    r0: float
    m1: float
    m2: float
    batch_sizes: np.ndarray
    occupancy: np.ndarray  # (batches, 4) slots spent in each CBN set
    condition_counts: np.ndarray  # (4, 12) per state, per condition code
    delivered_batches: np.ndarray
    b1_ge_batches: np.ndarray
    b2_ge_batches: np.ndarray
    b1_sum_batches: np.ndarray
    b2_sum_batches: np.ndarray
    consume1_batches: np.ndarray
    consume2_batches: np.ndarray
    buffer1_hist: np.ndarray
    buffer2_hist: np.ndarray
    min_level1: float
    min_level2: float
    energy_joint: np.ndarray = field(default_factory=lambda: np.zeros((4, 4), dtype=np.int64))
    final_state: tuple = field(default=(0, 0.0, 0.0))

    @property
    def n_stat(self) -> int:
        return int(self.batch_sizes.sum())

    @property
    def cbn_freq(self) -> np.ndarray:
        return self.occupancy.sum(axis=0) / self.n_stat

    @property
    def cbn_stderr(self) -> np.ndarray:
        return np.array([_batch_stderr(self.occupancy[:, j], self.batch_sizes) for j in range(4)])

    @property
    def delivered(self) -> int:
        return int(self.delivered_batches.sum())

    @property
    def op_emp(self) -> float:
        return 1.0 - self.delivered / self.n_stat

    @property
    def op_stderr(self) -> float:
        return _batch_stderr(self.delivered_batches, self.batch_sizes)

    @property
    def throughput_emp(self) -> float:
        return self.eta * self.r0 * (1.0 - self.op_emp)

    @property
    def throughput_stderr(self) -> float:
        return self.eta * self.r0 * self.op_stderr

    @property
    def pr_b1_ge_emp(self) -> float:
        return float(self.b1_ge_batches.sum()) / self.n_stat

    @property
    def pr_b2_ge_emp(self) -> float:
        return float(self.b2_ge_batches.sum()) / self.n_stat

    @property
    def pr_b1_ge_stderr(self) -> float:
        return _batch_stderr(self.b1_ge_batches, self.batch_sizes)

    @property
    def pr_b2_ge_stderr(self) -> float:
        return _batch_stderr(self.b2_ge_batches, self.batch_sizes)

    def condition_freq(self) -> np.ndarray:
        """Conditional frequency of each condition code given the CBN state, shape (4, 12)."""
        tot = self.condition_counts.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(tot > 0, self.condition_counts / np.maximum(tot, 1), np.nan)

    def energy_given_state(self) -> np.ndarray:
        """Empirical Pr{(B1 >= M1, B2 >= M2) = (e1, e2) | CBN state}, shape (4, 4).

        Column ``2*e1 + e2``; rows for states never visited are NaN.
        """
        tot = self.energy_joint.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(tot > 0, self.energy_joint / np.maximum(tot, 1), np.nan)

    def condition_table(self) -> dict:
        return {
            CbnSet(s): {CONDITION_LABELS[c]: int(self.condition_counts[s, c]) for c in range(N_CODES)}
            for s in range(4)
        }

    def hist_edges(self, relay: int) -> np.ndarray:
        m = self.m1 if relay == 1 else self.m2
        w = m / HIST_BINS_PER_M
        return np.arange(HIST_BINS_PER_M * HIST_RANGE_M + 1) * w

    def density(self, relay: int) -> tuple[np.ndarray, np.ndarray]:
        """Bin centres and empirical density of the post-slot buffer level over [0, 10M).

        Mass above 10M sits in the overflow bucket and is not part of the
        returned density.
        """
        hist = self.buffer1_hist if relay == 1 else self.buffer2_hist
        edges = self.hist_edges(relay)
        w = edges[1] - edges[0]
        dens = hist[:-1] / (self.n_stat * w)
        return 0.5 * (edges[:-1] + edges[1:]), dens


def _draw_chunk(rng, n, omegas, gamma_th, lam1, lam2):
    e = rng.standard_exponential((n, 8))
    with np.errstate(divide="ignore"):
        snr = e[:, :6] / omegas
    ok = snr >= gamma_th
    harvest = np.empty((n, 2))
    harvest[:, 0] = e[:, 6] / lam1
    harvest[:, 1] = e[:, 7] / lam2
    return ok, harvest


def run(config: NetworkConfig, seed: int = 42, n_slots: int = 1_000_000,
        warmup: int = DEFAULT_WARMUP, *, batches: int = DEFAULT_BATCHES,
        backend: str | None = None) -> SimStats:
    """Simulate ``n_slots`` slots (the first ``warmup`` of them discarded from statistics).

    Each slot draws six link SNRs and two harvests, applies the protocol
    table, then updates both buffers (harvest is added in every slot, the
    transmit energy only when the relay broadcast). Buffers start empty in
    CBN set s1. The result depends only on ``(config, seed, n_slots,
    warmup, batches)``.
    """
    n_slots, warmup = int(n_slots), int(warmup)
    if not (n_slots > warmup >= 0):
        raise ValueError("need n_slots > warmup >= 0")
    n_stat = n_slots - warmup
    batches = max(1, min(int(batches), n_stat))
    links = derive_links(config)
    omegas = links.omegas()
    rng = np.random.default_rng(seed)

    nb = HIST_BINS_PER_M * HIST_RANGE_M
    occ = np.zeros((batches, 4), dtype=np.int64)
    cond = np.zeros((4, N_CODES), dtype=np.int64)
    counters = {name: np.zeros(batches, dtype=np.int64)
                for name in ("deliv", "ge1", "ge2", "cons1", "cons2")}
    bsum1 = np.zeros(batches)
    bsum2 = np.zeros(batches)
    hist1 = np.zeros(nb + 1, dtype=np.int64)
    hist2 = np.zeros(nb + 1, dtype=np.int64)
    joint = np.zeros((4, 4), dtype=np.int64)
    state = np.zeros(STATE_SIZE)
    bin1 = config.m1 / HIST_BINS_PER_M
    bin2 = config.m2 / HIST_BINS_PER_M

    start = 0
    while start < n_slots:
        n = min(CHUNK, n_slots - start)
        ok, harvest = _draw_chunk(rng, n, omegas, links.gamma_th, config.lambda1, config.lambda2)
        j = np.arange(start, start + n, dtype=np.int64) - warmup
        batch = np.where(j >= 0, (j * batches) // n_stat, -1).astype(np.int64)
        run_slots(backend, ok, harvest, batch, state, config.m1, config.m2, bin1, bin2,
                  occ, cond, counters["deliv"], counters["ge1"], counters["ge2"],
                  bsum1, bsum2, counters["cons1"], counters["cons2"], hist1, hist2, joint)
        start += n

    idx = np.arange(n_stat, dtype=np.int64)
    sizes = np.bincount((idx * batches) // n_stat, minlength=batches)
    return SimStats(
        n_slots=n_slots,
        warmup=warmup,
        eta=config.eta,
        r0=config.r0,
        m1=config.m1,
        m2=config.m2,
        batch_sizes=sizes,
        occupancy=occ,
        condition_counts=cond,
        delivered_batches=counters["deliv"],
        b1_ge_batches=counters["ge1"],
        b2_ge_batches=counters["ge2"],
        b1_sum_batches=bsum1,
        b2_sum_batches=bsum2,
        consume1_batches=counters["cons1"],
        consume2_batches=counters["cons2"],
        buffer1_hist=hist1,
        buffer2_hist=hist2,
        min_level1=float(state[3]),
        min_level2=float(state[4]),
        energy_joint=joint,
        final_state=(int(state[0]), float(state[1]), float(state[2])),
    )


@dataclass(frozen=True)
class DegenerateCheck:
    psi2: float
    last_quintile_available: float
    quintile_mean_level: np.ndarray
    quintile_available: np.ndarray


def run_degenerate_check(config: NetworkConfig, seed: int = 42, n_slots: int = 1_000_000,
                         *, backend: str | None = None) -> DegenerateCheck:
    """Simulate an R2-unstable configuration and report how often R2 could transmit late in the run.

    The analytical consumption probability is evaluated at the CBN
    distribution with R2 always charged (the regime the run should settle
    into); configurations with psi2 > 1 are rejected.
    """
    links = derive_links(config)
    sd = stationary_distribution(links, config.lambda1, config.lambda2, config.m1, config.m2,
                                 saturate=True)
    _, psi2, _, _ = stability(links, sd.p, config.lambda1, config.lambda2, config.m1, config.m2)
    if psi2 > 1.0:
        raise ValueError(f"configuration is R2-stable (psi2 = {psi2:.4g}); expected psi2 <= 1")
    stats = run(config, seed=seed, n_slots=n_slots, warmup=0, batches=5, backend=backend)
    avail = stats.b2_ge_batches / stats.batch_sizes
    means = stats.b2_sum_batches / stats.batch_sizes
    return DegenerateCheck(psi2=psi2, last_quintile_available=float(avail[-1]),
                           quintile_mean_level=means, quintile_available=avail)
