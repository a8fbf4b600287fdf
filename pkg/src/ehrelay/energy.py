"""Harvest-store-use energy buffer of an EH relay (infinite capacity, lossless)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["EnergyBuffer", "sample_harvest", "update"]


@dataclass(frozen=True)
class EnergyBuffer:
    level: float = 0.0

    def __post_init__(self):
        if self.level < 0:
            raise ValueError(f"buffer level must be >= 0, got {self.level!r}")

    def can_transmit(self, m: float) -> bool:
        return self.level >= m


def sample_harvest(lam: float, rng: np.random.Generator, size=None):
    """Per-slot harvested energy (mJ), exponential with mean ``1/lam``."""
    if not lam > 0:
        raise ValueError("harvest rate must be > 0")
    return rng.standard_exponential(size) / lam


def update(buffer: EnergyBuffer, consumed: bool, m: float, harvest: float) -> EnergyBuffer:
    """Advance one slot: spend ``m`` if the relay transmitted, then add this slot's harvest."""
    if harvest < 0:
        raise ValueError("harvest must be nonnegative")
    if consumed:
        if buffer.level < m:
            raise ValueError(
                f"relay asked to spend {m} mJ with only {buffer.level} mJ stored"
            )
        return EnergyBuffer(buffer.level - m + harvest)
    return EnergyBuffer(buffer.level + harvest)
