"""Slot-level Monte-Carlo simulation."""

from .engine import DegenerateCheck, SimStats, run, run_degenerate_check

__all__ = ["DegenerateCheck", "SimStats", "run", "run_degenerate_check"]
