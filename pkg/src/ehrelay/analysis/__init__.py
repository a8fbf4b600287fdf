"""Closed-form steady-state analysis."""

from .lambertw import lambert_w0
from .pdf import LimitingPdf, characteristic_root, limiting_pdf, pr_buffer_available, \
    verify_stationarity_residual
from .performance import SteadyStateReport, optimal_rate, outage_probability, steady_state, \
    throughput, throughput_derivative
from .stm import StationaryDistribution, build_stm, stationary_distribution

__all__ = [
    "LimitingPdf",
    "StationaryDistribution",
    "SteadyStateReport",
    "build_stm",
    "characteristic_root",
    "lambert_w0",
    "limiting_pdf",
    "optimal_rate",
    "outage_probability",
    "pr_buffer_available",
    "stationary_distribution",
    "steady_state",
    "throughput",
    "throughput_derivative",
    "verify_stationarity_residual",
]
