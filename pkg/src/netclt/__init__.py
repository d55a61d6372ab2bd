"""Simulation laboratory for joint asymptotic normality of standardized
sample means indexed by a double sequence (n1, n2)."""

from .models import (
    MarginalSpec,
    PairModel,
    Schedule,
    bounded_rademacher_pair,
    correlation_schedule,
    gaussian_iid_corr,
    gaussian_varying_schedule,
    independent_nongaussian,
    rademacher_product,
    sample_block,
)
from .netpath import NetPath, NetPoint, make_path, make_point
from .stats import ReplicationBatch, replicate, rho_bar, rho_star, v_weights

__version__ = "0.1.0"

__all__ = [
    "MarginalSpec",
    "PairModel",
    "Schedule",
    "bounded_rademacher_pair",
    "correlation_schedule",
    "gaussian_iid_corr",
    "gaussian_varying_schedule",
    "independent_nongaussian",
    "rademacher_product",
    "sample_block",
    "NetPath",
    "NetPoint",
    "make_path",
    "make_point",
    "ReplicationBatch",
    "replicate",
    "rho_bar",
    "rho_star",
    "v_weights",
]
