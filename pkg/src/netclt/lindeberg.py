"""Lindeberg functionals of the projected summands W_j = s xi_1j + t xi_2j.

For a direction (s, t) and index k,

    L_k(eps)          = sum_{j<=k} E[W_j**2 / (k tau_k) ; |W_j| > eps sqrt(k tau_k)]
    scriptL_k(eps)    = sum_{j<=k} E[W_j**2 / k       ; |W_j| > eps sqrt(k)]

with tau_k = s**2 + 2 s t rho_bar_k + t**2 the variance of the diagonal
projection.  Expectations are evaluated

* exactly for finitely supported W_j (bounded sign pairs, sign marginals);
  with int/Fraction inputs the result is an exact Fraction, since the
  truncation event is decided on squares;
* by adaptive quadrature when W_j is normal or a mixture of normals, or a
  scaled single marginal with a density;
* by Monte Carlo otherwise, with a reported standard error.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np
from scipy import integrate

from .models import PairModel, Schedule, standardized_block, child_seed

__all__ = [
    "ProjectionSpec",
    "LindebergReport",
    "DegenerateProjectionError",
    "tau_quadratic",
    "tau_k",
    "lindeberg_L",
    "lindeberg_L_mc",
    "script_L",
    "max_share_bound",
    "normal_tail_second_moment",
]

logger = logging.getLogger(__name__)

_QUAD_OPTS = dict(epsabs=1e-300, epsrel=1e-11, limit=200)
MC_DRAWS = 400_000
MC_SEED = 20240229


class DegenerateProjectionError(ValueError):
    """tau_k = 0: the normalized functional is undefined at this k."""


@dataclass(frozen=True)
class ProjectionSpec:
    s: float = 1.0
    t: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.s) and math.isfinite(self.t)):
            raise ValueError("projection direction must be finite")

    def __add__(self, other: "ProjectionSpec") -> "ProjectionSpec":
        return ProjectionSpec(self.s + other.s, self.t + other.t)

    def scaled(self, gamma) -> "ProjectionSpec":
        return ProjectionSpec(gamma * self.s, gamma * self.t)


@dataclass(frozen=True)
class LindebergReport:
    k: int
    epsilon: float
    tau_k: float
    L_k: float
    script_L: float
    a_k_sq: float
    bound_check: bool
    degenerate: bool = False


def tau_quadratic(s, t, rho):
    """s**2 + 2 s t rho + t**2."""
    if abs(rho) > 1:
        raise ValueError(f"|rho| must be <= 1, got {rho!r}")
    return s * s + 2 * s * t * rho + t * t


def tau_k(model: PairModel, k: int, s, t):
    """Variance of <(s, t), Y> at the diagonal point (k, k)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return tau_quadratic(s, t, model.schedule.cesaro_mean(k))


def normal_tail_second_moment(variance: float, c2: float) -> float:
    """E[W**2 ; W**2 > c2] for W ~ N(0, variance), by adaptive quadrature."""
    if variance <= 0:
        return 0.0
    z0 = math.sqrt(c2 / variance) if c2 > 0 else 0.0
    if z0 > 40:
        return 0.0
    val, _ = integrate.quad(lambda z: z * z * math.exp(-0.5 * z * z), z0, math.inf, **_QUAD_OPTS)
    return variance * 2.0 * val / math.sqrt(2.0 * math.pi)


def _density_tail_second_moment(family: str, scale: float, c2: float) -> float:
    """E[(scale xi)**2 ; (scale xi)**2 > c2] for a standardized density family."""
    if scale == 0:
        return 0.0
    if family == "gaussian":
        return normal_tail_second_moment(scale * scale, c2)
    a = math.sqrt(c2) / abs(scale) if c2 > 0 else 0.0
    if family == "exponential":
        # xi = E - 1 on [-1, inf) with density exp(-(x + 1))
        f = lambda x: x * x * math.exp(-(x + 1.0))
        upper, _ = integrate.quad(f, a, math.inf, **_QUAD_OPTS)
        lower = integrate.quad(f, -1.0, -a, **_QUAD_OPTS)[0] if a < 1 else 0.0
        return scale * scale * (upper + lower)
    if family == "uniform":
        r = math.sqrt(3.0)
        if a >= r:
            return 0.0
        val, _ = integrate.quad(lambda x: x * x / (2 * r), a, r, **_QUAD_OPTS)
        return scale * scale * 2.0 * val
    raise ValueError(f"no density for family {family!r}")


def _components(model: PairModel, rho, s, t):
    """Law of W = s xi1 + t xi2 at one index as a list of components.

    Components are ("atom", prob, value), ("normal", prob, variance) or
    ("density", prob, family, scale); None when no exact route applies.
    """
    v = model.variant
    if model.is_gaussian:
        return [("normal", 1, s * s + 2 * s * t * rho + t * t)]
    if v == "rademacher_product":
        return [("normal", Fraction(1, 2), (s + t) ** 2), ("normal", Fraction(1, 2), (s - t) ** 2)]
    if v == "bounded_rademacher_pair":
        if isinstance(rho, float):
            agree, split = (1.0 + rho) / 4.0, (1.0 - rho) / 4.0
        else:
            agree, split = Fraction(1 + rho) / 4, Fraction(1 - rho) / 4
        return [("atom", agree, s + t), ("atom", agree, -(s + t)), ("atom", split, s - t), ("atom", split, -(s - t))]
    # independent coordinates: exact only when one coefficient vanishes
    active = [(m, c) for m, c in zip(model.marginals, (s, t)) if c != 0]
    if not active:
        return [("atom", 1, 0)]
    if len(active) == 2:
        return None
    m, c = active[0]
    if m.family == "rademacher":
        return [("atom", Fraction(1, 2), c), ("atom", Fraction(1, 2), -c)]
    return [("density", 1, m.family, c)]


def _component_moment(comp, c2):
    kind = comp[0]
    if kind == "atom":
        _, p, w = comp
        return p * w * w if w * w > c2 else 0 * p
    if kind == "normal":
        _, p, var = comp
        return float(p) * normal_tail_second_moment(float(var), float(c2))
    _, p, family, scale = comp
    return float(p) * _density_tail_second_moment(family, float(scale), float(c2))


def _truncated_sum(model: PairModel, s, t, k: int, c2):
    """sum_{j<=k} E[W_j**2 ; W_j**2 > c2], or None when no exact route exists."""
    total = 0
    for rho, count in model.schedule.distinct(k):
        comps = _components(model, rho, s, t)
        if comps is None:
            return None
        total += count * sum(_component_moment(c, c2) for c in comps)
    return total


def lindeberg_L_mc(model: PairModel, spec: ProjectionSpec, k: int, epsilon, draws: int = MC_DRAWS, seed=MC_SEED):
    """Monte Carlo estimate of L_k(eps) and its standard error.

    Summands with equal rho_jj share one batch of draws.
    """
    tk = float(tau_k(model, k, spec.s, spec.t))
    if tk <= 0:
        raise DegenerateProjectionError(f"tau_k = 0 at k = {k} for direction ({spec.s}, {spec.t})")
    c2 = float(epsilon) ** 2 * k * tk
    groups = model.schedule.distinct(k)
    if len(groups) > 64:
        raise ValueError("Monte Carlo evaluation supports at most 64 distinct correlations")
    est = 0.0
    var = 0.0
    for g, (rho, count) in enumerate(groups):
        sub = model if model.is_iid else replace(
            model, variant="gaussian_iid_corr", schedule=Schedule("constant", rho))
        xi = standardized_block(sub, draws, child_seed(seed, g))
        w = float(spec.s) * xi[:, 0] + float(spec.t) * xi[:, 1]
        h = np.where(w * w > c2, w * w, 0.0)
        est += count * h.mean()
        var += count**2 * h.var(ddof=1) / draws
    norm = k * tk
    return est / norm, math.sqrt(var) / norm


def lindeberg_L(model: PairModel, spec: ProjectionSpec, k: int, epsilon):
    """L_k(eps) for the direction ``spec``.

    Raises :class:`DegenerateProjectionError` when tau_k = 0.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    tk = tau_k(model, k, spec.s, spec.t)
    if tk <= 0:
        raise DegenerateProjectionError(f"tau_k = 0 at k = {k} for direction ({spec.s}, {spec.t})")
    if math.isinf(epsilon):
        return 0.0
    c2 = epsilon * epsilon * k * tk
    total = _truncated_sum(model, spec.s, spec.t, k, c2)
    if total is None:
        est, se = lindeberg_L_mc(model, spec, k, epsilon)
        logger.info("L_k by Monte Carlo: %.6g +/- %.2g", est, se)
        return est
    return total / (k * tk)


def script_L(model: PairModel, spec: ProjectionSpec, k: int, epsilon):
    """Unnormalized functional sum_j E[W_j**2 / k ; |W_j| > eps sqrt(k)]."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if math.isinf(epsilon):
        return 0.0
    total = _truncated_sum(model, spec.s, spec.t, k, epsilon * epsilon * k)
    if total is None:
        tk = float(tau_k(model, k, spec.s, spec.t))
        if tk <= 0:
            return 0.0
        est, _ = lindeberg_L_mc(model, spec, k, epsilon / math.sqrt(tk))
        return est * tk
    return total / k


def _max_summand_variance(model: PairModel, s, t, k: int):
    return max(tau_quadratic(s, t, rho) for rho, _ in model.schedule.distinct(k))


def max_share_bound(model: PairModel, spec: ProjectionSpec, k: int, epsilon) -> LindebergReport:
    """Largest normalized summand variance a_k**2 against eps**2 + L_k(eps).

    A vanishing tau_k yields a report flagged ``degenerate`` instead of an
    exception.
    """
    tk = tau_k(model, k, spec.s, spec.t)
    if tk <= 0:
        nan = float("nan")
        return LindebergReport(k, epsilon, 0.0, nan, float(script_L(model, spec, k, epsilon)), nan, False, True)
    a2 = _max_summand_variance(model, spec.s, spec.t, k) / (k * tk)
    lk = lindeberg_L(model, spec, k, epsilon)
    return LindebergReport(
        k=k,
        epsilon=epsilon,
        tau_k=tk,
        L_k=lk,
        script_L=script_L(model, spec, k, epsilon),
        a_k_sq=a2,
        bound_check=bool(a2 <= epsilon * epsilon + lk),
    )
