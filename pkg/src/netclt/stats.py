"""Statistics of a realized double sample.

All standardizations use the true model constants (mu_i, sigma_i).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .models import PairModel, SeedLike, child_seed, make_generator, sample_block, sample_standardized_sums
from .netpath import NetPoint

__all__ = [
    "PairStat",
    "ReplicationBatch",
    "standardized_mean",
    "rho_bar",
    "rho_bar_diagonal",
    "v_weights",
    "w_hat",
    "u_hat",
    "rho_star",
    "cross_weight",
    "w_hat_second_moment",
    "u_hat_second_moment",
    "replicate",
]

CHUNK = 2048


@dataclass(frozen=True)
class PairStat:
    y1: float
    y2: float
    w_hat: float
    u_hat: float


@dataclass(frozen=True, eq=False)
class ReplicationBatch:
    """R independent realizations of (Y1, Y2, W_hat, U_hat) at one point."""

    point: NetPoint
    y1: np.ndarray
    y2: np.ndarray
    w_hat: np.ndarray
    u_hat: np.ndarray
    seed: SeedLike
    model_id: str
    sigma: tuple = (1.0, 1.0)

    def __post_init__(self):
        sizes = {len(self.y1), len(self.y2), len(self.w_hat), len(self.u_hat)}
        if len(sizes) != 1 or not len(self.y1):
            raise ValueError("a batch needs R >= 1 records of equal length")

    def __len__(self):
        return len(self.y1)

    def __iter__(self) -> Iterator[PairStat]:
        for a, b, w, u in zip(self.y1, self.y2, self.w_hat, self.u_hat):
            yield PairStat(float(a), float(b), float(w), float(u))

    @property
    def stats(self) -> list[PairStat]:
        return list(self)

    @property
    def samples(self) -> np.ndarray:
        """The (Y1, Y2) realizations as an ``(R, 2)`` array."""
        return np.column_stack([self.y1, self.y2])

    def correlation(self) -> float:
        return float(np.corrcoef(self.y1, self.y2)[0, 1])

    def covariance(self) -> float:
        return float(np.mean(self.y1 * self.y2) - np.mean(self.y1) * np.mean(self.y2))


def standardized_mean(sample, mu: float, sigma: float) -> float:
    """sqrt(n) * (mean(sample) - mu) / sigma."""
    x = np.asarray(sample, dtype=float)
    if x.size == 0:
        raise ValueError("sample must be nonempty")
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    return float(math.sqrt(x.size) * (x.mean() - mu) / sigma)


def rho_bar(model: PairModel, point: NetPoint):
    """Cesaro-type average of correlations: sum_{j <= n_min} rho_jj / m_geom."""
    return model.schedule.partial_sum(point.n_min) / point.m_geom


def rho_bar_diagonal(model: PairModel, k: int):
    """rho_bar at the diagonal point (k, k); exact for constant schedules."""
    return model.schedule.cesaro_mean(k)


def v_weights(sigma1: float, sigma2: float, e: float) -> tuple[float, float]:
    """Weights (v1, v2) with W_hat = v1*Y1 - v2*Y2 and v1**2 + v2**2 = 1.

    ``e = inf`` and ``e = 0`` give the limiting weights (0, 1) and (1, 0).
    """
    if not (sigma1 > 0 and sigma2 > 0):
        raise ValueError("sigmas must be positive")
    if not e > 0:
        raise ValueError(f"size ratio e must be positive, got {e!r}")
    if math.isinf(e):
        return 0.0, 1.0
    v1 = sigma1 / math.sqrt(sigma1**2 + e * sigma2**2)
    v2 = sigma2 / math.sqrt(sigma1**2 / e + sigma2**2)
    return v1, v2


def _pooled_scale(sigma1, sigma2, point: NetPoint) -> float:
    scale = math.sqrt(sigma1**2 / point.n1 + sigma2**2 / point.n2)
    if not scale > 0:
        raise ValueError("degenerate denominator")
    return scale


def w_hat(x1bar, x2bar, mu, sigma, point: NetPoint):
    """((x1bar - mu1) - (x2bar - mu2)) / sqrt(sigma1**2/n1 + sigma2**2/n2).

    ``x1bar`` and ``x2bar`` may be arrays of replicated sample means.
    """
    scale = _pooled_scale(sigma[0], sigma[1], point)
    return ((np.asarray(x1bar) - mu[0]) - (np.asarray(x2bar) - mu[1])) / scale


def u_hat(x1bar, x2bar, mu, sigma, point: NetPoint):
    """Same as :func:`w_hat` with the two centered means added."""
    scale = _pooled_scale(sigma[0], sigma[1], point)
    return ((np.asarray(x1bar) - mu[0]) + (np.asarray(x2bar) - mu[1])) / scale


def rho_star(rho: float, sigma1: float, sigma2: float) -> float:
    """2 sigma1 sigma2 rho / (sigma1**2 + sigma2**2)."""
    return 2.0 * sigma1 * sigma2 * rho / (sigma1**2 + sigma2**2)


def cross_weight(sigma1: float, sigma2: float, e: float) -> float:
    """2 sigma1 sigma2 sqrt(e) / (sigma1**2 + e sigma2**2) = 2 v1 v2.

    Multiplies rho_bar in the second moments of W_hat and U_hat; at e = 1 it
    turns rho into rho_star.
    """
    if math.isinf(e) or e == 0:
        return 0.0
    return 2.0 * sigma1 * sigma2 * math.sqrt(e) / (sigma1**2 + e * sigma2**2)


def w_hat_second_moment(sigma1, sigma2, e, rbar) -> float:
    return 1.0 - cross_weight(sigma1, sigma2, e) * rbar


def u_hat_second_moment(sigma1, sigma2, e, rbar) -> float:
    return 1.0 + cross_weight(sigma1, sigma2, e) * rbar


def _chunk_sums(model: PairModel, point: NetPoint, size: int, seed, index: int):
    rng = make_generator(seed, index)
    return sample_standardized_sums(model, point.n1, point.n2, size, rng)


def _direct_sums(model: PairModel, point: NetPoint, R: int, seed):
    n = point.n_max
    s1 = np.empty(R)
    s2 = np.empty(R)
    m1, m2 = model.marginals
    for r in range(R):
        block = sample_block(model, n, child_seed(seed, r))
        s1[r] = ((block[: point.n1, 0] - m1.mu) / m1.sigma).sum()
        s2[r] = ((block[: point.n2, 1] - m2.mu) / m2.sigma).sum()
    return s1, s2


def replicate(
    model: PairModel,
    point: NetPoint,
    R: int,
    seed: SeedLike,
    *,
    method: str = "aggregate",
    workers: int = 1,
) -> ReplicationBatch:
    """Draw R independent copies of the point's statistics.

    ``method="direct"`` materializes every sample with :func:`sample_block`
    (replication r uses sub-stream ``r``).  ``method="aggregate"`` draws the
    partial sums from their exact joint law in chunks of fixed size
    (chunk c uses sub-stream ``c``), which keeps the cost independent of the
    sample sizes.  Either way the output depends only on the seed, never on
    ``workers``.
    """
    if R < 1:
        raise ValueError("R must be >= 1")
    if method == "direct":
        s1, s2 = _direct_sums(model, point, R, seed)
    elif method == "aggregate":
        sizes = [min(CHUNK, R - start) for start in range(0, R, CHUNK)]
        jobs = [(model, point, size, seed, i) for i, size in enumerate(sizes)]
        if workers > 1 and len(jobs) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(lambda a: _chunk_sums(*a), jobs))
        else:
            parts = [_chunk_sums(*a) for a in jobs]
        s1 = np.concatenate([p[0] for p in parts])
        s2 = np.concatenate([p[1] for p in parts])
    else:
        raise ValueError(f"unknown replication method {method!r}")

    m1, m2 = model.marginals
    mu = (m1.mu, m2.mu)
    sigma = (m1.sigma, m2.sigma)
    x1bar = m1.mu + m1.sigma * s1 / point.n1
    x2bar = m2.mu + m2.sigma * s2 / point.n2
    y1 = math.sqrt(point.n1) * (x1bar - m1.mu) / m1.sigma
    y2 = math.sqrt(point.n2) * (x2bar - m2.mu) / m2.sigma
    return ReplicationBatch(
        point=point,
        y1=y1,
        y2=y2,
        w_hat=w_hat(x1bar, x2bar, mu, sigma, point),
        u_hat=u_hat(x1bar, x2bar, mu, sigma, point),
        seed=seed,
        model_id=model.label,
        sigma=sigma,
    )
