"""Distances between a replication batch and its candidate limit laws.

Weak convergence has no single canonical metric; a batch is scored on three
surrogates: the sup distance of its empirical CF on a grid, Kolmogorov
statistics of the two projections W_hat and U_hat, and a two-sample energy
statistic with a permutation threshold.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import ndtr

from .charfn import CfGrid, EmpiricalCf, cf_psi_rho, empirical_cf
from .models import SeedLike, make_generator
from .stats import ReplicationBatch, cross_weight

__all__ = [
    "Thresholds",
    "EnergyTest",
    "ConvergenceReport",
    "cf_sup_distance",
    "ks_statistic",
    "energy_statistic",
    "energy_distance",
    "energy_test",
    "bivariate_normal_sample",
    "assess",
]

_BLOCK = 1000


@dataclass(frozen=True)
class Thresholds:
    cf_sup: float = 0.03
    ks_coef: float = 1.63
    energy_quantile: float = 0.99
    permutations: int = 200
    energy_max_points: int = 5000

    def ks_limit(self, R: int) -> float:
        return self.ks_coef / math.sqrt(R)


def cf_sup_distance(emp: EmpiricalCf, rho: float) -> float:
    """max over the grid of |empirical CF - CF of the correlated normal law|."""
    pts = emp.grid.points
    target = cf_psi_rho(pts[:, 0], pts[:, 1], rho)
    return float(np.max(np.abs(emp.values - target)))


def ks_statistic(values, theta: float) -> float:
    """sup_x |F_n(x) - P(N(0, theta) <= x)|.

    ``theta = 0`` compares with the point mass at 0.
    """
    x = np.sort(np.asarray(values, dtype=float))
    if x.size == 0:
        raise ValueError("values must be nonempty")
    if not np.all(np.isfinite(x)):
        raise ValueError("values must be finite")
    if theta < 0:
        raise ValueError("theta must be nonnegative")
    n = x.size
    if theta == 0:
        return float(max(np.count_nonzero(x < 0), np.count_nonzero(x > 0)) / n)
    cdf = ndtr(x / math.sqrt(theta))
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - cdf), np.max(cdf - (i - 1) / n)))


def bivariate_normal_sample(size: int, rho: float, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((size, 2))
    return np.column_stack([z[:, 0], rho * z[:, 0] + math.sqrt(max(1.0 - rho * rho, 0.0)) * z[:, 1]])


def _pooled_distance_products(pooled: np.ndarray, labels: np.ndarray):
    """D @ labels and row sums of D for the pooled Euclidean distance matrix D."""
    N = len(pooled)
    prod = np.zeros((N, labels.shape[1]))
    rowsum = np.zeros(N)
    for start in range(0, N, _BLOCK):
        d = cdist(pooled[start:start + _BLOCK], pooled)
        prod[start:start + _BLOCK] = d @ labels
        rowsum[start:start + _BLOCK] = d.sum(axis=1)
    return prod, rowsum


def _energy_from_products(prod, rowsum, labels, n, m):
    # labels column z marks the first sample: S_xx = z'Dz, S_x. = z'D1
    s_xx = np.einsum("ij,ij->j", labels, prod)
    s_x_all = prod.sum(axis=0)
    total = rowsum.sum()
    s_xy = s_x_all - s_xx
    s_yy = total - 2.0 * s_x_all + s_xx
    return 2.0 * s_xy / (n * m) - s_xx / n**2 - s_yy / m**2


def _mean_distance(a: np.ndarray, b: np.ndarray) -> float:
    total = 0.0
    for start in range(0, len(a), _BLOCK):
        total += cdist(a[start:start + _BLOCK], b).sum()
    return total / (len(a) * len(b))


def energy_statistic(x, y) -> float:
    """Two-sample energy distance 2E|X-Y| - E|X-X'| - E|Y-Y'| (V-statistic)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return 2.0 * _mean_distance(x, y) - _mean_distance(x, x) - _mean_distance(y, y)


@dataclass(frozen=True)
class EnergyTest:
    statistic: float
    threshold: float
    passed: bool
    n_points: int
    seed: str


def _subsample(samples: np.ndarray, cap: int, rng: np.random.Generator) -> np.ndarray:
    if len(samples) <= cap:
        return samples
    idx = np.sort(rng.choice(len(samples), size=cap, replace=False))
    return samples[idx]


def _prepare(samples, rho, seed, max_points, reference):
    x = np.asarray(samples, dtype=float)
    if x.ndim != 2 or x.shape[1] != 2 or len(x) < 2:
        raise ValueError("energy statistic needs at least 2 samples in the plane")
    x = _subsample(x, max_points, make_generator(seed, 0))
    if reference is None:
        reference = bivariate_normal_sample(len(x), rho, make_generator(seed, 1))
    return x, np.asarray(reference, dtype=float)


def energy_distance(samples, rho: float, seed: SeedLike, *, max_points: int = 5000, reference=None) -> float:
    """Energy distance between the batch and an equal-size draw from the
    standard bivariate normal law with correlation ``rho``.

    Batches above ``max_points`` are subsampled with sub-stream 0 of
    ``seed``; the reference uses sub-stream 1 unless supplied.
    """
    x, ref = _prepare(samples, rho, seed, max_points, reference)
    return energy_statistic(x, ref)


def energy_test(
    samples,
    rho: float,
    seed: SeedLike,
    *,
    permutations: int = 200,
    quantile: float = 0.99,
    max_points: int = 5000,
    reference=None,
) -> EnergyTest:
    """Energy distance plus the ``quantile`` of its permutation distribution.

    The label shuffles use sub-stream 2 of ``seed``.  ``passed`` means the
    observed statistic does not exceed the permutation quantile.
    """
    x, ref = _prepare(samples, rho, seed, max_points, reference)
    n, m = len(x), len(ref)
    pooled = np.vstack([x, ref])
    N = n + m
    labels = np.zeros((N, permutations + 1))
    labels[:n, 0] = 1.0
    rng = make_generator(seed, 2)
    for p in range(permutations):
        labels[rng.permutation(N)[:n], p + 1] = 1.0
    prod, rowsum = _pooled_distance_products(pooled, labels)
    stats = _energy_from_products(prod, rowsum, labels, n, m)
    observed = float(stats[0])
    threshold = float(np.quantile(stats[1:], quantile))
    return EnergyTest(observed, threshold, observed <= threshold, n, repr(seed))


@dataclass(frozen=True)
class ConvergenceReport:
    point: object
    cf_sup_dist: float
    ks_w: float
    ks_u: float
    energy_dist: float
    target_rho: float
    theta_w: float
    theta_u: float
    ks_limit: float
    energy_threshold: float
    cf_limit: float
    correlation: float
    verdict: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.verdict.values())

    def as_dict(self) -> dict:
        d = asdict(self)
        d["point"] = [self.point.n1, self.point.n2]
        return d


def limit_variances(target_rho: float, sigma1: float, sigma2: float, e: float) -> tuple[float, float]:
    """Variances of the normal limits of W_hat and U_hat when rho_bar -> target_rho.

    At e = 1 these are 1 - rho_star and 1 + rho_star.
    """
    c = cross_weight(sigma1, sigma2, e) * target_rho
    return 1.0 - c, 1.0 + c


def assess(
    batch: ReplicationBatch,
    target_rho: float,
    thresholds: Thresholds = Thresholds(),
    *,
    grid: CfGrid | None = None,
    seed: SeedLike = 0,
) -> ConvergenceReport:
    """Score ``batch`` against the bivariate normal law with correlation
    ``target_rho`` and against the matching normal laws of W_hat and U_hat.
    """
    grid = grid if grid is not None else CfGrid.lattice()
    R = len(batch)
    emp = empirical_cf(batch.samples, grid)
    cf_dist = cf_sup_distance(emp, target_rho)
    theta_w, theta_u = limit_variances(target_rho, batch.sigma[0], batch.sigma[1], batch.point.e)
    ks_w = ks_statistic(batch.w_hat, theta_w)
    ks_u = ks_statistic(batch.u_hat, theta_u)
    energy = energy_test(
        batch.samples,
        target_rho,
        seed,
        permutations=thresholds.permutations,
        quantile=thresholds.energy_quantile,
        max_points=thresholds.energy_max_points,
    )
    ks_lim = thresholds.ks_limit(R)
    verdict = {
        "cf": cf_dist <= thresholds.cf_sup,
        "ks_w": ks_w <= ks_lim,
        "ks_u": ks_u <= ks_lim,
        "energy": energy.passed,
    }
    return ConvergenceReport(
        point=batch.point,
        cf_sup_dist=cf_dist,
        ks_w=ks_w,
        ks_u=ks_u,
        energy_dist=energy.statistic,
        target_rho=target_rho,
        theta_w=theta_w,
        theta_u=theta_u,
        ks_limit=ks_lim,
        energy_threshold=energy.threshold,
        cf_limit=thresholds.cf_sup,
        correlation=batch.correlation(),
        verdict=verdict,
    )
