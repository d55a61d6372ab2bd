"""Characteristic functions: analytic laws, empirical estimates on a grid,
the power identity for standardized means, and the three-term split of the
joint CF of (Y1, Y2) at an off-diagonal point.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .models import MarginalSpec, PairModel
from .netpath import NetPoint

__all__ = [
    "CfGrid",
    "EmpiricalCf",
    "Decomposition",
    "cf_zeta",
    "cf_psi_rho",
    "cf_normal_theta",
    "cf_marginal_power",
    "empirical_cf",
    "cf_decomposition",
    "gaussian_diagonal_cf",
    "gaussian_joint_cf",
    "taylor_remainder",
    "taylor_remainder_array",
]


def cf_zeta(u):
    """CF of the standard normal law, exp(-u**2 / 2)."""
    return np.exp(-0.5 * np.square(u))


def cf_psi_rho(s, t, rho):
    """CF of the standard bivariate normal law with correlation ``rho``."""
    if abs(rho) > 1:
        raise ValueError(f"|rho| must be <= 1, got {rho!r}")
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if rho == 0:
        # product form, bit-identical to cf_zeta(s) * cf_zeta(t)
        out = cf_zeta(s) * cf_zeta(t)
    else:
        out = np.exp(-0.5 * (s * s + 2.0 * s * t * rho + t * t))
    return float(out) if out.ndim == 0 else out


def cf_normal_theta(u, theta):
    """CF of N(0, theta); theta = 0 is the point mass at 0."""
    if theta < 0:
        raise ValueError(f"theta must be nonnegative, got {theta!r}")
    u = np.asarray(u, dtype=float)
    out = np.exp(-0.5 * theta * u * u)
    return float(out) if out.ndim == 0 else out


def cf_marginal_power(psi: Callable | MarginalSpec, n: int, u: float) -> complex:
    """[psi(u / sqrt(n))]**n, the CF of a standardized mean of n iid variates."""
    if n < 1:
        raise ValueError("n must be >= 1")
    f = psi.cf if isinstance(psi, MarginalSpec) else psi
    return complex(f(u / math.sqrt(n))) ** n


@dataclass(frozen=True, eq=False)
class CfGrid:
    """Finite set of evaluation points (s, t) containing the origin."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) == 0:
            raise ValueError("grid points must be an (m, 2) array with m >= 1")
        if not np.all(np.isfinite(pts)):
            raise ValueError("grid points must be finite")
        if not np.any(np.all(pts == 0.0, axis=1)):
            raise ValueError("grid must contain the origin")
        if len(np.unique(pts, axis=0)) != len(pts):
            raise ValueError("grid points must be distinct")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def lattice(cls, size: int = 13, half_width: float = 3.0) -> "CfGrid":
        """``size`` x ``size`` lattice on [-half_width, half_width]**2 (size odd)."""
        if size < 1 or size % 2 == 0:
            raise ValueError("lattice size must be a positive odd integer")
        axis = np.linspace(-half_width, half_width, size)
        axis[size // 2] = 0.0
        s, t = np.meshgrid(axis, axis, indexing="ij")
        return cls(np.column_stack([s.ravel(), t.ravel()]))

    def __len__(self):
        return len(self.points)

    def index_of(self, s: float, t: float) -> int:
        hit = np.flatnonzero(np.all(np.isclose(self.points, [s, t], rtol=0, atol=1e-12), axis=1))
        if not len(hit):
            raise KeyError(f"({s}, {t}) is not a grid point")
        return int(hit[0])


@dataclass(frozen=True, eq=False)
class EmpiricalCf:
    grid: CfGrid
    values: np.ndarray
    n_samples: int

    def value_at(self, s: float, t: float) -> complex:
        return complex(self.values[self.grid.index_of(s, t)])

    def rows(self):
        for (s, t), v in zip(self.grid.points, self.values):
            yield float(s), float(t), float(v.real), float(v.imag)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["s", "t", "re", "im"])
            for row in self.rows():
                w.writerow([repr(x) for x in row])


def empirical_cf(samples, grid: CfGrid) -> EmpiricalCf:
    """(1/R) sum_r exp(i (s y1_r + t y2_r)) at every grid point."""
    y = np.asarray(samples, dtype=float)
    if y.ndim != 2 or y.shape[1] != 2 or len(y) == 0:
        raise ValueError("samples must be a nonempty (R, 2) array")
    if not np.all(np.isfinite(y)):
        raise ValueError("samples must be finite")
    R = len(y)
    values = np.empty(len(grid), dtype=complex)
    # Fixed row blocks keep the reduction order independent of the grid size.
    block = 32
    for start in range(0, len(grid), block):
        phase = grid.points[start:start + block] @ y.T
        values[start:start + block] = np.cos(phase).mean(axis=1) + 1j * np.sin(phase).mean(axis=1)
    mod = np.abs(values)
    over = mod > 1.0
    values[over] /= mod[over]
    values[np.all(grid.points == 0.0, axis=1)] = 1.0
    return EmpiricalCf(grid, values, R)


class Decomposition(NamedTuple):
    term1: complex
    term2: complex
    term3: complex
    total: complex


def cf_decomposition(point: NetPoint, joint_diag_cf, marginal_cfs, s: float, t: float) -> Decomposition:
    """Split the joint CF of (Y1, Y2) at ``point`` by the sign of n1 - n2.

    ``joint_diag_cf(k, a, b)`` is the CF of the diagonal vector at (k, k);
    ``marginal_cfs`` holds the CFs of the two standardized coordinates.
    The surplus indices of the longer sample contribute a power of their
    marginal CF; the common block is a rescaled diagonal CF.
    """
    if joint_diag_cf is None or marginal_cfs is None or len(marginal_cfs) != 2:
        raise ValueError("a diagonal joint CF and two marginal CFs are required")
    psi1, psi2 = (m.cf if isinstance(m, MarginalSpec) else m for m in marginal_cfs)
    n1, n2, nmin = point.n1, point.n2, point.n_min
    term1 = complex(joint_diag_cf(n1, s, t)) * (1 - point.J12 - point.J21)
    term2 = term3 = 0j
    if point.J12:
        surplus = complex(psi1(s / math.sqrt(n1))) ** (n1 - nmin)
        term2 = complex(joint_diag_cf(n2, s * math.sqrt(n2 / n1), t)) * surplus
    if point.J21:
        surplus = complex(psi2(t / math.sqrt(n2))) ** (n2 - nmin)
        term3 = complex(joint_diag_cf(n1, s, t * math.sqrt(n1 / n2))) * surplus
    return Decomposition(term1, term2, term3, term1 + term2 + term3)


def gaussian_diagonal_cf(model: PairModel):
    """Diagonal joint CF of a jointly normal model, for :func:`cf_decomposition`."""
    if not model.is_gaussian:
        raise ValueError(f"{model.variant} has no closed-form diagonal CF")

    def psi(k, a, b):
        r = float(model.schedule.cesaro_mean(k))
        return math.exp(-0.5 * (a * a + 2.0 * a * b * r + b * b))

    return psi


def gaussian_joint_cf(model: PairModel, point: NetPoint, s: float, t: float) -> float:
    """Joint CF of (Y1, Y2) at ``point`` computed straight from rho_bar."""
    if not model.is_gaussian:
        raise ValueError(f"{model.variant} has no closed-form joint CF")
    r = float(model.schedule.partial_sum(point.n_min)) / point.m_geom
    return math.exp(-0.5 * (s * s + 2.0 * s * t * r + t * t))


def _tail_series(theta: float, m: int) -> complex:
    # sum_{q > m} (i theta)**q / q!, accurate for |theta| <= 1
    term = complex(1.0)
    for q in range(1, m + 2):
        term *= 1j * theta / q
    total = 0j
    q = m + 1
    while True:
        total += term
        q += 1
        term *= 1j * theta / q
        if abs(term) <= 1e-18 * abs(total):
            return total


def taylor_remainder(theta: float, m: int) -> tuple[float, float]:
    """(|exp(i theta) - sum_{q<=m} (i theta)**q / q!|, |theta|**(m+1) / (m+1)!).

    For |theta| <= 1 the remainder is summed directly from its tail series,
    which avoids the cancellation of subtracting the partial sum.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    bound = abs(theta) ** (m + 1) / math.factorial(m + 1)
    if theta == 0:
        return 0.0, 0.0
    if abs(theta) <= 1:
        return abs(_tail_series(theta, m)), bound
    partial = 0j
    term = complex(1.0)
    for q in range(m + 1):
        partial += term
        term *= 1j * theta / (q + 1)
    return abs(complex(math.cos(theta), math.sin(theta)) - partial), bound


def taylor_remainder_array(theta, m):
    """Vectorized :func:`taylor_remainder` over arrays of theta and m."""
    theta = np.asarray(theta, dtype=float)
    m = np.broadcast_to(np.asarray(m, dtype=int), theta.shape)
    lhs = np.empty(theta.shape)
    bound = np.empty(theta.shape)
    for idx in np.ndindex(theta.shape):
        lhs[idx], bound[idx] = taylor_remainder(float(theta[idx]), int(m[idx]))
    return lhs, bound
