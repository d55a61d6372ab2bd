"""Indices of the double sequence and finite paths through them.

A point alpha = (n1, n2) of N x N carries the sample sizes of the two
coordinates.  The full directed set cannot be enumerated, so limits "along
the net" are probed along finite paths whose size ratio n1/n2 tends to a
declared kappa in [0, inf].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

__all__ = ["NetPoint", "NetPath", "make_point", "make_path", "PATH_KINDS", "DEFAULT_MAX_SIZE"]

PATH_KINDS = ("diagonal", "fixed_ratio", "power")
DEFAULT_MAX_SIZE = 10**9
# |e - kappa| <= KAPPA_RTOL * kappa for finite positive kappa; e <= KAPPA_ZERO_TOL
# for kappa = 0 and e >= 1 / KAPPA_ZERO_TOL for kappa = inf.
KAPPA_RTOL = 0.05
KAPPA_ZERO_TOL = 0.05


@dataclass(frozen=True, order=True)
class NetPoint:
    n1: int
    n2: int

    def __post_init__(self):
        for name in ("n1", "n2"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int):
                raise TypeError(f"{name} must be an int, got {type(v).__name__}")
            if v < 1:
                raise ValueError(f"{name} must be >= 1, got {v}")

    @property
    def e(self) -> float:
        """Size ratio n1 / n2."""
        return self.n1 / self.n2

    @property
    def n_min(self) -> int:
        return min(self.n1, self.n2)

    @property
    def n_max(self) -> int:
        return max(self.n1, self.n2)

    @property
    def m_geom(self) -> float:
        return math.sqrt(self.n1 * self.n2)

    @property
    def J12(self) -> int:
        return int(self.n1 > self.n2)

    @property
    def J21(self) -> int:
        return int(self.n1 < self.n2)

    @property
    def overlap_ratio(self) -> float:
        """n_min / m_geom, which equals sqrt(n_min / n_max)."""
        return math.sqrt(self.n_min / self.n_max)

    def dominates(self, other: "NetPoint") -> bool:
        """Coordinatewise order of the directed set."""
        return self.n1 >= other.n1 and self.n2 >= other.n2


def make_point(n1: int, n2: int) -> NetPoint:
    return NetPoint(n1, n2)


@dataclass(frozen=True)
class NetPath:
    kind: str
    points: tuple
    kappa: float
    params: tuple = ()

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i):
        return self.points[i]

    @property
    def final(self) -> NetPoint:
        return self.points[-1]

    def ratios(self) -> list[float]:
        return [p.e for p in self.points]

    def converges(self, rtol: float = KAPPA_RTOL, zero_tol: float = KAPPA_ZERO_TOL) -> bool:
        """Whether the ratio along the path is numerically at its declared limit."""
        e = self.ratios()
        if self.kappa == 0:
            return e[-1] <= zero_tol and all(a >= b for a, b in zip(e, e[1:]))
        if math.isinf(self.kappa):
            return e[-1] >= 1 / zero_tol and all(a <= b for a, b in zip(e, e[1:]))
        tail = e[len(e) - max(1, len(e) // 4):]
        return all(abs(x - self.kappa) <= rtol * self.kappa for x in tail)


def _multipliers(length, steps) -> list[int]:
    if steps is not None:
        ks = [int(k) for k in steps]
        if len(ks) < 2:
            raise ValueError("a path needs at least 2 points")
        if any(k < 1 for k in ks) or any(b <= a for a, b in zip(ks, ks[1:])):
            raise ValueError("path steps must be positive and strictly increasing")
        return ks
    if length is None or length < 2:
        raise ValueError("path length must be >= 2")
    return list(range(1, int(length) + 1))


def make_path(
    kind: str,
    length: int | None = None,
    scale: int = 1,
    *,
    p: int = 1,
    q: int = 1,
    gamma: float | None = None,
    steps: Sequence[int] | None = None,
    max_size: int = DEFAULT_MAX_SIZE,
) -> NetPath:
    """Generate a finite path of net points.

    ``diagonal`` gives (k*scale, k*scale) with kappa 1; ``fixed_ratio``
    gives (p*k*scale, q*k*scale) with kappa p/q; ``power`` gives
    (k*scale, ceil((k*scale)**gamma)) with kappa 0 for gamma > 1 and
    kappa inf for gamma < 1.  ``k`` runs over 1..length, or over ``steps``
    when given.
    """
    if kind not in PATH_KINDS:
        raise ValueError(f"unknown path kind {kind!r}; expected one of {PATH_KINDS}")
    if scale < 1:
        raise ValueError("scale must be >= 1")
    ks = _multipliers(length, steps)
    if kind == "diagonal":
        pairs = [(k * scale, k * scale) for k in ks]
        kappa, params = 1.0, ()
    elif kind == "fixed_ratio":
        if p < 1 or q < 1:
            raise ValueError("ratio terms p and q must be >= 1")
        pairs = [(p * k * scale, q * k * scale) for k in ks]
        kappa, params = p / q, (p, q)
    else:
        if gamma is None or not math.isfinite(gamma) or gamma <= 0 or gamma == 1:
            raise ValueError("power paths need gamma > 0 with gamma != 1")
        pairs = [(k * scale, _ceil_power(k * scale, gamma, max_size)) for k in ks]
        kappa, params = (0.0 if gamma > 1 else math.inf), (gamma,)
    if max(pairs[-1]) > max_size:
        raise ValueError(f"final path point {pairs[-1]} exceeds the size budget {max_size}")
    return NetPath(kind, tuple(NetPoint(a, b) for a, b in pairs), kappa, params)


def _ceil_power(m: int, gamma: float, max_size: int) -> int:
    if math.log(m) * gamma > math.log(max_size) + 1:
        raise ValueError(f"point ({m}, {m}**{gamma}) exceeds the size budget {max_size}")
    if float(gamma).is_integer():
        return m ** int(gamma)
    return math.ceil(m**gamma)
