"""Bivariate sequence models {(X_1j, X_2j) : j >= 1}.

Every model produces vectors that are independent across the index j.  The
coordinates of one vector may be correlated (``gaussian_iid_corr``,
``bounded_rademacher_pair``), correlated with a j-dependent coefficient
(``gaussian_varying_schedule``), dependent yet uncorrelated
(``rademacher_product``) or fully independent (``independent_nongaussian``).

Randomness is keyed: a stream is identified by an experiment seed plus a
tuple of integers (replication, coordinate, ...), so that a parallel run
draws the same numbers as a serial one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Union

import numpy as np

__all__ = [
    "FAMILIES",
    "VARIANTS",
    "MarginalSpec",
    "Schedule",
    "PairModel",
    "gaussian_iid_corr",
    "rademacher_product",
    "gaussian_varying_schedule",
    "bounded_rademacher_pair",
    "independent_nongaussian",
    "correlation_schedule",
    "sample_block",
    "sample_standardized_sums",
    "standardized_block",
    "make_generator",
]

FAMILIES = ("gaussian", "rademacher", "exponential", "uniform")
VARIANTS = (
    "gaussian_iid_corr",
    "rademacher_product",
    "gaussian_varying_schedule",
    "bounded_rademacher_pair",
    "independent_nongaussian",
)

SeedLike = Union[int, np.random.SeedSequence]

# Explicit summation of uniform variates is capped at this many draws per call.
_EXPLICIT_SUM_BUDGET = 2 * 10**9
_SQRT3 = math.sqrt(3.0)


def _child_sequence(seed: SeedLike, *key: int) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + key)
    if isinstance(seed, (bool, np.bool_)) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an int or SeedSequence, got {type(seed).__name__}")
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    return np.random.SeedSequence(int(seed), spawn_key=key)


def make_generator(seed: SeedLike, *key: int) -> np.random.Generator:
    """Generator for the stream identified by ``seed`` and ``key``."""
    return np.random.Generator(np.random.PCG64(_child_sequence(seed, *key)))


def child_seed(seed: SeedLike, *key: int) -> np.random.SeedSequence:
    """Seed of the sub-stream ``key`` below ``seed``; usable wherever a seed is."""
    return _child_sequence(seed, *key)


def _check_finite(name, value):
    if not isinstance(value, Real) or not math.isfinite(value):
        raise ValueError(f"{name} must be a finite real number, got {value!r}")


@dataclass(frozen=True)
class MarginalSpec:
    """Law of one coordinate: ``mu + sigma * xi`` with ``xi`` standardized.

    The standardized variate ``xi`` has mean 0 and variance 1 for every
    family: a standard normal, a fair sign, ``E - 1`` with ``E`` unit
    exponential, or uniform on ``[-sqrt(3), sqrt(3)]``.
    """

    family: str = "gaussian"
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown marginal family {self.family!r}; expected one of {FAMILIES}")
        _check_finite("mu", self.mu)
        _check_finite("sigma", self.sigma)
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma!r}")

    @property
    def analytic_cf_available(self) -> bool:
        return True

    def cf(self, u):
        """Characteristic function of the standardized variate at ``u``."""
        x = np.asarray(u, dtype=float)
        if self.family == "gaussian":
            val = np.exp(-0.5 * x * x) + 0j
        elif self.family == "rademacher":
            val = np.cos(x) + 0j
        elif self.family == "exponential":
            val = np.exp(-1j * x) / (1.0 - 1j * x)
        else:
            # sin(sqrt3 u) / (sqrt3 u)
            val = np.sinc(_SQRT3 * x / np.pi) + 0j
        return complex(val) if val.ndim == 0 else val

    def draw_standardized(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.family == "gaussian":
            return rng.standard_normal(size)
        if self.family == "rademacher":
            return 2.0 * rng.integers(0, 2, size=size) - 1.0
        if self.family == "exponential":
            return rng.standard_exponential(size) - 1.0
        return rng.uniform(-_SQRT3, _SQRT3, size)

    def draw_standardized_sum(self, rng: np.random.Generator, m: int, size: int) -> np.ndarray:
        """``size`` independent copies of the sum of ``m`` standardized variates.

        The sum is drawn from its exact law where one is cheap to sample
        (normal, shifted binomial, shifted gamma); uniform sums are
        accumulated explicitly.
        """
        if m < 0:
            raise ValueError("m must be nonnegative")
        if m == 0:
            return np.zeros(size)
        if self.family == "gaussian":
            return math.sqrt(m) * rng.standard_normal(size)
        if self.family == "rademacher":
            return 2.0 * rng.binomial(m, 0.5, size=size) - m
        if self.family == "exponential":
            return rng.standard_gamma(m, size=size) - m
        if m * size > _EXPLICIT_SUM_BUDGET:
            raise ValueError(
                f"uniform partial sums of length {m} for {size} replications exceed the draw budget"
            )
        out = np.zeros(size)
        rows = max(1, 2**22 // size)
        done = 0
        while done < m:
            take = min(rows, m - done)
            out += rng.uniform(-_SQRT3, _SQRT3, (take, size)).sum(axis=0)
            done += take
        return out


@dataclass(frozen=True)
class Schedule:
    """Correlation coefficients rho_jj as a function of the index j >= 1.

    kinds: ``constant`` (rho_jj = amplitude), ``alternating``
    (rho_jj = (-1)**(j+1) * amplitude) and ``decay``
    (rho_jj = amplitude * j**(-power)).
    """

    kind: str = "constant"
    amplitude: float = 0.0
    power: float = 1.0

    def __post_init__(self):
        if self.kind not in ("constant", "alternating", "decay"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        _check_finite("amplitude", self.amplitude)
        _check_finite("power", self.power)
        if abs(self.amplitude) > 1:
            raise ValueError(f"|amplitude| must be <= 1, got {self.amplitude!r}")
        if self.kind == "decay" and self.power < 0:
            raise ValueError("decay power must be nonnegative")

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant" or (self.kind == "decay" and self.power == 0) or self.amplitude == 0

    def __call__(self, j: int):
        if j < 1:
            raise ValueError("index j must be >= 1")
        if self.is_constant:
            return self.amplitude
        if self.kind == "alternating":
            return self.amplitude if j % 2 == 1 else -self.amplitude
        return self.amplitude * float(j) ** (-self.power)

    def values(self, n: int) -> np.ndarray:
        """rho_11, ..., rho_nn as a float array."""
        j = np.arange(1, n + 1, dtype=float)
        if self.is_constant:
            return np.full(n, float(self.amplitude))
        if self.kind == "alternating":
            return np.where(j % 2 == 1, 1.0, -1.0) * float(self.amplitude)
        return float(self.amplitude) * j ** (-float(self.power))

    def partial_sum(self, n: int):
        """sum_{j <= n} rho_jj; exact for constant and alternating schedules."""
        if n <= 0:
            return 0
        if self.is_constant:
            return n * self.amplitude
        if self.kind == "alternating":
            return self.amplitude if n % 2 == 1 else 0 * self.amplitude
        return math.fsum(self.values(n))

    def cesaro_mean(self, k: int):
        """(1/k) sum_{j <= k} rho_jj, returned exactly when the schedule is constant."""
        if k < 1:
            raise ValueError("k must be >= 1")
        if self.is_constant:
            return self.amplitude
        total = self.partial_sum(k)
        if isinstance(total, (int, Fraction)):
            return Fraction(total) / k
        return total / k

    def distinct(self, k: int):
        """Distinct values among rho_11..rho_kk with their multiplicities."""
        if self.is_constant:
            return [(self.amplitude, k)]
        if self.kind == "alternating":
            odd = (k + 1) // 2
            pairs = [(self.amplitude, odd), (-self.amplitude, k - odd)]
            return [(v, c) for v, c in pairs if c > 0]
        return [(float(v), 1) for v in self.values(k)]


_ZERO = Schedule("constant", 0.0)


@dataclass(frozen=True)
class PairModel:
    """Generative description of the sequence of random vectors.

    Use the factory functions (:func:`gaussian_iid_corr` and friends)
    rather than instantiating directly.
    """

    variant: str
    marginal_1: MarginalSpec = field(default_factory=MarginalSpec)
    marginal_2: MarginalSpec = field(default_factory=MarginalSpec)
    schedule: Schedule = _ZERO

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown model variant {self.variant!r}; expected one of {VARIANTS}")
        fam = (self.marginal_1.family, self.marginal_2.family)
        if self.variant in ("gaussian_iid_corr", "gaussian_varying_schedule", "rademacher_product"):
            if fam != ("gaussian", "gaussian"):
                raise ValueError(f"{self.variant} requires gaussian marginals, got {fam}")
        elif self.variant == "bounded_rademacher_pair":
            if fam != ("rademacher", "rademacher"):
                raise ValueError(f"{self.variant} requires rademacher marginals, got {fam}")
        if self.variant in ("rademacher_product", "independent_nongaussian"):
            if self.schedule.amplitude != 0:
                raise ValueError(f"{self.variant} has zero correlation at every index")
        elif self.variant != "gaussian_varying_schedule" and self.schedule.kind != "constant":
            raise ValueError(f"{self.variant} requires a constant correlation schedule")

    @property
    def marginals(self) -> tuple[MarginalSpec, MarginalSpec]:
        return self.marginal_1, self.marginal_2

    @property
    def is_iid(self) -> bool:
        """True when the vectors are identically distributed across j."""
        return self.schedule.is_constant

    @property
    def is_gaussian(self) -> bool:
        """True when every vector (X_1j, X_2j) is jointly normal."""
        return self.variant in ("gaussian_iid_corr", "gaussian_varying_schedule")

    @property
    def label(self) -> str:
        s = self.schedule
        if self.variant in ("gaussian_iid_corr", "bounded_rademacher_pair"):
            inner = f"rho={float(s.amplitude):g}"
        elif self.variant == "gaussian_varying_schedule":
            inner = f"{s.kind},amplitude={float(s.amplitude):g}"
            if s.kind == "decay":
                inner += f",power={float(s.power):g}"
        elif self.variant == "independent_nongaussian":
            inner = f"{self.marginal_1.family},{self.marginal_2.family}"
        else:
            inner = ""
        return f"{self.variant}({inner})"


def gaussian_iid_corr(rho, mu=(0.0, 0.0), sigma=(1.0, 1.0)) -> PairModel:
    """Jointly normal iid vectors with correlation ``rho``."""
    return PairModel(
        "gaussian_iid_corr",
        MarginalSpec("gaussian", mu[0], sigma[0]),
        MarginalSpec("gaussian", mu[1], sigma[1]),
        Schedule("constant", rho),
    )


def rademacher_product(mu=(0.0, 0.0), sigma=(1.0, 1.0)) -> PairModel:
    """X_1j normal and X_2j = S_j * X_1j (after standardization), S_j a fair sign.

    The coordinates are uncorrelated but X_2j**2 == X_1j**2.
    """
    return PairModel(
        "rademacher_product",
        MarginalSpec("gaussian", mu[0], sigma[0]),
        MarginalSpec("gaussian", mu[1], sigma[1]),
    )


def gaussian_varying_schedule(schedule: Schedule, mu=(0.0, 0.0), sigma=(1.0, 1.0)) -> PairModel:
    return PairModel(
        "gaussian_varying_schedule",
        MarginalSpec("gaussian", mu[0], sigma[0]),
        MarginalSpec("gaussian", mu[1], sigma[1]),
        schedule,
    )


def bounded_rademacher_pair(rho, mu=(0.0, 0.0), sigma=(1.0, 1.0)) -> PairModel:
    """Two fair signs that agree with probability (1 + rho) / 2."""
    return PairModel(
        "bounded_rademacher_pair",
        MarginalSpec("rademacher", mu[0], sigma[0]),
        MarginalSpec("rademacher", mu[1], sigma[1]),
        Schedule("constant", rho),
    )


def independent_nongaussian(family_1="exponential", family_2="uniform", mu=(0.0, 0.0), sigma=(1.0, 1.0)) -> PairModel:
    return PairModel(
        "independent_nongaussian",
        MarginalSpec(family_1, mu[0], sigma[0]),
        MarginalSpec(family_2, mu[1], sigma[1]),
    )


def correlation_schedule(model: PairModel, j: int):
    """Corr(X_1j, X_2j) implied by the construction of ``model``."""
    return model.schedule(j)


def standardized_block(model: PairModel, n: int, seed: SeedLike) -> np.ndarray:
    """Standardized pairs (xi_1j, xi_2j), j = 1..n, each coordinate mean 0 and variance 1."""
    g1 = make_generator(seed, 0)
    g2 = make_generator(seed, 1)
    v = model.variant
    if v in ("gaussian_iid_corr", "gaussian_varying_schedule"):
        z1 = g1.standard_normal(n)
        z2 = g2.standard_normal(n)
        rho = model.schedule.values(n)
        return np.column_stack([z1, rho * z1 + np.sqrt(np.clip(1.0 - rho**2, 0.0, None)) * z2])
    if v == "rademacher_product":
        z = g1.standard_normal(n)
        sign = 2.0 * g2.integers(0, 2, size=n) - 1.0
        return np.column_stack([z, sign * z])
    if v == "bounded_rademacher_pair":
        e1 = 2.0 * g1.integers(0, 2, size=n) - 1.0
        agree = g2.random(n) < (1.0 + float(model.schedule.amplitude)) / 2.0
        return np.column_stack([e1, np.where(agree, e1, -e1)])
    return np.column_stack([
        model.marginal_1.draw_standardized(g1, n),
        model.marginal_2.draw_standardized(g2, n),
    ])


def sample_block(model: PairModel, n: int, seed: SeedLike) -> np.ndarray:
    """Draw (X_1j, X_2j) for j = 1..n as an ``(n, 2)`` array.

    Coordinate streams are keyed ``(0,)`` and ``(1,)`` under ``seed``; the
    j-th row consumes the j-th draw of each stream, so a block of length n
    is a prefix of any longer block with the same seed.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    for m in model.marginals:
        _check_finite("mu", m.mu)
        _check_finite("sigma", m.sigma)
    xi = standardized_block(model, int(n), seed)
    mu = np.array([model.marginal_1.mu, model.marginal_2.mu], dtype=float)
    sigma = np.array([model.marginal_1.sigma, model.marginal_2.sigma], dtype=float)
    return mu + sigma * xi


def _shared_sums(model: PairModel, n: int, size: int, rng: np.random.Generator):
    """Exact joint law of (sum xi_1j, sum xi_2j) over j = 1..n."""
    v = model.variant
    if n == 0:
        return np.zeros(size), np.zeros(size)
    if v in ("gaussian_iid_corr", "gaussian_varying_schedule"):
        c = float(model.schedule.partial_sum(n))
        a = math.sqrt(n) * rng.standard_normal(size)
        b = rng.standard_normal(size)
        resid = math.sqrt(max(n - c * c / n, 0.0))
        return a, (c / n) * a + resid * b
    if v == "rademacher_product":
        # Given the number of positive signs, the two partial sums are the
        # sum and difference of two independent normal sums.
        plus = rng.binomial(n, 0.5, size=size)
        pos = np.sqrt(plus) * rng.standard_normal(size)
        neg = np.sqrt(n - plus) * rng.standard_normal(size)
        return pos + neg, pos - neg
    if v == "bounded_rademacher_pair":
        p = (1.0 + float(model.schedule.amplitude)) / 2.0
        cells = rng.multinomial(n, [p / 2, (1 - p) / 2, p / 2, (1 - p) / 2], size=size).astype(float)
        # cells: (x1=+, agree), (x1=+, disagree), (x1=-, agree), (x1=-, disagree)
        s1 = cells[:, 0] + cells[:, 1] - cells[:, 2] - cells[:, 3]
        s2 = cells[:, 0] - cells[:, 1] - cells[:, 2] + cells[:, 3]
        return s1, s2
    return (
        model.marginal_1.draw_standardized_sum(rng, n, size),
        model.marginal_2.draw_standardized_sum(rng, n, size),
    )


def sample_standardized_sums(model: PairModel, n1: int, n2: int, size: int, rng: np.random.Generator):
    """``size`` independent draws of (sum_{j<=n1} xi_1j, sum_{j<=n2} xi_2j).

    The indices shared by both coordinates (j <= min(n1, n2)) are drawn from
    the exact joint law of their partial sums; the surplus indices of the
    longer sample only involve one coordinate and are drawn from the exact
    law of an iid sum.  The result has the same distribution as summing an
    explicit block from :func:`sample_block`, at O(size) cost.
    """
    if n1 < 1 or n2 < 1:
        raise ValueError("sample sizes must be >= 1")
    n = min(n1, n2)
    s1, s2 = _shared_sums(model, n, size, rng)
    if n1 > n:
        s1 = s1 + model.marginal_1.draw_standardized_sum(rng, n1 - n, size)
    if n2 > n:
        s2 = s2 + model.marginal_2.draw_standardized_sum(rng, n2 - n, size)
    return s1, s2
