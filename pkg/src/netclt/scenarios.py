"""Built-in experiment configurations, in a fixed order."""

from __future__ import annotations

from .config import ExperimentConfig, parse_config

__all__ = ["BUILTIN", "builtin_config", "list_scenarios"]

_COMMON = """
replications = 20000
grid.size = 13
grid.half_width = 3
"""

_SOURCES = {
    "prop1_diagonal": """
description = Gaussian rho = 0.5 on the diagonal; limit is the correlated normal law with rho 0.5
seed = 101
model.variant = gaussian_iid_corr
model.rho = 0.5
path.kind = diagonal
path.steps = 1, 2, 4
path.scale = 500
target.rho = 0.5
checks = cf, ks_w, ks_u, energy, corr
""",
    "thm1_positive_diag": """
description = Dependent but uncorrelated pair on the diagonal; limit is the independent normal pair
seed = 201
model.variant = rademacher_product
path.kind = diagonal
path.steps = 1, 2, 4
path.scale = 500
""",
    "thm1_positive_ratio": """
description = Dependent but uncorrelated pair with n1 / n2 = 2; limit is the independent normal pair
seed = 202
model.variant = rademacher_product
path.kind = fixed_ratio
path.p = 2
path.q = 1
path.steps = 1, 2, 4
path.scale = 500
""",
    "thm1_positive_kappa0": """
description = Dependent but uncorrelated pair on the path (k, k^2); limit is the independent normal pair
seed = 203
model.variant = rademacher_product
path.kind = power
path.gamma = 2
path.steps = 1, 2, 4
path.scale = 500
""",
    "thm1_kappa0": """
description = Gaussian rho = 0.8 on the path (k, k^2); rho_bar = 0.8 / sqrt(k) vanishes so the pair decorrelates
seed = 301
model.variant = gaussian_iid_corr
model.rho = 0.8
path.kind = power
path.gamma = 2
path.steps = 1, 2, 4
path.scale = 500
""",
    "thm1_negative_diag": """
description = Gaussian rho = 0.8 on the diagonal scored against the independent normal pair; must fail
expect = fail
seed = 302
model.variant = gaussian_iid_corr
model.rho = 0.8
path.kind = diagonal
path.steps = 1, 2, 4
path.scale = 500
""",
    "thm1_alternating": """
description = Gaussian pair with correlations alternating +0.9, -0.9; even partial sums cancel
seed = 303
model.variant = gaussian_varying_schedule
model.schedule.kind = alternating
model.schedule.amplitude = 0.9
path.kind = diagonal
path.steps = 1, 2, 4
path.scale = 500
""",
    "thm1_independent_nongaussian": """
description = Independent exponential and uniform samples with n2 = 2 n1
seed = 304
model.variant = independent_nongaussian
model.marginal1.family = exponential
model.marginal2.family = uniform
path.kind = fixed_ratio
path.p = 1
path.q = 2
path.steps = 1, 2, 4
path.scale = 500
""",
    "lindeberg_sweep": """
description = Bounded sign pair with rho = 0.3; Lindeberg functional and max-share bound for k = 10 .. 10^4
seed = 401
model.variant = bounded_rademacher_pair
model.rho = 0.3
path.kind = diagonal
path.steps = 1, 10, 100, 1000
path.scale = 10
target.rho = 0.3
checks = lindeberg
lindeberg.s = 1
lindeberg.t = 1
lindeberg.epsilon = 0.5
""",
}

BUILTIN = tuple(_SOURCES)


def builtin_text(name: str) -> str:
    if name not in _SOURCES:
        raise KeyError(f"unknown scenario {name!r}")
    return f"scenario = {name}\n{_COMMON}{_SOURCES[name]}"


def builtin_config(name: str) -> ExperimentConfig:
    return parse_config(builtin_text(name))


def list_scenarios() -> list[tuple[str, str]]:
    """(name, description) for every built-in scenario, in a fixed order."""
    return [(name, builtin_config(name).description) for name in BUILTIN]
