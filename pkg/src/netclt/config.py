"""Experiment configuration: flat ``key = value`` text with dotted sections.

Example::

    scenario = prop1_diagonal
    seed = 20240101
    replications = 20000
    model.variant = gaussian_iid_corr
    model.rho = 0.5
    path.kind = diagonal
    path.steps = 1, 2, 4
    path.scale = 500
    target.rho = 0.5

Blank lines and lines starting with ``#`` are ignored, as is anything after
whitespace followed by ``#`` in an unquoted value.  Unknown keys,
duplicate keys and keys that do not apply to the chosen model variant or
path kind are rejected.
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass
from pathlib import Path

from .charfn import CfGrid
from .convergence import Thresholds
from .lindeberg import ProjectionSpec
from .models import FAMILIES, VARIANTS, MarginalSpec, PairModel, Schedule
from .netpath import DEFAULT_MAX_SIZE, PATH_KINDS, NetPath, make_path

__all__ = ["ConfigError", "ExperimentConfig", "parse_config", "load_config", "CHECKS"]

CHECKS = ("cf", "ks_w", "ks_u", "energy", "corr", "lindeberg")
STATISTICAL_CHECKS = {"cf", "ks_w", "ks_u", "energy", "corr"}
MIN_STATISTICAL_R = 100


class ConfigError(ValueError):
    pass


def _enum(*choices):
    def conv(raw):
        if raw not in choices:
            raise ValueError(f"expected one of {', '.join(choices)}")
        return raw

    return conv


def _int(raw):
    return int(raw.replace("_", ""))


def _float(raw):
    if raw.lower() in ("inf", "+inf", "infinity"):
        return math.inf
    v = float(raw)
    if math.isnan(v):
        raise ValueError("nan is not allowed")
    return v


def _list(conv):
    def parse(raw):
        raw = raw.strip()
        if raw.startswith("[") and raw.endswith("]"):
            raw = raw[1:-1]
        items = [x.strip() for x in raw.split(",") if x.strip()]
        if not items:
            raise ValueError("empty list")
        return tuple(conv(x) for x in items)

    return parse


# key -> (converter, default); a default of ... marks a required key
SCHEMA = {
    "scenario": (str, ...),
    "description": (str, ""),
    "expect": (_enum("pass", "fail"), "pass"),
    "seed": (_int, ...),
    "replications": (_int, ...),
    "output_dir": (str, "runs"),
    "checks": (_list(_enum(*CHECKS)), ("cf", "ks_w", "ks_u", "energy")),
    "target.rho": (_float, 0.0),
    "model.variant": (_enum(*VARIANTS), ...),
    "model.rho": (_float, None),
    "model.schedule.kind": (_enum("constant", "alternating", "decay"), None),
    "model.schedule.amplitude": (_float, None),
    "model.schedule.power": (_float, None),
    "model.marginal1.family": (_enum(*FAMILIES), None),
    "model.marginal1.mu": (_float, 0.0),
    "model.marginal1.sigma": (_float, 1.0),
    "model.marginal2.family": (_enum(*FAMILIES), None),
    "model.marginal2.mu": (_float, 0.0),
    "model.marginal2.sigma": (_float, 1.0),
    "path.kind": (_enum(*PATH_KINDS), ...),
    "path.length": (_int, None),
    "path.steps": (_list(_int), None),
    "path.scale": (_int, 1),
    "path.p": (_int, None),
    "path.q": (_int, None),
    "path.gamma": (_float, None),
    "path.max_size": (_int, DEFAULT_MAX_SIZE),
    "grid.size": (_int, 13),
    "grid.half_width": (_float, 3.0),
    "thresholds.cf_sup": (_float, 0.03),
    "thresholds.ks_coef": (_float, 1.63),
    "thresholds.energy_quantile": (_float, 0.99),
    "thresholds.permutations": (_int, 200),
    "thresholds.energy_max_points": (_int, 5000),
    "thresholds.corr_tol": (_float, 0.025),
    "thresholds.lindeberg_max": (_float, 1e-3),
    "lindeberg.s": (_float, 1.0),
    "lindeberg.t": (_float, 1.0),
    "lindeberg.epsilon": (_float, 0.5),
    "replicate.method": (_enum("aggregate", "direct"), "aggregate"),
    "replicate.workers": (_int, 1),
}

_INLINE_COMMENT = re.compile(r"\s+#.*$")
_KEY = re.compile(r"^[a-z][a-z0-9_]*(\.[a-z0-9_]+)*$")

_DEFAULT_FAMILIES = {
    "gaussian_iid_corr": ("gaussian", "gaussian"),
    "rademacher_product": ("gaussian", "gaussian"),
    "gaussian_varying_schedule": ("gaussian", "gaussian"),
    "bounded_rademacher_pair": ("rademacher", "rademacher"),
    "independent_nongaussian": ("exponential", "uniform"),
}


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str
    description: str
    expect: str
    seed: int
    replications: int
    output_dir: str
    checks: tuple
    target_rho: float
    model: PairModel
    path: NetPath
    grid: CfGrid
    thresholds: Thresholds
    corr_tol: float
    lindeberg_max: float
    projection: ProjectionSpec
    epsilon: float
    method: str
    workers: int
    values: dict

    @property
    def config_hash(self) -> str:
        canon = "\n".join(f"{k}={_canonical(v)}" for k, v in sorted(self.values.items()))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]

    @property
    def path_label(self) -> str:
        if self.path.kind == "fixed_ratio":
            return f"fixed_ratio({self.path.params[0]}:{self.path.params[1]})"
        if self.path.kind == "power":
            return f"power({self.path.params[0]:g})"
        return self.path.kind


def _canonical(v):
    if isinstance(v, tuple):
        return ",".join(_canonical(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _read_pairs(text: str) -> dict:
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if value[:1] not in ("\"", "'"):
            value = _INLINE_COMMENT.sub("", value)
        if not _KEY.match(key):
            raise ConfigError(f"line {lineno}: malformed key {key!r}")
        if key not in SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        if value == "":
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        raw[key] = value
    return raw


def _typed(raw: dict) -> dict:
    values = {}
    for key, (conv, default) in SCHEMA.items():
        if key in raw:
            try:
                values[key] = conv(raw[key])
            except ValueError as exc:
                raise ConfigError(f"{key}: invalid value {raw[key]!r} ({exc})") from None
        elif default is ...:
            raise ConfigError(f"missing required key {key!r}")
        elif default is not None:
            values[key] = default
    return values


def _forbid(values, keys, reason):
    bad = sorted(k for k in keys if k in values)
    if bad:
        raise ConfigError(f"{', '.join(bad)} not applicable: {reason}")


def _build_model(v: dict) -> PairModel:
    variant = v["model.variant"]
    sched_keys = ("model.schedule.kind", "model.schedule.amplitude", "model.schedule.power")
    if variant in ("gaussian_iid_corr", "bounded_rademacher_pair"):
        if "model.rho" not in v:
            raise ConfigError(f"model.rho is required for {variant}")
        _forbid(v, sched_keys, f"{variant} has a constant schedule set by model.rho")
        schedule = Schedule("constant", v["model.rho"])
    elif variant == "gaussian_varying_schedule":
        _forbid(v, ["model.rho"], "use model.schedule.* for a varying schedule")
        if "model.schedule.kind" not in v or "model.schedule.amplitude" not in v:
            raise ConfigError("model.schedule.kind and model.schedule.amplitude are required")
        if "model.schedule.power" in v and v["model.schedule.kind"] != "decay":
            raise ConfigError("model.schedule.power applies only to decay schedules")
        schedule = Schedule(v["model.schedule.kind"], v["model.schedule.amplitude"], v.get("model.schedule.power", 1.0))
    else:
        _forbid(v, ["model.rho", *sched_keys], f"{variant} is uncorrelated by construction")
        schedule = Schedule("constant", 0.0)
    fams = _DEFAULT_FAMILIES[variant]
    margs = []
    for i in (1, 2):
        fam = v.get(f"model.marginal{i}.family", fams[i - 1])
        margs.append(MarginalSpec(fam, v[f"model.marginal{i}.mu"], v[f"model.marginal{i}.sigma"]))
    return PairModel(variant, margs[0], margs[1], schedule)


def _build_path(v: dict) -> NetPath:
    kind = v["path.kind"]
    if ("path.length" in v) == ("path.steps" in v):
        raise ConfigError("exactly one of path.length and path.steps is required")
    if kind != "fixed_ratio":
        _forbid(v, ["path.p", "path.q"], f"{kind} paths have no ratio terms")
    elif "path.p" not in v or "path.q" not in v:
        raise ConfigError("fixed_ratio paths need path.p and path.q")
    if kind != "power":
        _forbid(v, ["path.gamma"], f"{kind} paths have no exponent")
    elif "path.gamma" not in v:
        raise ConfigError("power paths need path.gamma")
    return make_path(
        kind,
        v.get("path.length"),
        v["path.scale"],
        p=v.get("path.p", 1),
        q=v.get("path.q", 1),
        gamma=v.get("path.gamma"),
        steps=v.get("path.steps"),
        max_size=v["path.max_size"],
    )


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate configuration text.  Raises :class:`ConfigError`."""
    v = _typed(_read_pairs(text))
    try:
        model = _build_model(v)
        path = _build_path(v)
        grid = CfGrid.lattice(v["grid.size"], v["grid.half_width"])
        thresholds = Thresholds(
            cf_sup=v["thresholds.cf_sup"],
            ks_coef=v["thresholds.ks_coef"],
            energy_quantile=v["thresholds.energy_quantile"],
            permutations=v["thresholds.permutations"],
            energy_max_points=v["thresholds.energy_max_points"],
        )
        projection = ProjectionSpec(v["lindeberg.s"], v["lindeberg.t"])
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None

    checks = v["checks"]
    if len(set(checks)) != len(checks):
        raise ConfigError("checks must not repeat")
    R = v["replications"]
    if R < 1 or (STATISTICAL_CHECKS & set(checks) and R < MIN_STATISTICAL_R):
        raise ConfigError(f"replications must be >= {MIN_STATISTICAL_R} for statistical checks, got {R}")
    if not -1 <= v["target.rho"] <= 1:
        raise ConfigError("target.rho must lie in [-1, 1]")
    if v["seed"] < 0:
        raise ConfigError("seed must be nonnegative")
    if not v["lindeberg.epsilon"] > 0:
        raise ConfigError("lindeberg.epsilon must be positive")
    if not 0 < v["thresholds.energy_quantile"] < 1 or v["thresholds.permutations"] < 1:
        raise ConfigError("energy quantile must lie in (0, 1) with at least one permutation")
    if v["replicate.workers"] < 1:
        raise ConfigError("replicate.workers must be >= 1")
    if not re.match(r"^[A-Za-z0-9_.-]+$", v["scenario"]):
        raise ConfigError("scenario names may only contain letters, digits, '_', '.', '-'")

    return ExperimentConfig(
        scenario=v["scenario"],
        description=v["description"],
        expect=v["expect"],
        seed=v["seed"],
        replications=R,
        output_dir=v["output_dir"],
        checks=checks,
        target_rho=v["target.rho"],
        model=model,
        path=path,
        grid=grid,
        thresholds=thresholds,
        corr_tol=v["thresholds.corr_tol"],
        lindeberg_max=v["thresholds.lindeberg_max"],
        projection=projection,
        epsilon=v["lindeberg.epsilon"],
        method=v["replicate.method"],
        workers=v["replicate.workers"],
        values=v,
    )


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
