"""Run one configured experiment along its path and persist the artifacts.

Outputs, under ``<output root>/<scenario>/``:

* ``points.csv``: one row per path point, flushed as soon as it is scored;
* ``cf.csv``: empirical CF on the grid at the final point;
* ``summary.json``: status, expectation, observation, seeds, thresholds,
  per-point details and wall time.

The observed outcome of a scenario is the verdict at its final point.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
import time
from dataclasses import asdict, dataclass
from pathlib import Path

from .charfn import empirical_cf
from .config import ExperimentConfig
from .convergence import assess
from .lindeberg import max_share_bound
from .models import child_seed
from .stats import replicate, rho_bar

__all__ = ["COLUMNS", "OUTPUT_ENV", "RunResult", "run_scenario", "output_root"]

logger = logging.getLogger(__name__)

COLUMNS = (
    "scenario", "path_kind", "idx", "n1", "n2", "e", "rho_bar", "cf_sup_dist",
    "ks_w", "ks_u", "energy_dist", "L_k", "tau_k", "verdict", "seed",
)
OUTPUT_ENV = "NETCLT_OUTPUT_DIR"

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG = 0, 1, 2


@dataclass(frozen=True)
class RunResult:
    scenario: str
    exit_code: int
    status: str
    expected: str
    observed: str | None
    directory: Path


def output_root(config: ExperimentConfig, override=None) -> Path:
    """Explicit override, then the environment variable, then the config."""
    return Path(override or os.environ.get(OUTPUT_ENV) or config.output_dir)


def _num(x) -> str:
    return repr(float(x))


def _stream_label(config: ExperimentConfig, idx: int) -> str:
    # point idx draws from sub-stream idx of the scenario seed
    return f"{config.seed}/{idx}"


def _score_point(config: ExperimentConfig, idx: int, point):
    seed = child_seed(config.seed, idx)
    batch = replicate(config.model, point, config.replications, child_seed(seed, 0),
                      method=config.method, workers=config.workers)
    report = assess(batch, config.target_rho, config.thresholds, grid=config.grid, seed=child_seed(seed, 1))
    lind = max_share_bound(config.model, config.projection, point.n_min, config.epsilon)
    rbar = float(rho_bar(config.model, point))

    verdicts = {}
    for check in config.checks:
        if check == "corr":
            verdicts[check] = abs(report.correlation - rbar) <= config.corr_tol
        elif check == "lindeberg":
            verdicts[check] = (not lind.degenerate) and lind.bound_check and float(lind.L_k) <= config.lindeberg_max
        else:
            verdicts[check] = bool(report.verdict[check])
    passed = all(verdicts.values())

    row = [
        config.scenario, config.path_label, str(idx), str(point.n1), str(point.n2),
        _num(point.e), _num(rbar), _num(report.cf_sup_dist), _num(report.ks_w), _num(report.ks_u),
        _num(report.energy_dist), _num(lind.L_k), _num(lind.tau_k),
        "pass" if passed else "fail", _stream_label(config, idx),
    ]
    detail = {
        "idx": idx,
        "point": [point.n1, point.n2],
        "seed": _stream_label(config, idx),
        "rho_bar": rbar,
        "correlation": report.correlation,
        "theta_w": report.theta_w,
        "theta_u": report.theta_u,
        "ks_limit": report.ks_limit,
        "energy_threshold": report.energy_threshold,
        "a_k_sq": float(lind.a_k_sq),
        "script_L": float(lind.script_L),
        "checks": verdicts,
        "verdict": "pass" if passed else "fail",
    }
    return row, detail, batch, passed


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def _write_summary(directory: Path, summary: dict) -> None:
    tmp = directory / "summary.json.tmp"
    tmp.write_text(json.dumps(_json_safe(summary), indent=2, sort_keys=True, allow_nan=False) + "\n")
    tmp.replace(directory / "summary.json")


def run_scenario(config: ExperimentConfig, output_dir=None) -> RunResult:
    """Execute ``config`` and write its artifacts.

    Exit code 0 when the observed outcome matches ``config.expect`` and 1 on
    a mismatch or a runtime error (the summary then has status ``aborted``).
    """
    directory = output_root(config, output_dir) / config.scenario
    directory.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    summary = {
        "scenario": config.scenario,
        "description": config.description,
        "config_hash": config.config_hash,
        "seed": config.seed,
        "model": config.model.label,
        "path_kind": config.path_label,
        "replications": config.replications,
        "checks": list(config.checks),
        "target_rho": config.target_rho,
        "thresholds": {
            **asdict(config.thresholds),
            "ks_limit": config.thresholds.ks_limit(config.replications),
            "corr_tol": config.corr_tol,
            "lindeberg_max": config.lindeberg_max,
            "lindeberg_epsilon": config.epsilon,
        },
        "expected": config.expect,
        "observed": None,
        "status": "running",
        "points": [],
    }
    observed = None
    try:
        with open(directory / "points.csv", "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(COLUMNS)
            fh.flush()
            last = len(config.path) - 1
            for idx, point in enumerate(config.path):
                row, detail, batch, passed = _score_point(config, idx, point)
                writer.writerow(row)
                fh.flush()
                summary["points"].append(detail)
                logger.info("%s idx=%d (%d, %d): %s", config.scenario, idx, point.n1, point.n2, detail["verdict"])
                if idx == last:
                    empirical_cf(batch.samples, config.grid).to_csv(directory / "cf.csv")
                    observed = "pass" if passed else "fail"
    except Exception as exc:
        logger.exception("scenario %s aborted", config.scenario)
        summary.update(status="aborted", error=f"{type(exc).__name__}: {exc}",
                       wall_time_s=time.perf_counter() - start)
        _write_summary(directory, summary)
        return RunResult(config.scenario, EXIT_MISMATCH, "aborted", config.expect, None, directory)

    matched = observed == config.expect
    summary.update(
        status="matched" if matched else "mismatch",
        observed=observed,
        wall_time_s=time.perf_counter() - start,
    )
    _write_summary(directory, summary)
    code = EXIT_OK if matched else EXIT_MISMATCH
    return RunResult(config.scenario, code, summary["status"], config.expect, observed, directory)

