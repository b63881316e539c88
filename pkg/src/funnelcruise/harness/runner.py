"""Running scenarios to files, singly or as a batch."""
from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Sequence, Union

import tomli_w

from ..errors import FunnelCruiseError, ScenarioValidationError, StepCollapseError
from ..integrator import simulate
from ..scenarios import ScenarioConfig, validate_scenario
from ..trace import Trace
from .checker import InvariantReport, check_invariants
from .scenario_io import config_digest, load_scenario
from .traceio import write_trace

log = logging.getLogger(__name__)

SUMMARY_COLUMNS = ("name", "status", "min_safety_margin", "min_upper_margin_v",
                   "min_upper_margin_d", "min_combined_lower", "sup_abs_u",
                   "max_u_jump_per_sample", "wall_time_s", "error")


def simulate_scenario(config: ScenarioConfig, record_steps: bool = True) -> Trace:
    return simulate(config.plant, config.controller, config.integ, config.init,
                    config.leader, config.t_end, record_steps=record_steps)


def write_report(report: InvariantReport, config: ScenarioConfig, path, wall_time: float,
                 partial: bool = False, error: str = "") -> None:
    data = {"scenario": config.name, **report.as_dict(),
            "config_sha256": config_digest(config), "wall_time_s": wall_time,
            "partial": partial, "error": error}
    Path(path).write_text(tomli_w.dumps(data), encoding="utf-8")


def run(config: ScenarioConfig, out_dir: Union[str, Path]) -> tuple[Trace, InvariantReport]:
    """Simulate ``config``, write ``trace.csv``, ``steps.csv`` and ``report.toml``
    to ``out_dir`` and return the trace and its report.

    If the integrator gives up, the partial trace and a report marked
    ``partial = true`` are written before the error propagates.
    """
    violations = validate_scenario(config)
    if violations:
        raise ScenarioValidationError(violations)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    try:
        trace = simulate_scenario(config)
    except StepCollapseError as exc:
        wall = time.perf_counter() - start
        if exc.partial is not None and exc.partial.rows:
            write_trace(exc.partial, out_dir)
            write_report(check_invariants(exc.partial), config, out_dir / "report.toml",
                         wall, partial=True, error=str(exc))
        raise
    wall = time.perf_counter() - start
    write_trace(trace, out_dir)
    report = check_invariants(trace, config.controller)
    write_report(report, config, out_dir / "report.toml", wall)
    log.info("%s: pass=%s in %.2f s", config.name, report.passed, wall)
    return trace, report


def _run_one(item, out_dir: str) -> dict:
    start = time.perf_counter()
    row = dict.fromkeys(SUMMARY_COLUMNS, "")
    row["name"] = item.name if isinstance(item, ScenarioConfig) else Path(item).stem
    try:
        config = item if isinstance(item, ScenarioConfig) else load_scenario(item)
        row["name"] = config.name
        _, report = run(config, Path(out_dir) / row["name"])
    except (FunnelCruiseError, OSError, ValueError) as exc:
        row["status"] = "error"
        row["error"] = str(exc)
    else:
        row["status"] = "pass" if report.passed else "fail"
        row.update(report.margins)
        row["sup_abs_u"] = report.sup_abs_u
        row["max_u_jump_per_sample"] = report.max_u_jump_per_sample
    row["wall_time_s"] = time.perf_counter() - start
    return row


def emit_batch(items: Sequence[Union[ScenarioConfig, str, Path]], out_dir: Union[str, Path],
               jobs: int = 1) -> list[dict]:
    """Run every scenario (config object or file path) into its own
    subdirectory of ``out_dir`` and write ``summary.csv``.

    A scenario that fails to load or simulate is marked ``error`` in the
    summary; the others are unaffected.  Rows follow the input order whatever
    the value of ``jobs``.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = [it.name if isinstance(it, ScenarioConfig) else Path(it).stem for it in items]
    if len(set(names)) != len(names):
        raise ValueError("scenario names in a batch must be unique")
    if jobs <= 1:
        rows = [_run_one(it, str(out_dir)) for it in items]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_one, items, [str(out_dir)] * len(items)))

    with open(out_dir / "summary.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: format(v, ".17g") if isinstance(v, float) and not isinstance(v, bool)
                             else v for k, v in row.items()})
    return rows
