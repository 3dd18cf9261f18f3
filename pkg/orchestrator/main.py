# orchestrator/main.py

"""
Experiment orchestration: single runs, method-comparison batteries and
penetration sweeps. Output CSVs are written only under the chosen directory
and are ordered by (method, rate, seed) regardless of completion order.
"""

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import pandas as pd

from agents.analysis_agent import (
    RUN_COLUMNS,
    RunMetrics,
    accuracy_frame,
    evaluate_run,
    penetration_sweep,
    summarize_methods,
    sweep_summary,
)
from agents.decision_agent import Method
from data_ingestion.preprocess import write_event_log
from data_ingestion.scenario_loader import ScenarioConfig
from trafficsim.simulator import run

logger = logging.getLogger(__name__)


def _write_csv(frame: pd.DataFrame, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n")
    logger.info("Orchestrator: wrote %d rows to %s", len(frame), path)
    return path


# --- Single run ---

def run_single(scenario: ScenarioConfig, method: Method, seed: int, out_dir: Path) -> RunMetrics:
    """Simulate once, then write events.csv, metrics.csv and accuracy.csv under out_dir."""
    scenario = scenario.with_method(method).with_seed(seed)
    log = run(scenario, seed)
    metrics = evaluate_run(log, scenario, seed)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_event_log(log.to_frame(), out_dir / "events.csv")
    logger.info("Orchestrator: wrote %d log records to %s", len(log), out_dir / "events.csv")
    _write_csv(pd.DataFrame([metrics.to_row()], columns=RUN_COLUMNS), out_dir / "metrics.csv")
    _write_csv(accuracy_frame([metrics]), out_dir / "accuracy.csv")
    return metrics


def report_from_log(log: pd.DataFrame, scenario: ScenarioConfig, out_dir: Optional[Path] = None) -> RunMetrics:
    """Recompute the run indicators from a saved event log."""
    setup = log[log["kind"] == "setup"]
    seed = scenario.seed
    if not setup.empty:
        header = json.loads(setup.iloc[0]["payload"])
        seed = int(header.get("seed", seed))
        if "method" in header:
            scenario = scenario.with_method(header["method"])
        if "penetration" in header:
            scenario = scenario.with_penetration(float(header["penetration"]))
    metrics = evaluate_run(log, scenario, seed)
    if out_dir is not None:
        _write_csv(pd.DataFrame([metrics.to_row()], columns=RUN_COLUMNS), Path(out_dir) / "metrics.csv")
    return metrics


# --- Method comparison ---

def _compare_job(job: Tuple[str, str, int]) -> RunMetrics:
    scenario_json, method, seed = job
    scenario = ScenarioConfig.model_validate_json(scenario_json).with_method(method).with_seed(seed)
    return evaluate_run(run(scenario, seed), scenario, seed)


def compare_methods(
    scenario: ScenarioConfig,
    methods: Sequence[Method],
    seeds: Sequence[int],
    out_dir: Path,
    workers: int = 1,
) -> pd.DataFrame:
    """Run every (method, seed) pair and write summary.csv plus the per-run accuracy.csv."""
    payload = scenario.model_dump_json()
    jobs = [(payload, m.value, int(s)) for m in methods for s in seeds]
    logger.info("Orchestrator: comparing %d methods over %d seeds on '%s'", len(methods), len(seeds), scenario.name)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results: List[RunMetrics] = list(pool.map(_compare_job, jobs))
    else:
        results = [_compare_job(job) for job in jobs]
    order = {m: i for i, m in enumerate(Method)}
    results.sort(key=lambda r: (order[r.method], r.seed))

    runs = pd.DataFrame([r.to_row() for r in results], columns=RUN_COLUMNS)
    summary = summarize_methods(runs, scenario.horizon)
    out_dir = Path(out_dir)
    _write_csv(summary, out_dir / "summary.csv")
    _write_csv(accuracy_frame(results), out_dir / "accuracy.csv")
    return summary


# --- Penetration sweep ---

def sweep(
    scenario: ScenarioConfig,
    method: Method,
    rates: Sequence[float],
    seeds: Sequence[int],
    out_dir: Path,
    workers: int = 1,
) -> pd.DataFrame:
    """Write sweep.csv (one row per rate and seed) and sweep_summary.csv."""
    table = penetration_sweep(scenario, rates, seeds, method, workers=workers)
    out_dir = Path(out_dir)
    _write_csv(table, out_dir / "sweep.csv")
    _write_csv(sweep_summary(table, scenario.horizon), out_dir / "sweep_summary.csv")
    return table
