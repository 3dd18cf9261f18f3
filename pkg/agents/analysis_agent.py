# agents/analysis_agent.py

"""
Turns raw simulation event logs into the evaluation indicators: estimation
accuracy over time, detection time, false-alarm percentage and gap percentiles,
plus the penetration-rate sweep and method-comparison summaries built on them.

Every indicator is a pure function of (event log, ground truth).
"""

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator

from agents.decision_agent import Method
from agents.evidence import Cause
from data_ingestion.scenario_loader import ScenarioConfig
from trafficsim.network import build_network
from trafficsim.simulator import run

logger = logging.getLogger(__name__)

SAMPLE_PERIOD = 60.0
CONGESTION_BUCKET = 10.0
DEFAULT_GAP_PERCENTILE = 85.0


class MetricsError(ValueError):
    """Raised when an indicator is undefined for the given log and ground truth."""


# --- Ground truth ---

class TruthWindow(BaseModel):
    model_config = ConfigDict(frozen=True)

    cause: Cause
    start: float
    end: float
    segments: Tuple[int, ...]

    def covers(self, t: float, segment: int) -> bool:
        return self.start <= t <= self.end and segment in self.segments


class GroundTruth(BaseModel):
    """What really happened in a scenario, as seen by the indicators."""

    model_config = ConfigDict(frozen=True)

    windows: Tuple[TruthWindow, ...]
    free_flow_speed: float
    threshold_factor: float
    beacon_interval: float
    horizon: float

    @property
    def affected_segments(self) -> set:
        return {s for w in self.windows for s in w.segments}

    def cause_at(self, t: float, segment: int) -> Optional[Cause]:
        """Cause of the window covering (t, segment); local events win over weather."""
        found = None
        for w in self.windows:
            if w.covers(t, segment):
                if w.cause is not Cause.WEATHER:
                    return w.cause
                found = w.cause
        return found


def ground_truth(scenario: ScenarioConfig) -> GroundTruth:
    network = build_network(scenario.network)
    windows = []
    for event in scenario.events:
        if event.kind is Cause.WEATHER:
            segments = tuple(network.segment_ids)
        else:
            segments = tuple(sorted(network.upstream_within(event.segment, event.impact_radius)))
        windows.append(TruthWindow(cause=event.kind, start=event.start, end=event.end, segments=segments))
    return GroundTruth(
        windows=tuple(windows),
        free_flow_speed=scenario.network.free_flow_speed,
        threshold_factor=scenario.method.threshold_factor,
        beacon_interval=scenario.comms.beacon_interval,
        horizon=scenario.horizon,
    )


# --- Log access ---

def _frame(log) -> pd.DataFrame:
    frame = log.to_frame() if hasattr(log, "to_frame") else log
    return frame


def _records(log, kind: str, fields: Sequence[str]) -> pd.DataFrame:
    """Rows of one kind with the requested payload fields expanded into columns."""
    frame = _frame(log)
    rows = frame[frame["kind"] == kind]
    payloads = [json.loads(p) if p else {} for p in rows["payload"]]
    out = rows[["time", "vehicle", "segment"]].reset_index(drop=True).astype(
        {"time": float, "vehicle": int, "segment": int}
    )
    for name in fields:
        out[name] = [p.get(name) for p in payloads]
    return out


# --- Indicators ---

class AccuracySeries(BaseModel):
    samples: List[Tuple[float, float]] = Field(default_factory=list)

    @field_validator("samples")
    @classmethod
    def _bounded_and_ordered(cls, samples):
        times = [t for t, _ in samples]
        if any(b < a for a, b in zip(times, times[1:])):
            raise ValueError("sample times must be non-decreasing")
        if any(not 0.0 <= f <= 1.0 for _, f in samples):
            raise ValueError("accuracy fractions must lie in [0, 1]")
        return samples

    @property
    def final(self) -> float:
        return self.samples[-1][1] if self.samples else 0.0

    @property
    def mean(self) -> float:
        return float(np.mean([f for _, f in self.samples])) if self.samples else 0.0

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.samples, columns=["time", "fraction"])


def _code(cause: Optional[Cause]) -> Optional[str]:
    return cause.code if cause is not None else None


def _sample_times(truth: GroundTruth) -> np.ndarray:
    times = set()
    for w in truth.windows:
        first = math.ceil(w.start / SAMPLE_PERIOD) * SAMPLE_PERIOD
        times.update(np.arange(first, w.end + 1e-9, SAMPLE_PERIOD).round(6).tolist())
    return np.array(sorted(t for t in times if t <= truth.horizon + 1e-9))


def accuracy_series(log, truth: GroundTruth) -> AccuracySeries:
    """
    Fraction of equipped vehicles on affected segments whose current decision
    names the true cause, every 60 simulated seconds inside the event windows.
    A vehicle without a decision counts as inaccurate.
    """
    if not truth.affected_segments:
        raise MetricsError("ground truth has no affected segment")
    beacons = _records(log, "beacon-stats", ["equipped"])
    beacons = beacons[beacons["equipped"].astype(bool)]
    decisions = _records(log, "decision", ["cause"]).sort_values("time", kind="stable")

    samples = []
    for t in _sample_times(truth):
        window = beacons[(beacons["time"] > t - truth.beacon_interval + 1e-9) & (beacons["time"] <= t + 1e-9)]
        present = window.sort_values("time", kind="stable").drop_duplicates("vehicle", keep="last")
        present = present.assign(truth=[_code(truth.cause_at(t, s)) for s in present["segment"]])
        present = present[present["truth"].notna()]
        if present.empty:
            samples.append((float(t), 0.0))
            continue
        left = present[["vehicle", "truth"]].assign(time=float(t)).sort_values("time")
        merged = pd.merge_asof(
            left, decisions[["time", "vehicle", "cause"]], on="time", by="vehicle", direction="backward",
        )
        correct = sum(
            1 for cause, true in zip(merged["cause"], merged["truth"])
            if isinstance(cause, str) and cause == true
        )
        samples.append((float(t), correct / len(merged)))
    return AccuracySeries(samples=samples)


def detection_time(log, truth: GroundTruth) -> Optional[float]:
    """
    Earliest decision (or BP reply) with the correct cause made by a vehicle on
    an affected segment while its event window was open; None when there is none.
    """
    candidates = pd.concat([
        _records(log, "decision", ["cause"]),
        _records(log, "rp", ["cause"]),
    ], ignore_index=True).sort_values("time", kind="stable")
    for row in candidates.itertuples(index=False):
        for w in truth.windows:
            if w.covers(row.time, row.segment) and row.cause == w.cause.code:
                return float(row.time)
    return None


def _measured_congestion(log, truth: GroundTruth) -> set:
    beacons = _records(log, "beacon-stats", ["speed"])
    if beacons.empty:
        return set()
    beacons["bucket"] = (beacons["time"] // CONGESTION_BUCKET).astype(int)
    means = beacons.groupby(["segment", "bucket"])["speed"].mean()
    slow = means[means < truth.free_flow_speed / truth.threshold_factor]
    return set(slow.index)


def initiations(log) -> pd.DataFrame:
    """Method initiations: first reports of cooperative methods and BP requests originated."""
    reports = _records(log, "report-sent", ["initiation"])
    reports = reports[reports["initiation"].astype(bool)]
    requests = _records(log, "rq", ["role"])
    requests = requests[requests["role"] == "origin"]
    return pd.concat([reports, requests], ignore_index=True)[["time", "vehicle", "segment"]] \
        .sort_values(["time", "vehicle"], kind="stable").reset_index(drop=True)


def false_alarm_rate(log, truth: GroundTruth) -> float:
    """
    Percentage of initiations made while the initiator's segment was neither
    inside a ground-truth window nor measurably congested. No initiations gives 0.
    """
    started = initiations(log)
    if started.empty:
        return 0.0
    congested = _measured_congestion(log, truth)
    false = 0
    for row in started.itertuples(index=False):
        bucket = int(row.time // CONGESTION_BUCKET)
        in_window = any(w.covers(row.time, row.segment) for w in truth.windows)
        measured = (row.segment, bucket) in congested or (row.segment, bucket - 1) in congested
        if not (in_window or measured):
            false += 1
    return 100.0 * false / len(started)


def gap_percentile(log, q: float = DEFAULT_GAP_PERCENTILE) -> float:
    """Nearest-rank q-th percentile of every gap observation in the log."""
    gaps = _records(log, "beacon-stats", ["gap"])["gap"].dropna()
    if gaps.empty:
        raise MetricsError("log holds no gap observations")
    return float(np.percentile(gaps.astype(float).to_numpy(), q, method="inverted_cdf"))


# --- Run level ---

class RunMetrics(BaseModel):
    scenario: str
    method: Method
    seed: int
    penetration: float
    detection_time: Optional[float] = None
    false_alarm_pct: float = Field(0.0, ge=0.0, le=100.0)
    final_accuracy: float = 0.0
    mean_accuracy: float = 0.0
    gap_p85: Optional[float] = None
    accuracy: AccuracySeries = Field(default_factory=AccuracySeries)

    def to_row(self) -> dict:
        return {
            "scenario": self.scenario,
            "method": self.method.value,
            "seed": self.seed,
            "penetration": self.penetration,
            "detection_time": self.detection_time,
            "false_alarm_pct": self.false_alarm_pct,
            "final_accuracy": self.final_accuracy,
            "mean_accuracy": self.mean_accuracy,
            "gap_p85": self.gap_p85,
        }


RUN_COLUMNS = list(RunMetrics.model_fields)[:-1]


def evaluate_run(log, scenario: ScenarioConfig, seed: Optional[int] = None) -> RunMetrics:
    truth = ground_truth(scenario)
    series = accuracy_series(log, truth) if truth.affected_segments else AccuracySeries()
    try:
        gap = gap_percentile(log)
    except MetricsError:
        gap = None
    metrics = RunMetrics(
        scenario=scenario.name,
        method=scenario.method.name,
        seed=scenario.seed if seed is None else seed,
        penetration=scenario.comms.penetration,
        detection_time=detection_time(log, truth),
        false_alarm_pct=false_alarm_rate(log, truth),
        final_accuracy=series.final,
        mean_accuracy=series.mean,
        gap_p85=gap,
        accuracy=series,
    )
    logger.info(
        "AnalysisAgent: %s/%s seed %d -> detection %s, false alarms %.1f%%, final accuracy %.2f",
        metrics.scenario, metrics.method.value, metrics.seed, metrics.detection_time,
        metrics.false_alarm_pct, metrics.final_accuracy,
    )
    return metrics


def accuracy_frame(results: Iterable[RunMetrics]) -> pd.DataFrame:
    rows = [
        (t, m.method.value, m.scenario, m.seed, f)
        for m in results for t, f in m.accuracy.samples
    ]
    return pd.DataFrame(rows, columns=["time", "method", "scenario", "seed", "fraction"])


def _censored(frame: pd.DataFrame, horizon: float) -> pd.Series:
    return frame["detection_time"].astype(float).fillna(horizon)


def _method_order(name: str) -> int:
    return [m.value for m in Method].index(name)


def summarize_methods(frame: pd.DataFrame, horizon: float) -> pd.DataFrame:
    """
    One row per (method, scenario). Missing detections count at the horizon.
    improvement-vs-BP-pct is the relative gain in mean final accuracy over BP,
    left empty when BP is absent or scored zero.
    """
    frame = frame.assign(detection=_censored(frame, horizon))
    grouped = frame.groupby(["method", "scenario"], sort=False).agg(
        detection=("detection", "mean"),
        false_alarm=("false_alarm_pct", "mean"),
        accuracy=("final_accuracy", "mean"),
    ).reset_index()
    baseline = grouped[grouped["method"] == Method.BP.value].set_index("scenario")["accuracy"]

    def improvement(row) -> float:
        base = baseline.get(row["scenario"])
        if base is None or base == 0:
            return float("nan")
        return 100.0 * (row["accuracy"] - base) / base

    grouped["improvement"] = grouped.apply(improvement, axis=1) if len(grouped) else []
    grouped = grouped.sort_values(
        ["method", "scenario"], key=lambda col: col.map(_method_order) if col.name == "method" else col,
    )
    return grouped.rename(columns={
        "detection": "mean-detection-time",
        "false_alarm": "mean-false-alarm-pct",
        "accuracy": "mean-final-accuracy",
        "improvement": "improvement-vs-BP-pct",
    })[["method", "scenario", "mean-detection-time", "mean-false-alarm-pct",
        "mean-final-accuracy", "improvement-vs-BP-pct"]].reset_index(drop=True)


# --- Penetration sweep ---

def _sweep_job(job: Tuple[str, float, int]) -> dict:
    scenario_json, rate, seed = job
    scenario = ScenarioConfig.model_validate_json(scenario_json).with_penetration(rate).with_seed(seed)
    metrics = evaluate_run(run(scenario, seed), scenario, seed)
    return {"rate": rate, **metrics.to_row()}


def penetration_sweep(
    scenario: ScenarioConfig,
    rates: Sequence[float],
    seeds: Sequence[int],
    method: Optional[Method] = None,
    workers: int = 1,
) -> pd.DataFrame:
    """Run every (rate, seed) pair; rows come back sorted by (rate, seed) whatever the worker count."""
    for rate in rates:
        scenario.with_penetration(rate)
    if method is not None:
        scenario = scenario.with_method(method)
    payload = scenario.model_dump_json()
    jobs = [(payload, float(rate), int(seed)) for rate in rates for seed in seeds]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_job, jobs))
    else:
        rows = [_sweep_job(job) for job in jobs]
    logger.info("AnalysisAgent: sweep of '%s' finished %d runs", scenario.name, len(rows))
    frame = pd.DataFrame(rows, columns=["rate"] + RUN_COLUMNS)
    return frame.sort_values(["rate", "seed"], kind="stable").reset_index(drop=True)


def sweep_summary(frame: pd.DataFrame, horizon: float) -> pd.DataFrame:
    """Mean and standard deviation of the run indicators for each rate."""
    frame = frame.assign(detection_time=_censored(frame, horizon))
    summary = frame.groupby("rate").agg(
        runs=("seed", "count"),
        detection_time_mean=("detection_time", "mean"),
        detection_time_std=("detection_time", "std"),
        false_alarm_pct_mean=("false_alarm_pct", "mean"),
        false_alarm_pct_std=("false_alarm_pct", "std"),
        final_accuracy_mean=("final_accuracy", "mean"),
        final_accuracy_std=("final_accuracy", "std"),
    )
    return summary.fillna({c: 0.0 for c in summary.columns if c.endswith("_std")}).reset_index()
