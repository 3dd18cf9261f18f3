# data_ingestion/scenario_loader.py

"""
Scenario files: TOML with [network], [demand], [[events]], [comms],
[classifier] and [method] sections, validated into pydantic models.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import toml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from agents.decision_agent import BetaGateConfig, Method
from agents.evidence import Cause, EvidenceError
from agents.rule_mining import MiningConfig

logger = logging.getLogger(__name__)

BUNDLED_SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"

# Rows: true cause I, Wo, We, SE, Re, then the "none" row for false-alarm paths.
# Columns: reported top cause in the same order.
DEFAULT_CONFUSION: List[List[float]] = [
    [0.84, 0.10, 0.00, 0.04, 0.02],
    [0.10, 0.84, 0.00, 0.04, 0.02],
    [0.00, 0.00, 0.65, 0.05, 0.30],
    [0.04, 0.04, 0.06, 0.84, 0.02],
    [0.00, 0.00, 0.10, 0.10, 0.80],
    [0.15, 0.10, 0.10, 0.15, 0.50],
]
NONE_ROW = 5


class ScenarioError(ValueError):
    """Raised when a scenario cannot be found, parsed or validated."""


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class NetworkConfig(_Section):
    topology: Literal["corridor", "grid"] = "corridor"
    segments: int = Field(10, ge=1)
    rows: int = Field(1, ge=1)
    segment_length: float = Field(300.0, gt=0)
    free_flow_speed: float = Field(13.9, gt=0)
    row_spacing: float = Field(500.0, gt=0)

    @model_validator(mode="after")
    def _corridor_has_one_row(self):
        if self.topology == "corridor" and self.rows != 1:
            raise ValueError("a corridor has exactly one row")
        return self

    @property
    def n_segments(self) -> int:
        return self.segments * self.rows


class DemandConfig(_Section):
    arrival_rate: float = Field(0.15, ge=0)
    speed_factor_std: float = Field(0.08, ge=0)
    horizon: float = Field(7200.0, gt=0)


_EVENT_DEFAULTS = {
    Cause.INCIDENT: {"squeeze_speed": 0.5},
    Cause.WORKZONE: {"squeeze_speed": 1.0},
}


class EventConfig(_Section):
    kind: Cause
    segment: int = Field(0, ge=0)
    position: Literal["beginning", "middle", "end"] = "middle"
    start: float = Field(0.0, ge=0)
    duration: float = Field(..., gt=0)
    stopped_vehicles: int = Field(2, ge=1)
    squeeze_speed: Optional[float] = Field(None, gt=0)
    speed_factor: float = Field(0.4, gt=0, le=1)
    gap_factor: float = Field(3.0, ge=1)
    ingress_rate: float = Field(0.1, ge=0)
    exit_speed: float = Field(2.0, gt=0)
    impact_radius: float = Field(300.0, ge=0)

    @field_validator("kind", mode="before")
    @classmethod
    def _parse_kind(cls, value):
        if isinstance(value, str):
            try:
                return Cause.from_code(value)
            except EvidenceError as exc:
                raise ValueError(str(exc)) from exc
        return value

    @model_validator(mode="after")
    def _check_kind(self):
        if self.kind is Cause.RECURRENT:
            raise ValueError("Recurrent congestion is a demand condition, not an injectable event")
        if self.squeeze_speed is None and self.kind in _EVENT_DEFAULTS:
            object.__setattr__(self, "squeeze_speed", _EVENT_DEFAULTS[self.kind]["squeeze_speed"])
        return self

    @property
    def end(self) -> float:
        return self.start + self.duration

    @property
    def blocks_lane(self) -> bool:
        return self.kind in (Cause.INCIDENT, Cause.WORKZONE)

    def active(self, t: float) -> bool:
        return self.start <= t < self.end


class CommsConfig(_Section):
    penetration: float = 1.0
    beacon_interval: float = Field(0.1, gt=0)
    radio_range: float = Field(300.0, gt=0)
    report_interval: float = Field(10.0, gt=0)

    @field_validator("penetration")
    @classmethod
    def _penetration_range(cls, value: float) -> float:
        if not 0.0 <= value <= 1.0:
            raise ValueError("penetration out of range")
        return value


class ClassifierConfig(_Section):
    confusion: List[List[float]] = Field(default_factory=lambda: [list(r) for r in DEFAULT_CONFUSION])
    band: Tuple[float, float] = (0.3, 0.7)
    se_second_bias: float = Field(0.97, ge=0, le=1)
    truth_second_rate: float = Field(0.8, ge=0, le=1)
    spurious_rate: float = Field(0.005, ge=0, le=1)
    ignorance: float = Field(0.1, ge=0, lt=1)

    @field_validator("confusion")
    @classmethod
    def _row_stochastic(cls, rows: List[List[float]]) -> List[List[float]]:
        if len(rows) == len(Cause):
            rows = [list(r) for r in rows] + [list(DEFAULT_CONFUSION[NONE_ROW])]
        if len(rows) != len(Cause) + 1:
            raise ValueError(f"needs {len(Cause)} cause rows plus an optional 'none' row, got {len(rows)}")
        for i, row in enumerate(rows, start=1):
            if len(row) != len(Cause):
                raise ValueError(f"row {i} has {len(row)} entries, expected {len(Cause)}")
            if any(p < 0 for p in row):
                raise ValueError(f"row {i} has a negative entry")
            total = sum(row)
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"row {i} sums to {total:g}")
        return rows

    @field_validator("band")
    @classmethod
    def _band_order(cls, band: Tuple[float, float]) -> Tuple[float, float]:
        low, high = band
        # below 0.25 the top cause can no longer dominate the runner-up share
        if not 0.25 <= low < high <= 0.95:
            raise ValueError(f"band must satisfy 0.25 <= low < high <= 0.95, got {band}")
        return band

    def row_for(self, truth: Optional[Cause]) -> List[float]:
        return self.confusion[NONE_ROW if truth is None else int(truth)]


class MethodConfig(_Section):
    name: Method = Method.VP
    threshold_factor: float = Field(2.0, gt=1.0)
    retention: float = Field(480.0, ge=0)
    beta: float = Field(240.0, ge=0)
    beta_mode: Literal["fixed", "adaptive"] = "fixed"
    rule: Literal["conjunctive", "dempster"] = "conjunctive"
    report_horizon: float = Field(600.0, gt=0)
    minsup: float = Field(0.25, gt=0, le=1)
    mincon: float = Field(0.8, gt=0, le=1)
    rulebook: Optional[str] = None
    training_size: int = Field(200, ge=1)
    training_seed: int = 0

    @field_validator("name", mode="before")
    @classmethod
    def _parse_method(cls, value):
        if isinstance(value, str):
            return Method.from_name(value)
        return value

    @property
    def gate(self) -> BetaGateConfig:
        return BetaGateConfig(beta=self.beta, adaptive=self.beta_mode == "adaptive")

    @property
    def mining(self) -> MiningConfig:
        return MiningConfig(minsup=self.minsup, mincon=self.mincon)


class ScenarioConfig(_Section):
    name: str = "scenario"
    description: str = ""
    seed: int = 0
    network: NetworkConfig = Field(default_factory=NetworkConfig)
    demand: DemandConfig = Field(default_factory=DemandConfig)
    events: List[EventConfig] = Field(default_factory=list)
    comms: CommsConfig = Field(default_factory=CommsConfig)
    classifier: ClassifierConfig = Field(default_factory=ClassifierConfig)
    method: MethodConfig = Field(default_factory=MethodConfig)

    @model_validator(mode="after")
    def _events_on_network(self):
        for i, event in enumerate(self.events):
            if event.segment >= self.network.n_segments:
                raise ValueError(f"event {i} sits on segment {event.segment}, network has {self.network.n_segments}")
        return self

    @property
    def horizon(self) -> float:
        return self.demand.horizon

    def with_method(self, method: Union[Method, str]) -> "ScenarioConfig":
        name = Method.from_name(method) if isinstance(method, str) else method
        return self.model_copy(update={"method": self.method.model_copy(update={"name": name})})

    def with_penetration(self, rate: float) -> "ScenarioConfig":
        try:
            comms = CommsConfig(**{**self.comms.model_dump(), "penetration": rate})
        except ValidationError as exc:
            raise ScenarioError(_describe(exc)) from exc
        return self.model_copy(update={"comms": comms})

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return self.model_copy(update={"seed": seed})


def _describe(exc: ValidationError) -> str:
    problems = []
    for err in exc.errors():
        where = ".".join(str(part) for part in err["loc"])
        message = err["msg"].removeprefix("Value error, ")
        problems.append(f"{where}: {message}" if where else message)
    return "; ".join(problems)


def scenario_from_dict(data: Dict[str, Any], name: Optional[str] = None) -> ScenarioConfig:
    payload = dict(data)
    if name and "name" not in payload:
        payload["name"] = name
    try:
        return ScenarioConfig(**payload)
    except ValidationError as exc:
        raise ScenarioError(f"scenario '{payload.get('name', name)}': {_describe(exc)}") from exc


def resolve_scenario_path(ref: Union[str, Path], scenario_dir: Optional[Path] = None) -> Path:
    """A scenario reference is a file path or the name of a bundled scenario."""
    path = Path(ref)
    if path.is_file():
        return path
    directory = Path(scenario_dir) if scenario_dir else BUNDLED_SCENARIO_DIR
    candidate = directory / f"{ref}.toml"
    if candidate.is_file():
        return candidate
    raise ScenarioError(f"scenario '{ref}' not found (looked for a file and in {directory})")


def load_scenario(ref: Union[str, Path], scenario_dir: Optional[Path] = None) -> ScenarioConfig:
    path = resolve_scenario_path(ref, scenario_dir)
    try:
        data = toml.load(path)
    except toml.TomlDecodeError as exc:
        raise ScenarioError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    scenario = scenario_from_dict(data, name=path.stem)
    logger.info(
        "ScenarioLoader: loaded '%s' (%d events, method %s, penetration %.2f)",
        scenario.name, len(scenario.events), scenario.method.name.value, scenario.comms.penetration,
    )
    return scenario


def bundled_scenarios(scenario_dir: Optional[Path] = None) -> List[str]:
    directory = Path(scenario_dir) if scenario_dir else BUNDLED_SCENARIO_DIR
    return sorted(p.stem for p in directory.glob("*.toml"))
