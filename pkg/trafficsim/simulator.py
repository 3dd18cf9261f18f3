# trafficsim/simulator.py

"""
Tick-based simulation of connected vehicles on a segmented road network.

Each tick moves vehicles front to back under a single-lane car-following rule,
admits arrivals, exchanges beacons, detects excessive congestion and runs the
configured decision method. Everything observable goes into an append-only
EventLog that is fully determined by (scenario, seed).
"""

import json
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np
import pandas as pd

from agents.decision_agent import (
    BeaconStats,
    BpState,
    Decision,
    DecisionError,
    Method,
    Report,
    RpMsg,
    RqMsg,
    beta_gate,
    bf_decide,
    bp_step,
    dat_decide,
    vp_decide,
)
from agents.evidence import Cause
from agents.rule_mining import RuleBook
from data_ingestion.preprocess import EVENT_LOG_COLUMNS, read_rulebook
from data_ingestion.scenario_loader import EventConfig, ScenarioConfig
from trafficsim.classifier import classify_surrogate
from trafficsim.network import RoadNetwork, build_network
from trafficsim.radio import SimulationError, broadcast
from trafficsim.training import training_rulebook
from trafficsim.vehicle import (
    JAM_GAP,
    MAX_ACCEL,
    STREAM_CLASSIFIER,
    STREAM_EQUIPPED,
    STREAM_MOBILITY,
    STREAM_SPURIOUS,
    VEHICLE_LENGTH,
    Vehicle,
    approach_speed,
    safe_speed,
    vehicle_rng,
)

logger = logging.getLogger(__name__)

STOPPED_VEHICLE_SPACING = 7.5
EXIT_ZONE = 30.0
ENTRY_CLEARANCE = VEHICLE_LENGTH + JAM_GAP + 3.0
TRUTH_PERSISTENCE = 600.0
ONSET_QUIET_PERIOD = 60.0
FOLLOWING_MARGIN = 1.05


class RecordKind(str, Enum):
    SETUP = "setup"
    ARRIVAL = "arrival"
    DEPARTURE = "departure"
    BEACON_STATS = "beacon-stats"
    CONGESTION_DETECTED = "congestion-detected"
    REPORT_SENT = "report-sent"
    REPORT_RECEIVED = "report-received"
    DECISION = "decision"
    RQ = "rq"
    RP = "rp"


@dataclass(frozen=True)
class LogRecord:
    time: float
    vehicle: int
    kind: RecordKind
    segment: int
    payload: str


class EventLog:
    """Append-only simulation record; timestamps never decrease."""

    def __init__(self):
        self._records: List[LogRecord] = []

    def append(self, time: float, vehicle: int, kind: RecordKind, segment: int, payload: Optional[dict] = None) -> None:
        time = round(time, 6)
        if self._records and time < self._records[-1].time:
            raise SimulationError(f"log time went backwards: {time} after {self._records[-1].time}")
        text = json.dumps(payload or {}, sort_keys=True, separators=(",", ":"))
        self._records.append(LogRecord(time, vehicle, kind, segment, text))

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[LogRecord]:
        return iter(self._records)

    @property
    def records(self) -> List[LogRecord]:
        return list(self._records)

    def count(self, kind: RecordKind) -> int:
        return sum(1 for r in self._records if r.kind is kind)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(r.time, r.vehicle, r.kind.value, r.segment, r.payload) for r in self._records],
            columns=EVENT_LOG_COLUMNS,
        )


@dataclass
class _Arrival:
    time: float
    row: int
    destination: Optional[int] = None


class World:
    """Mutable simulation state for one (scenario, seed) run."""

    def __init__(self, scenario: ScenarioConfig, seed: Optional[int] = None, rulebook: Optional[RuleBook] = None):
        self.scenario = scenario
        self.seed = scenario.seed if seed is None else seed
        self.network: RoadNetwork = build_network(scenario.network)
        self.method: Method = scenario.method.name
        self.time = 0.0
        self.log = EventLog()
        self.vehicles: Dict[int, Vehicle] = {}
        self._next_vid = 0
        self._radio_cache: Optional[Tuple[np.ndarray, np.ndarray]] = None
        self._next_beacon_at = 0.0
        # Segment -> time excessive congestion was first measured there; dropped after a quiet period.
        self.segment_onset: Dict[int, float] = {}
        self._segment_last_congested: Dict[int, float] = {}

        self._queues: Dict[int, List[_Arrival]] = {row: [] for row in range(self.network.rows)}
        self._demand_rngs = {
            row: np.random.default_rng(np.random.SeedSequence([self.seed, 1_000_003, row]))
            for row in range(self.network.rows)
        }
        self._next_arrival = {row: self._draw_gap(self._demand_rngs[row], scenario.demand.arrival_rate, 0.0)
                              for row in range(self.network.rows)}
        self._ingress: Dict[int, Tuple[np.random.Generator, float]] = {}
        for i, event in enumerate(scenario.events):
            if event.kind is Cause.SPECIAL_EVENT and event.ingress_rate > 0:
                rng = np.random.default_rng(np.random.SeedSequence([self.seed, 2_000_003, i]))
                self._ingress[i] = (rng, self._draw_gap(rng, event.ingress_rate, event.start))

        self.rulebook = rulebook
        if self.method.uses_rules and self.rulebook is None:
            if scenario.method.rulebook:
                self.rulebook = read_rulebook(scenario.method.rulebook)
            else:
                self.rulebook = training_rulebook(scenario.classifier, scenario.method)

        self.log.append(0.0, -1, RecordKind.SETUP, -1, {
            "scenario": scenario.name,
            "method": self.method.value,
            "seed": self.seed,
            "penetration": scenario.comms.penetration,
            "segments": len(self.network.segment_ids),
        })

    @staticmethod
    def _draw_gap(rng: np.random.Generator, rate: float, after: float) -> float:
        return after + rng.exponential(1.0 / rate) if rate > 0 else math.inf

    # --- Radio plumbing ---

    def radio_table(self) -> Tuple[np.ndarray, np.ndarray]:
        """Ids and planar positions of the equipped vehicles, cached until vehicles move."""
        if self._radio_cache is None:
            ids = [vid for vid, v in self.vehicles.items() if v.equipped]
            points = np.array(
                [self.network.position(self.vehicles[vid].segment, self.vehicles[vid].offset) for vid in ids]
            ).reshape(-1, 2)
            self._radio_cache = (np.array(ids, dtype=np.int64), points)
        return self._radio_cache

    def deliver(self, receiver_id: int, sender_id: int, payload) -> None:
        receiver = self.vehicles[receiver_id]
        if isinstance(payload, Report):
            receiver.reports[(payload.sender, payload.segment)] = payload
            receiver.dirty_segments.add(payload.segment)
            self.log.append(self.time, receiver_id, RecordKind.REPORT_RECEIVED, receiver.segment, {
                "from": sender_id, "about": payload.segment, "top": payload.top.code,
            })
        elif isinstance(payload, RqMsg):
            receiver.inbox.append(payload)
        elif isinstance(payload, RpMsg):
            self._adopt(receiver, Decision(payload.cause, payload.confidence, Method.BP, self.time, payload.segment))
        else:
            raise SimulationError(f"cannot deliver payload of type {type(payload).__name__}")

    def _adopt(self, vehicle: Vehicle, decision: Decision) -> None:
        _adopt_decision(self, vehicle, decision)

    # --- Ground truth seen by the classifier ---

    def truth_for(self, vehicle: Vehicle, now: float) -> Optional[Cause]:
        """Nearest active event at or downstream of the vehicle, else active weather, else none."""
        nearest: Optional[Tuple[float, Cause]] = None
        weather: Optional[Cause] = None
        for event in self.scenario.events:
            if not event.start <= now < event.end + TRUTH_PERSISTENCE:
                continue
            if event.kind is Cause.WEATHER:
                weather = Cause.WEATHER
                continue
            if self.network.segment(event.segment).row != vehicle.row:
                continue
            if self.network.is_downstream_or_same(vehicle.segment, event.segment):
                ahead = self.network.lane_position(event.segment, 0.0) - self.network.lane_position(vehicle.segment, 0.0)
                if nearest is None or ahead < nearest[0]:
                    nearest = (ahead, event.kind)
        if nearest is not None:
            return nearest[1]
        return weather


def detect_excessive_congestion(vehicle: Vehicle, world: World) -> bool:
    """Travel time on the current segment above threshold-factor x free-flow time."""
    threshold = world.scenario.method.threshold_factor * world.network.free_flow_time(vehicle.segment)
    return vehicle.elapsed_on_segment(world.time) > threshold


def _still_congested(vehicle: Vehicle, world: World) -> bool:
    """Once detected, a vehicle stays congested while slow even after it changes segment."""
    factor = world.scenario.method.threshold_factor
    return detect_excessive_congestion(vehicle, world) or \
        vehicle.trajectory_speed < world.scenario.network.free_flow_speed / factor


# --- Mobility ---

def _weather(world: World, now: float) -> Tuple[float, float]:
    speed_factor, gap_factor = 1.0, 1.0
    for event in world.scenario.events:
        if event.kind is Cause.WEATHER and event.active(now):
            speed_factor = min(speed_factor, event.speed_factor)
            gap_factor = max(gap_factor, event.gap_factor)
    return speed_factor, gap_factor


def _blocking_zone(world: World, event: EventConfig) -> Tuple[float, float]:
    seg = world.network.segment(event.segment)
    length = min(seg.length, event.stopped_vehicles * STOPPED_VEHICLE_SPACING)
    begin = {"beginning": 0.0, "middle": (seg.length - length) / 2.0, "end": seg.length - length}[event.position]
    base = world.network.lane_position(event.segment, 0.0)
    return base + begin, base + begin + length


def _zone_limit(position: float, zone: Tuple[float, float], speed: float) -> float:
    start, end = zone
    if position < start:
        return approach_speed(start - position, speed)
    if position <= end:
        return speed
    return math.inf


def _move(world: World, now: float, dt: float) -> None:
    speed_factor, gap_factor = _weather(world, now)
    zones: Dict[int, List[Tuple[Tuple[float, float], float]]] = {}
    for event in world.scenario.events:
        if event.blocks_lane and event.active(now):
            row = world.network.segment(event.segment).row
            zones.setdefault(row, []).append((_blocking_zone(world, event), event.squeeze_speed))
    exit_speeds = {
        e.segment: e.exit_speed for e in world.scenario.events if e.kind is Cause.SPECIAL_EVENT
    }
    free_flow = world.scenario.network.free_flow_speed
    t_new = now + dt
    departed: List[int] = []

    by_row: Dict[int, List[Vehicle]] = {}
    for v in world.vehicles.values():
        by_row.setdefault(v.row, []).append(v)

    for row, platoon in sorted(by_row.items()):
        # front to back, so each follower sees where its leader ends the tick
        platoon.sort(key=lambda v: -world.network.lane_position(v.segment, v.offset))
        leader_pos: Optional[float] = None
        for v in platoon:
            pos = world.network.lane_position(v.segment, v.offset)
            gap = leader_pos - pos - VEHICLE_LENGTH if leader_pos is not None else math.inf
            v_des = free_flow * v.desired_factor * speed_factor
            v_safe = safe_speed(gap, gap_factor)
            limit = min(v_des, v_safe, v.speed + MAX_ACCEL * dt)
            for zone, squeeze in zones.get(row, ()):
                limit = min(limit, _zone_limit(pos, zone, squeeze))
            if v.destination is not None:
                end = world.network.lane_position(v.destination, world.network.segment(v.destination).length)
                limit = min(limit, _zone_limit(pos, (end - EXIT_ZONE, end), exit_speeds.get(v.destination, 2.0)))
            new_pos = pos + max(0.0, limit) * dt
            # never reverse, never overlap the leader
            if leader_pos is not None:
                new_pos = max(pos, min(new_pos, leader_pos - VEHICLE_LENGTH - 0.5))
            v.speed = (new_pos - pos) / dt
            v.gap = gap if v_safe <= FOLLOWING_MARGIN * v_des else None
            # gaps count only while following; a free driver reports none
            leader_pos = new_pos

            v.offset += new_pos - pos
            while v.offset >= world.network.segment(v.segment).length:
                if v.segment == v.final_segment:
                    departed.append(v.id)
                    leader_pos = None
                    break
                v.offset -= world.network.segment(v.segment).length
                v.route_index += 1
                _enter_segment(world, v, t_new)

    for vid in departed:
        v = world.vehicles.pop(vid)
        world.log.append(t_new, vid, RecordKind.DEPARTURE, v.final_segment, {
            "travel_time": round(t_new - v.entered_network_at, 6),
        })


def _enter_segment(world: World, v: Vehicle, now: float) -> None:
    v.enter_segment(now)
    if v.bp is not None:
        v.bp = v.bp.entered(v.segment)
    # false triggers fire at a random moment within the free-flow traversal
    if v.spurious_rng.random() < world.scenario.classifier.spurious_rate:
        v.spurious_at = now + v.spurious_rng.uniform(0.0, world.network.free_flow_time(v.segment))


def _generate_arrivals(world: World, now: float) -> None:
    demand = world.scenario.demand.arrival_rate
    for row in sorted(world._queues):
        while world._next_arrival[row] <= now:
            world._queues[row].append(_Arrival(world._next_arrival[row], row))
            world._next_arrival[row] = World._draw_gap(world._demand_rngs[row], demand, world._next_arrival[row])
    for i, (rng, due) in sorted(world._ingress.items()):
        event = world.scenario.events[i]
        row = world.network.segment(event.segment).row
        while due <= now and due < event.end:
            world._queues[row].append(_Arrival(due, row, destination=event.segment))
            due = World._draw_gap(rng, event.ingress_rate, due)
        world._ingress[i] = (rng, due)
    for row in world._queues:
        world._queues[row].sort(key=lambda a: (a.time, a.destination is not None))


def _admit(world: World, now: float) -> None:
    penetration = world.scenario.comms.penetration
    for row in sorted(world._queues):
        queue = world._queues[row]
        if not queue:
            continue
        first_segment = world.network.route(row)[0]
        on_row = [v for v in world.vehicles.values() if v.row == row]
        rearmost = min((world.network.lane_position(v.segment, v.offset) for v in on_row), default=math.inf)
        if rearmost < ENTRY_CLEARANCE:
            continue
        # one admission per row per tick; the rest wait in the queue
        arrival = queue.pop(0)
        vid = world._next_vid
        world._next_vid += 1
        equipped = bool(vehicle_rng(world.seed, vid, STREAM_EQUIPPED).random() < penetration)
        mobility = vehicle_rng(world.seed, vid, STREAM_MOBILITY)
        factor = float(np.clip(mobility.normal(1.0, world.scenario.demand.speed_factor_std), 0.8, 1.2))
        gap = rearmost - VEHICLE_LENGTH
        v = Vehicle(
            id=vid,
            equipped=equipped,
            row=row,
            route=world.network.route(row),
            desired_factor=factor,
            entered_network_at=now,
            destination=arrival.destination,
            speed=min(world.scenario.network.free_flow_speed * factor, safe_speed(gap, _weather(world, now)[1])),
            classifier_rng=vehicle_rng(world.seed, vid, STREAM_CLASSIFIER),
            spurious_rng=vehicle_rng(world.seed, vid, STREAM_SPURIOUS),
        )
        v.trajectory_speed = v.speed
        world.vehicles[vid] = v
        _enter_segment(world, v, now)
        world.log.append(now, vid, RecordKind.ARRIVAL, first_segment, {
            "equipped": equipped,
            "queued_since": round(arrival.time, 6),
            "destination": arrival.destination,
        })


# --- Communication and decisions ---

def _beacons(world: World, now: float) -> None:
    interval = world.scenario.comms.beacon_interval
    ids, points = world.radio_table()
    radio_range = world.scenario.comms.radio_range
    neighbours: Dict[int, int] = {}
    if len(ids):
        diff = points[:, None, :] - points[None, :, :]
        in_range = np.hypot(diff[..., 0], diff[..., 1]) <= radio_range
        counts = in_range.sum(axis=1) - 1
        neighbours = {int(vid): int(c) for vid, c in zip(ids, counts)}
    for vid in sorted(world.vehicles):
        v = world.vehicles[vid]
        v.travel_time = v.elapsed_on_segment(now)
        v.update_speed_average(interval)
        v.demand = neighbours.get(vid, 0) if v.equipped else 0
        world.log.append(now, vid, RecordKind.BEACON_STATS, v.segment, {
            "equipped": v.equipped,
            "speed": round(v.speed, 4),
            "travel_time": round(v.travel_time, 4),
            "trajectory_speed": round(v.trajectory_speed, 4),
            "demand": v.demand,
            "gap": None if v.gap is None else round(v.gap, 4),
        })


def _classify(world: World, v: Vehicle, now: float):
    return classify_surrogate(v, world.truth_for(v, now), world.scenario.classifier)


def _send_report(world: World, v: Vehicle, now: float, initiation: bool) -> None:
    vector = _classify(world, v, now)
    report = Report.from_vector(v.id, v.segment, now, vector, world.scenario.classifier.ignorance)
    world.log.append(now, v.id, RecordKind.REPORT_SENT, v.segment, {
        "initiation": initiation,
        "top": report.top.code,
        "vector": [round(p, 6) for p in vector.p],
    })
    v.reports[(v.id, v.segment)] = report
    v.dirty_segments.add(v.segment)
    v.last_report_at = now
    v.cooperating = True
    broadcast(world, v.id, report)


def _cooperate(world: World, v: Vehicle, now: float, detected: bool) -> None:
    """VP, BF, DAT and beta-dat: initiate, re-broadcast, or wait for the gate."""
    cfg = world.scenario.method
    if detected:
        if world.method is Method.BETA_DAT and not v.cooperating:
            v.pending_journey_time = v.elapsed_on_segment(now)
        else:
            _send_report(world, v, now, initiation=True)
            return
    if v.pending_journey_time is not None and not v.cooperating:
        # The gate runs from the segment's onset, so vehicles that leave the queue
        # early do not restart the clock for the ones behind them.
        onset = world.segment_onset.get(v.segment)
        if v.detected_on_traversal and onset is not None and \
                beta_gate(now, onset, cfg.gate, v.pending_journey_time) and _still_congested(v, world):
            v.pending_journey_time = None
            _send_report(world, v, now, initiation=True)
        return
    if v.cooperating and v.congested_since is not None and \
            now - v.last_report_at >= world.scenario.comms.report_interval - 1e-9:
        _send_report(world, v, now, initiation=False)


def _run_bp(world: World, v: Vehicle, now: float, triggered: bool) -> None:
    cfg = world.scenario.method
    if v.bp is None:
        v.bp = BpState(v.id, v.segment, retention=cfg.retention, threshold_factor=cfg.threshold_factor)
    observations = [BeaconStats(
        travel_time=v.elapsed_on_segment(now),
        speed=v.speed,
        demand=v.demand,
        gap=v.gap if v.gap is not None else math.inf,
        free_flow_time=world.network.free_flow_time(v.segment),
    )] + v.inbox
    v.inbox = []
    v.bp, outgoing = bp_step(v.bp, observations, now, classify=lambda: _classify(world, v, now).top, triggered=triggered)
    sender_pos = world.network.lane_position(v.segment, v.offset)
    for msg in outgoing:
        if isinstance(msg, RqMsg):
            origin = msg.origin == v.id
            world.log.append(now, v.id, RecordKind.RQ, v.segment, {
                "role": "origin" if origin else "relay",
                "rq_id": msg.rq_id,
                "cause": msg.cause.code,
                "about": msg.segment,
                "hops": msg.hops,
            })
            broadcast(world, v.id, msg, accept=lambda r: world.vehicles[r].row == v.row and
                      world.network.lane_position(world.vehicles[r].segment, world.vehicles[r].offset) <= sender_pos)
        else:
            world.log.append(now, v.id, RecordKind.RP, v.segment, {
                "rq_id": msg.rq_id,
                "cause": msg.cause.code,
                "about": msg.segment,
            })
            targets = world.network.adjacent(msg.segment) | {msg.segment}
            world._adopt(v, Decision(msg.cause, msg.confidence, Method.BP, now, msg.segment))
            broadcast(world, v.id, msg, accept=lambda r: world.vehicles[r].segment in targets)


def _decide(world: World, v: Vehicle, now: float) -> None:
    """Recompute decisions for segments whose report collection changed."""
    cfg = world.scenario.method
    horizon = cfg.report_horizon
    stale = [key for key, r in v.reports.items() if now - r.timestamp > horizon]
    for key in stale:
        del v.reports[key]
    latest: Optional[Decision] = None
    for segment in sorted(v.dirty_segments):
        reports = [r for (_, seg), r in sorted(v.reports.items()) if seg == segment]
        if not reports:
            continue
        try:
            if world.method is Method.VP:
                decision = vp_decide(reports)
            elif world.method is Method.BF:
                decision = bf_decide(reports, cfg.rule)
            else:
                decision = dat_decide(reports, world.rulebook, cfg.rule, method=world.method)
        except DecisionError as exc:
            logger.warning("Simulator: vehicle %d skipped a decision on segment %d: %s", v.id, segment, exc)
            continue
        v.decisions[segment] = decision
        latest = decision
    v.dirty_segments.clear()
    if latest is not None:
        world._adopt(v, Decision(latest.cause, latest.confidence, latest.method, now, latest.segment))


def _adopt_decision(world: World, v: Vehicle, decision: Decision) -> None:
    """Make `decision` current; log it only when the cause changes."""
    previous = v.current
    v.current = decision
    if previous is None or previous.cause != decision.cause:
        world.log.append(world.time, v.id, RecordKind.DECISION, v.segment, {
            "cause": decision.cause.code,
            "confidence": round(float(decision.confidence), 6),
            "method": decision.method.value,
            "about": decision.segment,
        })


def _expire_onsets(world: World, now: float) -> None:
    """Forget a segment's onset once no equipped vehicle has been congested on it for a while."""
    for v in world.vehicles.values():
        if v.equipped and v.congested_since is not None and v.segment in world.segment_onset and \
                _still_congested(v, world):
            world._segment_last_congested[v.segment] = now
    for segment in list(world.segment_onset):
        if now - world._segment_last_congested[segment] >= ONSET_QUIET_PERIOD - 1e-9:
            del world.segment_onset[segment]
            del world._segment_last_congested[segment]


def _communicate(world: World, now: float) -> None:
    for vid in sorted(world.vehicles):
        v = world.vehicles.get(vid)
        if v is None or not v.equipped:
            continue
        spurious = v.spurious_at is not None and now >= v.spurious_at and not v.detected_on_traversal
        congested = detect_excessive_congestion(v, world)
        detected = False
        if (congested or spurious) and not v.detected_on_traversal:
            v.detected_on_traversal = True
            detected = True
            if v.congested_since is None:
                v.congested_since = now
            if congested:
                world.segment_onset.setdefault(v.segment, now)
                world._segment_last_congested[v.segment] = now
            world.log.append(now, vid, RecordKind.CONGESTION_DETECTED, v.segment, {
                "spurious": bool(spurious and not congested),
                "travel_time": round(v.elapsed_on_segment(now), 4),
            })
        elif v.congested_since is not None and not _still_congested(v, world):
            v.congested_since = None
            v.pending_journey_time = None
            v.cooperating = False

        if world.method is Method.BP:
            _run_bp(world, v, now, triggered=detected and not congested)
        else:
            _cooperate(world, v, now, detected)

    _expire_onsets(world, now)

    if world.method is not Method.BP:
        for vid in sorted(world.vehicles):
            v = world.vehicles[vid]
            if v.equipped and v.dirty_segments:
                _decide(world, v, now)


# --- Public operations ---

def step(world: World, dt: Optional[float] = None) -> World:
    """Advance the world by dt seconds (default: one beacon interval)."""
    dt = world.scenario.comms.beacon_interval if dt is None else dt
    if dt <= 0:
        raise SimulationError(f"dt must be positive, got {dt}")
    now = world.time
    t_new = round(now + dt, 9)
    _move(world, now, dt)
    world.time = t_new
    _generate_arrivals(world, t_new)
    _admit(world, t_new)
    world._radio_cache = None
    if t_new >= world._next_beacon_at - 1e-9:
        _beacons(world, t_new)
        world._next_beacon_at = t_new + world.scenario.comms.beacon_interval
    _communicate(world, t_new)
    _check_invariants(world)
    return world


def _check_invariants(world: World) -> None:
    for v in world.vehicles.values():
        length = world.network.segment(v.segment).length
        if not (0.0 <= v.offset <= length + 1e-6) or v.speed < 0:
            raise SimulationError(f"vehicle {v.id} left its segment bounds: offset {v.offset}, speed {v.speed}")
        if not v.equipped and (v.reports or v.inbox):
            raise SimulationError(f"unequipped vehicle {v.id} holds received messages")


def run(scenario: ScenarioConfig, seed: Optional[int] = None, rulebook: Optional[RuleBook] = None) -> EventLog:
    """Simulate from t=0 to the scenario horizon and return the complete log."""
    world = World(scenario, seed, rulebook)
    dt = scenario.comms.beacon_interval
    ticks = int(round(scenario.horizon / dt))
    logger.info(
        "Simulator: running '%s' with %s, seed %d, penetration %.2f (%d ticks)",
        scenario.name, world.method.value, world.seed, scenario.comms.penetration, ticks,
    )
    for _ in range(ticks):
        step(world, dt)
    logger.info("Simulator: finished '%s' seed %d with %d log records", scenario.name, world.seed, len(world.log))
    return world.log
