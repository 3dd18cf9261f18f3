# agents/decision_agent.py

"""
Per-vehicle decision modules: voting (VP), belief-function fusion (BF), BF with
mined correction rules (DAT), the time-gated variant (beta-dat) and the
back-propagation baseline (BP) automaton.
"""

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, FrozenSet, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field

from agents.evidence import (
    DEFAULT_IGNORANCE,
    Cause,
    CauseVector,
    EvidenceError,
    MassFunction,
    conjunctive_fold,
    mass_from_cause_vector,
    members,
    pignistic,
)
from agents.rule_mining import RuleBook

logger = logging.getLogger(__name__)


class DecisionError(ValueError):
    """Raised when reports cannot produce a decision."""


class Method(str, Enum):
    BP = "BP"
    VP = "VP"
    BF = "BF"
    DAT = "DAT"
    BETA_DAT = "beta-dat"

    @classmethod
    def from_name(cls, name: str) -> "Method":
        key = name.strip().lower().replace("β", "beta-").replace("beta--", "beta-")
        for method in cls:
            if method.value.lower() == key:
                return method
        raise DecisionError(f"unknown method '{name}'")

    @property
    def cooperative(self) -> bool:
        return self is not Method.BP

    @property
    def uses_rules(self) -> bool:
        return self in (Method.DAT, Method.BETA_DAT)


# --- Reports and decisions ---

@dataclass(frozen=True)
class Report:
    sender: int
    segment: int
    timestamp: float
    vector: CauseVector
    mass: MassFunction

    @classmethod
    def from_vector(
        cls, sender: int, segment: int, timestamp: float, vector: CauseVector,
        ignorance: float = DEFAULT_IGNORANCE,
    ) -> "Report":
        return cls(sender, segment, timestamp, vector, mass_from_cause_vector(vector, ignorance))

    @property
    def report_id(self) -> str:
        return f"{self.sender}@{self.timestamp:g}"

    @property
    def top(self) -> Cause:
        return self.vector.top


@dataclass(frozen=True)
class Decision:
    cause: Cause
    confidence: float
    method: Method
    decided_at: float
    segment: int


def _check_reports(reports: Sequence[Report]) -> int:
    if not reports:
        raise DecisionError("no votes")
    segments = {r.segment for r in reports}
    if len(segments) > 1:
        raise DecisionError(f"reports span several segments: {sorted(segments)}")
    return next(iter(segments))


def _canonical(reports: Sequence[Report]) -> List[Report]:
    # Folding in a fixed order makes fused results identical for any permutation.
    return sorted(reports, key=lambda r: (r.sender, r.timestamp, r.vector.p))


def vp_decide(reports: Sequence[Report]) -> Decision:
    """Count each report's top cause; the most voted cause wins, lowest index on ties."""
    segment = _check_reports(reports)
    counts = np.bincount([int(r.top) for r in reports], minlength=len(Cause))
    winner = Cause(int(np.argmax(counts)))
    return Decision(
        cause=winner,
        confidence=counts[winner] / len(reports),
        method=Method.VP,
        decided_at=max(r.timestamp for r in reports),
        segment=segment,
    )


def fuse_reports(reports: Sequence[Report], rule: str = "conjunctive") -> CauseVector:
    """Combine the report masses and return the pignistic vector."""
    _check_reports(reports)
    ordered = _canonical(reports)
    ids = ", ".join(r.report_id for r in ordered)
    try:
        combined = conjunctive_fold([r.mass for r in ordered], rule)
        return pignistic(combined)
    except EvidenceError as exc:
        raise DecisionError(f"total conflict among reports [{ids}]: {exc}") from exc


def bf_decide(reports: Sequence[Report], rule: str = "conjunctive") -> Decision:
    segment = _check_reports(reports)
    betp = fuse_reports(reports, rule)
    winner = betp.top
    return Decision(winner, betp[winner], Method.BF, max(r.timestamp for r in reports), segment)


def dat_decide(
    reports: Sequence[Report], rulebook: RuleBook, rule: str = "conjunctive",
    method: Method = Method.DAT,
) -> Decision:
    """
    BF decision corrected by at most one supervised rule.

    A correction {g, l} -> {l} applies when the BF winner is g and l is the top
    cause of at least one report. Rules are tried in rulebook order.
    """
    segment = _check_reports(reports)
    betp = fuse_reports(reports, rule)
    winner = betp.top
    decided_at = max(r.timestamp for r in reports)
    present = {r.top for r in reports}
    for correction in rulebook.supervised_rules:
        if correction.antecedent != winner.bit:
            continue
        target = members(correction.consequent)[0]
        if target in present and target != winner:
            logger.debug("DecisionAgent: rule %s flips %s to %s on segment %d", correction, winner.code, target.code, segment)
            return Decision(target, betp[target], method, decided_at, segment)
    return Decision(winner, betp[winner], method, decided_at, segment)


# --- Time gate ---

class BetaGateConfig(BaseModel):
    beta: float = Field(240.0, ge=0.0)
    adaptive: bool = False

    def effective_beta(self, journey_time: Optional[float] = None) -> float:
        """Fixed beta, or twice the link journey time estimate when adaptive."""
        if self.adaptive:
            if journey_time is None:
                raise DecisionError("adaptive beta needs a link journey time estimate")
            return 2.0 * journey_time
        return self.beta


def beta_gate(now: float, onset: float, cfg: BetaGateConfig, journey_time: Optional[float] = None) -> bool:
    return now - onset >= cfg.effective_beta(journey_time) - 1e-9


# --- Back-propagation baseline ---

class BpPhase(str, Enum):
    IDLE = "idle"
    RQ_RETAINED = "rq-retained"
    RP_PROPAGATED = "rp-propagated"


@dataclass(frozen=True)
class BeaconStats:
    """Aggregates a vehicle derives from beacons on its current segment."""

    travel_time: float
    speed: float
    demand: int
    gap: float
    free_flow_time: float


@dataclass(frozen=True)
class RqMsg:
    rq_id: str
    origin: int
    segment: int
    cause: Cause
    created_at: float
    hops: int = 0


@dataclass(frozen=True)
class RpMsg:
    rq_id: str
    sender: int
    segment: int
    cause: Cause
    sent_at: float
    confidence: float = 1.0


BpObservation = Union[BeaconStats, RqMsg]
BpMessage = Union[RqMsg, RpMsg]


@dataclass(frozen=True)
class BpState:
    vehicle: int
    segment: int
    retention: float = 480.0
    threshold_factor: float = 2.0
    phase: BpPhase = BpPhase.IDLE
    rq_created_at: Optional[float] = None
    rq_id: Optional[str] = None
    rq_segment: Optional[int] = None
    cause: Optional[Cause] = None
    travel_time: float = 0.0
    speed: float = 0.0
    demand: int = 0
    gap: float = math.inf
    free_flow_time: Optional[float] = None
    relayed: FrozenSet[str] = frozenset()
    pending: Tuple[RqMsg, ...] = ()
    ignored: int = 0

    def entered(self, segment: int) -> "BpState":
        """Move to a new segment; a retained RQ travels with the vehicle."""
        if self.phase is BpPhase.RQ_RETAINED:
            return replace(self, segment=segment, travel_time=0.0, free_flow_time=None)
        return replace(
            self, segment=segment, phase=BpPhase.IDLE, rq_created_at=None, rq_id=None,
            rq_segment=None, cause=None, travel_time=0.0, free_flow_time=None,
        )


def _valid_stats(obs: BeaconStats) -> bool:
    values = (obs.travel_time, obs.speed, obs.gap, obs.free_flow_time)
    return all(not math.isnan(v) for v in values) and obs.travel_time >= 0 and obs.speed >= 0 \
        and obs.demand >= 0 and obs.free_flow_time > 0


def bp_step(
    state: BpState,
    observations: Sequence[BpObservation],
    now: float,
    classify: Optional[Callable[[], Cause]] = None,
    triggered: bool = False,
) -> Tuple[BpState, List[BpMessage]]:
    """
    Advance one vehicle's BP automaton.

    (1) beacon aggregates update travel time, speed, demand and gap; (2) travel
    time above threshold classifies the congestion; (3) an RQ is created and
    sent backwards, and RQs heard from downstream are retained and relayed once;
    (4) once the retention duration has elapsed an RP with confidence 1 goes out.
    `triggered` reports a detection from outside the beacon aggregates, such as
    a spurious sensor reading, and counts as a threshold crossing.
    """
    outgoing: List[BpMessage] = []
    ignored = 0
    for obs in observations:
        if isinstance(obs, BeaconStats) and _valid_stats(obs):
            state = replace(
                state, travel_time=obs.travel_time, speed=obs.speed, demand=obs.demand,
                gap=obs.gap, free_flow_time=obs.free_flow_time,
            )
        elif isinstance(obs, RqMsg):
            if obs.origin == state.vehicle or obs.rq_id in state.relayed:
                continue
            relay = replace(obs, hops=obs.hops + 1)
            outgoing.append(relay)
            state = replace(state, relayed=state.relayed | {obs.rq_id}, pending=state.pending + (obs,))
            if state.phase is BpPhase.IDLE:
                state = replace(
                    state, phase=BpPhase.RQ_RETAINED, rq_created_at=obs.created_at,
                    rq_id=obs.rq_id, rq_segment=obs.segment, cause=obs.cause,
                )
        else:
            ignored += 1
    if ignored:
        logger.warning("DecisionAgent: vehicle %d ignored %d malformed BP observations", state.vehicle, ignored)
        state = replace(state, ignored=state.ignored + ignored)

    threshold_crossed = (
        state.free_flow_time is not None
        and state.travel_time > state.threshold_factor * state.free_flow_time
    )
    if state.phase is BpPhase.IDLE and (threshold_crossed or triggered) and classify is not None:
        cause = classify()
        rq = RqMsg(f"{state.vehicle}:{now:g}", state.vehicle, state.segment, cause, now)
        outgoing.append(rq)
        state = replace(
            state, phase=BpPhase.RQ_RETAINED, rq_created_at=now, rq_id=rq.rq_id,
            rq_segment=state.segment, cause=cause, relayed=state.relayed | {rq.rq_id},
        )

    due = [rq for rq in state.pending if now - rq.created_at >= state.retention - 1e-9]
    if due:
        for rq in due:
            if rq.rq_id != state.rq_id:
                outgoing.append(RpMsg(rq.rq_id, state.vehicle, rq.segment, rq.cause, now))
        state = replace(state, pending=tuple(rq for rq in state.pending if rq not in due))

    if state.phase is BpPhase.RQ_RETAINED and now - state.rq_created_at >= state.retention - 1e-9:
        outgoing.append(RpMsg(state.rq_id, state.vehicle, state.rq_segment, state.cause, now))
        state = replace(state, phase=BpPhase.RP_PROPAGATED)

    return state, outgoing
