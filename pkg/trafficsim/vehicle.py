# trafficsim/vehicle.py

"""Vehicle state and the car-following helpers that move it."""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

import numpy as np

from agents.decision_agent import BpState, Decision, Report, RqMsg

# Car-following constants (m, s, m/s^2).
VEHICLE_LENGTH = 5.0
JAM_GAP = 2.0          # bumper-to-bumper distance at standstill
TIME_HEADWAY = 1.5
MAX_ACCEL = 2.0
COMFORT_DECEL = 2.0
SPEED_EMA_WINDOW = 30.0  # horizon of the trajectory speed average

# Independent per-vehicle random streams.
STREAM_EQUIPPED = 0
STREAM_MOBILITY = 1
STREAM_CLASSIFIER = 2
STREAM_SPURIOUS = 3


def vehicle_rng(seed: int, vid: int, stream: int) -> np.random.Generator:
    """Generator keyed on (seed, vehicle, stream); the same vehicle draws the same numbers in every method run."""
    return np.random.default_rng(np.random.SeedSequence([seed, vid, stream]))


@dataclass
class Vehicle:
    """
    A simulated vehicle plus the per-trajectory aggregates it derives from
    beacons: current travel time, trajectory speed, demand and gap.
    """

    id: int
    equipped: bool
    row: int
    route: List[int]
    desired_factor: float
    entered_network_at: float
    destination: Optional[int] = None
    route_index: int = 0
    offset: float = 0.0
    speed: float = 0.0
    segment_entered_at: float = 0.0

    # Beacon aggregates for the current trajectory.
    travel_time: float = 0.0
    trajectory_speed: float = 0.0
    demand: int = 0
    gap: Optional[float] = None

    # Cooperation state. A vehicle detects at most once per segment traversal.
    detected_on_traversal: bool = False
    spurious_at: Optional[float] = None
    congested_since: Optional[float] = None
    pending_journey_time: Optional[float] = None  # set while a beta-dat vehicle waits for its gate
    cooperating: bool = False
    last_report_at: Optional[float] = None

    # Reports keyed by (sender, segment); a newer report from the same sender replaces the older one.
    reports: Dict[Tuple[int, int], Report] = field(default_factory=dict)
    dirty_segments: Set[int] = field(default_factory=set)
    decisions: Dict[int, Decision] = field(default_factory=dict)
    current: Optional[Decision] = None
    bp: Optional[BpState] = None
    inbox: List[RqMsg] = field(default_factory=list)

    classifier_rng: Optional[np.random.Generator] = field(default=None, repr=False)
    spurious_rng: Optional[np.random.Generator] = field(default=None, repr=False)

    @property
    def segment(self) -> int:
        return self.route[self.route_index]

    @property
    def position(self) -> Tuple[int, float]:
        return self.segment, self.offset

    @property
    def final_segment(self) -> int:
        return self.destination if self.destination is not None else self.route[-1]

    def elapsed_on_segment(self, now: float) -> float:
        return now - self.segment_entered_at

    def update_speed_average(self, dt: float) -> None:
        """Exponential moving average of speed with a SPEED_EMA_WINDOW time constant."""
        alpha = min(1.0, dt / SPEED_EMA_WINDOW)
        self.trajectory_speed += alpha * (self.speed - self.trajectory_speed)

    def enter_segment(self, now: float) -> None:
        """Reset the per-traversal state when the vehicle crosses into its next segment."""
        self.segment_entered_at = now
        self.travel_time = 0.0
        self.detected_on_traversal = False
        self.spurious_at = None


def safe_speed(gap: float, gap_factor: float) -> float:
    """Speed at which the current gap equals the (scaled) desired following distance."""
    if math.isinf(gap):
        return math.inf
    return max(0.0, (gap - gap_factor * JAM_GAP) / (gap_factor * TIME_HEADWAY))


def approach_speed(distance: float, target_speed: float) -> float:
    """Highest speed that can still brake to target_speed within distance."""
    return math.sqrt(target_speed * target_speed + 2.0 * COMFORT_DECEL * max(0.0, distance))
