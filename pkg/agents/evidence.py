# agents/evidence.py

"""
Belief-function core over the fixed five-cause congestion frame.

Subsets of the frame are 5-bit masks (Incident = bit 0 ... Recurrent = bit 4).
Mass functions are immutable values holding only their focal elements; every
combination is computed over a dense 32-slot array with numpy and converted
back, dropping zero-mass subsets.
"""

import logging
import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)

MASS_TOLERANCE = 1e-9
DEFAULT_IGNORANCE = 0.1


class EvidenceError(ValueError):
    """Raised for invalid masses, undefined combinations and empty folds."""


# --- Frame of discernment ---

class Cause(IntEnum):
    INCIDENT = 0
    WORKZONE = 1
    WEATHER = 2
    SPECIAL_EVENT = 3
    RECURRENT = 4

    @property
    def code(self) -> str:
        return CAUSE_CODES[self]

    @property
    def bit(self) -> int:
        return 1 << int(self)

    @classmethod
    def from_code(cls, text: str) -> "Cause":
        key = text.strip()
        for cause in cls:
            if key == cause.code or key.lower() == cause.name.lower().replace("_", ""):
                return cause
        raise EvidenceError(f"unknown cause code '{text}'")


CAUSE_CODES: Dict[Cause, str] = {
    Cause.INCIDENT: "I",
    Cause.WORKZONE: "Wo",
    Cause.WEATHER: "We",
    Cause.SPECIAL_EVENT: "SE",
    Cause.RECURRENT: "Re",
}

N_CAUSES = len(Cause)
N_SUBSETS = 1 << N_CAUSES
EMPTY = 0
OMEGA = N_SUBSETS - 1

_SUBSETS = np.arange(N_SUBSETS)
_CARDINALITY = np.array([bin(a).count("1") for a in range(N_SUBSETS)], dtype=float)
# _MEMBERSHIP[i, a] == 1 when cause i belongs to subset a
_MEMBERSHIP = np.array(
    [[(a >> i) & 1 for a in range(N_SUBSETS)] for i in range(N_CAUSES)], dtype=float
)
_INTERSECTIONS = np.bitwise_and.outer(_SUBSETS, _SUBSETS)


def mask_of(causes: Iterable[Cause]) -> int:
    mask = 0
    for cause in causes:
        mask |= Cause(cause).bit
    return mask


def members(mask: int) -> List[Cause]:
    return [cause for cause in Cause if mask & cause.bit]


def format_mask(mask: int) -> str:
    """Render a subset as comma-joined cause codes, OMEGA or EMPTY."""
    if mask == OMEGA:
        return "OMEGA"
    if mask == EMPTY:
        return "EMPTY"
    return ",".join(cause.code for cause in members(mask))


def parse_mask(text: str) -> int:
    key = text.strip()
    if key in ("OMEGA", "Ω"):
        return OMEGA
    if key in ("EMPTY", "∅"):
        return EMPTY
    return mask_of(Cause.from_code(part) for part in key.split(","))


# --- Value types ---

@dataclass(frozen=True)
class CauseVector:
    """Classifier output: one probability per cause in canonical order."""

    p: Tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.p)
        object.__setattr__(self, "p", values)
        if len(values) != N_CAUSES:
            raise EvidenceError(f"cause vector needs {N_CAUSES} probabilities, got {len(values)}")
        for cause, value in zip(Cause, values):
            if not (0.0 <= value <= 1.0) or math.isnan(value):
                raise EvidenceError(f"probability for {cause.code} out of [0,1]: {value}")
        total = math.fsum(values)
        if abs(total - 1.0) > MASS_TOLERANCE:
            raise EvidenceError(f"cause vector sums to {total:.10g}, expected 1")

    @classmethod
    def from_sequence(cls, values: Sequence[float]) -> "CauseVector":
        return cls(tuple(values))

    def __getitem__(self, cause: Cause) -> float:
        return self.p[int(cause)]

    def ranked(self) -> List[Cause]:
        """Causes by decreasing probability; ties go to the lower canonical index."""
        return sorted(Cause, key=lambda c: (-self.p[int(c)], int(c)))

    @property
    def top(self) -> Cause:
        return self.ranked()[0]

    @property
    def second(self) -> Cause:
        return self.ranked()[1]


@dataclass(frozen=True)
class MassFunction:
    """
    Belief mass over subsets of the cause frame.

    Only focal elements are stored, as (mask, mass) pairs sorted by mask.
    Construction checks structure only; validate_mass checks the values.
    """

    focal: Tuple[Tuple[int, float], ...]

    def __post_init__(self):
        pairs = tuple(sorted((int(a), float(v)) for a, v in self.focal))
        seen = set()
        for subset, _ in pairs:
            if not 0 <= subset < N_SUBSETS:
                raise EvidenceError(f"subset mask {subset} outside the cause frame")
            if subset in seen:
                raise EvidenceError(f"subset {format_mask(subset)} listed twice")
            seen.add(subset)
        object.__setattr__(self, "focal", pairs)

    @classmethod
    def from_mapping(cls, masses: Mapping[int, float]) -> "MassFunction":
        return cls(tuple((a, v) for a, v in masses.items() if v != 0.0))

    @classmethod
    def vacuous(cls) -> "MassFunction":
        return cls(((OMEGA, 1.0),))

    @classmethod
    def from_array(cls, values: np.ndarray) -> "MassFunction":
        return cls(tuple((int(a), float(values[a])) for a in np.flatnonzero(values)))

    def to_array(self) -> np.ndarray:
        values = np.zeros(N_SUBSETS)
        for subset, mass in self.focal:
            values[subset] = mass
        return values

    def as_dict(self) -> Dict[int, float]:
        return dict(self.focal)

    def __getitem__(self, subset: int) -> float:
        return self.as_dict().get(subset, 0.0)

    def total(self) -> float:
        return math.fsum(v for _, v in self.focal)

    def __str__(self) -> str:
        return "; ".join(f"{format_mask(a)}:{v:.6g}" for a, v in self.focal)


@dataclass(frozen=True)
class MassVerdict:
    ok: bool
    violation: Optional[str] = None

    def __bool__(self) -> bool:
        return self.ok


# --- Operations ---

def validate_mass(m: MassFunction) -> MassVerdict:
    """Check every mass lies in [0,1] and the total is 1 within tolerance. Never raises."""
    for subset, mass in m.focal:
        if math.isnan(mass) or mass < 0.0 or mass > 1.0 + MASS_TOLERANCE:
            return MassVerdict(False, f"mass on {format_mask(subset)} out of [0,1]: {mass:.10g}")
    total = m.total()
    if abs(total - 1.0) > MASS_TOLERANCE:
        return MassVerdict(False, f"total mass {total:.10g} ≠ 1")
    return MassVerdict(True)


def _require_valid(m: MassFunction, name: str) -> None:
    verdict = validate_mass(m)
    if not verdict:
        raise EvidenceError(f"invalid mass {name}: {verdict.violation}")


def _conjunctive_array(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    combined = np.zeros(N_SUBSETS)
    np.add.at(combined, _INTERSECTIONS.ravel(), np.outer(a, b).ravel())
    return combined


def conjunctive_combine(m1: MassFunction, m2: MassFunction) -> MassFunction:
    """Unnormalized conjunctive rule; conflicting mass stays on the empty set."""
    _require_valid(m1, "m1")
    _require_valid(m2, "m2")
    return MassFunction.from_array(_conjunctive_array(m1.to_array(), m2.to_array()))


def conflict(m1: MassFunction, m2: MassFunction) -> float:
    return conjunctive_combine(m1, m2)[EMPTY]


def dempster_combine(m1: MassFunction, m2: MassFunction) -> MassFunction:
    return normalize(conjunctive_combine(m1, m2))


_RULES = {
    "conjunctive": conjunctive_combine,
    "dempster": dempster_combine,
}


def combine_all(masses: Sequence[MassFunction], rule: str = "conjunctive") -> MassFunction:
    """Left fold of the pairwise rule over masses."""
    if rule not in _RULES:
        raise EvidenceError(f"unknown combination rule '{rule}'")
    if not masses:
        raise EvidenceError("cannot combine an empty list of masses")
    pairwise = _RULES[rule]
    result = masses[0]
    _require_valid(result, "masses[0]")
    for i, m in enumerate(masses[1:], start=2):
        try:
            result = pairwise(result, m)
        except EvidenceError as exc:
            if "K=1" in str(exc):
                raise EvidenceError(f"undefined combination, K=1 after folding the first {i} masses") from exc
            raise
    logger.debug("Evidence: folded %d masses with the %s rule", len(masses), rule)
    return result


def conjunctive_fold(masses: Sequence[MassFunction], rule: str = "conjunctive") -> MassFunction:
    """
    Same result as combine_all, folded over the non-empty part only.

    The empty set absorbs but never contributes, so after each step the
    surviving masses are rescaled to sum 1 and their scale is accumulated as a
    logarithm. Long folds of conflicting reports keep full relative precision
    on their focal elements; m(empty) is restored at the end.
    """
    if rule not in _RULES:
        raise EvidenceError(f"unknown combination rule '{rule}'")
    if not masses:
        raise EvidenceError("cannot combine an empty list of masses")
    for i, m in enumerate(masses):
        _require_valid(m, f"masses[{i}]")
    values = masses[0].to_array()
    log_surviving = 0.0
    for i, m in enumerate(masses):
        if i:
            values = _conjunctive_array(values, m.to_array())
        surviving = values[1:].sum()
        if surviving <= 0.0:
            if rule == "dempster":
                raise EvidenceError(f"undefined combination, K=1 after folding the first {i + 1} masses")
            return MassFunction(((EMPTY, 1.0),))
        log_surviving += math.log(surviving)
        values[EMPTY] = 0.0
        values = values / surviving
    if rule == "dempster":
        return MassFunction.from_array(values)
    values = values * math.exp(log_surviving)
    values[EMPTY] = -math.expm1(log_surviving)
    return MassFunction.from_array(values)


def normalize(m: MassFunction) -> MassFunction:
    """Move the empty-set mass out and rescale the rest (Dempster normalization)."""
    values = m.to_array()
    surviving = values[1:].sum()
    if surviving <= 0.0:
        raise EvidenceError("undefined combination, K=1")
    values[EMPTY] = 0.0
    return MassFunction.from_array(values / surviving)


def belief(m: MassFunction, subset: int) -> float:
    return math.fsum(v for a, v in m.focal if a != EMPTY and a & ~subset == 0)


def plausibility(m: MassFunction, subset: int) -> float:
    return math.fsum(v for a, v in m.focal if a & subset)


def pignistic(m: MassFunction) -> CauseVector:
    """
    BetP(w) = sum over A containing w of m(A) / (|A| (1 - m(empty))).

    The denominator is taken as the summed non-empty mass, which equals
    1 - m(empty) for a valid mass and stays exact when m(empty) is within
    round-off of 1. Only a mass entirely on the empty set has no BetP.
    """
    _require_valid(m, "m")
    values = m.to_array()
    surviving = values[1:].sum()
    if surviving <= 0.0:
        raise EvidenceError("no surviving belief")
    shares = np.zeros(N_SUBSETS)
    shares[1:] = values[1:] / _CARDINALITY[1:]
    betp = np.clip(_MEMBERSHIP @ shares / surviving, 0.0, 1.0)
    return CauseVector(tuple(float(v) for v in betp))


def mass_from_cause_vector(c: CauseVector, ignorance: float = DEFAULT_IGNORANCE) -> MassFunction:
    """
    Build the singleton / pair / OMEGA triplet from a classifier vector.

    The top-two probabilities are renormalized against each other and scaled by
    (1 - ignorance); OMEGA carries the ignorance.
    """
    if not 0.0 <= ignorance < 1.0:
        raise EvidenceError(f"ignorance must lie in [0,1), got {ignorance}")
    first, second = c.ranked()[:2]
    p1, p2 = c[first], c[second]
    scale = 1.0 - ignorance
    masses = {
        first.bit: scale * p1 / (p1 + p2),
        first.bit | second.bit: scale * p2 / (p1 + p2),
        OMEGA: ignorance,
    }
    return MassFunction.from_mapping(masses)
