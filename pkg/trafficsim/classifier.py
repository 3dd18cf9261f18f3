# trafficsim/classifier.py

"""
Surrogate for the per-vehicle congestion-cause classifier.

The reported top cause is drawn from a confusion row. Its probability comes
from the upper half of the configured band when correct and the lower half
when wrong. For Incident and Workzone truths SpecialEvent is biased into second
place. The remaining three causes share what is left almost evenly.
"""

import logging
from typing import Optional

import numpy as np

from agents.evidence import Cause, CauseVector
from data_ingestion.scenario_loader import ClassifierConfig
from trafficsim.vehicle import Vehicle

logger = logging.getLogger(__name__)

_SE_SECOND_TRUTHS = (Cause.INCIDENT, Cause.WORKZONE)


def classify_surrogate(
    vehicle: Optional[Vehicle],
    truth: Optional[Cause],
    cfg: ClassifierConfig,
    rng: Optional[np.random.Generator] = None,
) -> CauseVector:
    """
    Draw a noisy cause vector for `truth` (None selects the 'none' row).

    Uses the vehicle's own classifier stream unless `rng` is given.
    """
    if rng is None:
        if vehicle is None or vehicle.classifier_rng is None:
            raise ValueError("classify_surrogate needs a vehicle with a classifier stream or an explicit rng")
        rng = vehicle.classifier_rng
    row = np.asarray(cfg.row_for(truth), dtype=float)
    if row.shape != (len(Cause),) or np.any(row < 0) or abs(row.sum() - 1.0) > 1e-9:
        raise ValueError(f"malformed confusion row for {truth}: {row.tolist()}")

    top = Cause(int(rng.choice(len(Cause), p=row / row.sum())))
    correct = truth is not None and top == truth
    low, high = cfg.band
    middle = (low + high) / 2.0
    p_top = rng.uniform(middle, high) if correct else rng.uniform(low, middle)

    others = [c for c in Cause if c != top]
    if truth in _SE_SECOND_TRUTHS and top is not Cause.SPECIAL_EVENT and rng.random() < cfg.se_second_bias:
        second = Cause.SPECIAL_EVENT
    elif truth is not None and not correct and rng.random() < cfg.truth_second_rate:
        second = truth
    else:
        second = others[int(rng.integers(len(others)))]

    rest = 1.0 - p_top
    p_second = rng.uniform(0.3 * rest, min(p_top, rest))
    tail = [c for c in others if c != second]
    jitter = rng.uniform(-0.2, 0.2, size=len(tail))
    jitter -= jitter.mean()
    shares = (rest - p_second) / len(tail) * (1.0 + jitter)

    p = np.zeros(len(Cause))
    p[int(top)] = p_top
    p[int(second)] = p_second
    p[[int(c) for c in tail]] = shares
    return CauseVector(tuple(p / p.sum()))
