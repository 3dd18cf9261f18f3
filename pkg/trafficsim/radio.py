# trafficsim/radio.py

"""Unit-disk broadcast: lossless, same-tick delivery to equipped vehicles in range."""

from typing import Callable, List, Optional

import numpy as np


class SimulationError(RuntimeError):
    """Raised when a simulation invariant is breached."""


def vehicles_in_range(world, sender_id: int) -> List[int]:
    """Equipped vehicles other than the sender within radio range, by id."""
    ids, points = world.radio_table()
    # the table only holds equipped vehicles, so unequipped ones never hear anything
    if len(ids) == 0:
        return []
    sender = world.vehicles[sender_id]
    origin = world.network.position(sender.segment, sender.offset)
    distances = np.hypot(points[:, 0] - origin[0], points[:, 1] - origin[1])
    # closed disk: a receiver exactly at the range limit still hears the sender
    mask = (distances <= world.scenario.comms.radio_range) & (ids != sender_id)
    return [int(v) for v in ids[mask]]


def broadcast(world, sender_id: int, payload=None, accept: Optional[Callable[[int], bool]] = None) -> List[int]:
    """
    Send `payload` from `sender_id` to every equipped vehicle in range.

    `accept` narrows the receivers (RQs only travel upstream, for instance).
    Each receiver gets the payload through world.deliver; the sorted receiver
    ids are returned.
    """
    if sender_id not in world.vehicles:
        raise SimulationError(f"vehicle {sender_id} is not on the network")
    if not world.vehicles[sender_id].equipped:
        raise SimulationError(f"unequipped vehicle {sender_id} cannot transmit")
    receivers = sorted(vehicles_in_range(world, sender_id))
    if accept is not None:
        receivers = [vid for vid in receivers if accept(vid)]
    # delivery order follows vehicle id so that runs stay reproducible
    if payload is not None:
        for vid in receivers:
            world.deliver(vid, sender_id, payload)
    return receivers
