# conftest.py

import pytest

from agents.evidence import MassFunction, parse_mask
from data_ingestion.scenario_loader import ScenarioConfig, scenario_from_dict

# Six worked example masses and the printed result of combining them.
EXAMPLE_MASSES = {
    "m1": {"We": 0.4, "We,Re": 0.3, "OMEGA": 0.3},
    "m2": {"We": 0.62, "We,Re": 0.3, "OMEGA": 0.08},
    "m3": {"We": 0.7, "I,We": 0.2, "OMEGA": 0.1},
    "m4": {"We": 0.6, "I,We": 0.1, "OMEGA": 0.3},
    "m21": {"Re": 0.61, "We,Re": 0.34, "OMEGA": 0.05},
    "m22": {"We": 0.67, "I,We": 0.3, "OMEGA": 0.03},
}
EXAMPLE_COMBINED = {
    "EMPTY": 0.652, "I": 0.022, "We": 0.1637, "Re": 0.1068,
    "I,We": 0.0234, "We,Re": 0.032, "OMEGA": 0.0000011,
}


def mass(column: dict, scale: float = 1.0) -> MassFunction:
    return MassFunction.from_mapping({parse_mask(k): v / scale for k, v in column.items()})


@pytest.fixture
def example_masses():
    return {name: mass(column) for name, column in EXAMPLE_MASSES.items()}


@pytest.fixture
def printed_combined():
    # the printed column sums to 0.9999011
    return mass(EXAMPLE_COMBINED, scale=sum(EXAMPLE_COMBINED.values()))


def tiny_scenario(**overrides) -> ScenarioConfig:
    """Five-segment corridor, ten simulated minutes, one-second beacons."""
    data = {
        "name": "tiny",
        "network": {"segments": 5, "segment_length": 200.0},
        "demand": {"arrival_rate": 0.15, "horizon": 600.0},
        "comms": {"beacon_interval": 1.0},
        "classifier": {"spurious_rate": 0.0},
        "method": {"name": "VP", "minsup": 0.2, "mincon": 0.7, "training_size": 100},
        "events": [],
    }
    for section, values in overrides.items():
        if isinstance(values, dict) and isinstance(data.get(section), dict):
            data[section] = {**data[section], **values}
        else:
            data[section] = values
    return scenario_from_dict(data)


TINY_INCIDENT = [{"kind": "Incident", "segment": 3, "position": "beginning", "start": 60.0, "duration": 420.0}]


@pytest.fixture
def quiet_scenario():
    return tiny_scenario()


@pytest.fixture
def incident_scenario():
    return tiny_scenario(events=TINY_INCIDENT)
