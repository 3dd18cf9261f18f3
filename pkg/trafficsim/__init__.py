from trafficsim.radio import SimulationError
from trafficsim.simulator import EventLog, RecordKind, World, run, step

__all__ = ["EventLog", "RecordKind", "SimulationError", "World", "run", "step"]
