# trafficsim/network.py

"""Segmented road network laid out in the plane, backed by a networkx DiGraph."""

import logging
from dataclasses import dataclass
from typing import Dict, List, Set, Tuple

import networkx as nx
import numpy as np

from data_ingestion.scenario_loader import NetworkConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Segment:
    id: int
    row: int
    index: int
    length: float
    free_flow_speed: float
    start: Tuple[float, float]

    @property
    def free_flow_time(self) -> float:
        return self.length / self.free_flow_speed


class RoadNetwork:
    """
    One-way rows of equal segments. Edge u -> v means v is directly downstream
    of u. In a grid, same-column segments of neighbouring rows are linked by an
    undirected 'adjacent' relation only; routing never crosses rows.
    """

    def __init__(self, config: NetworkConfig):
        self.config = config
        self.graph = nx.DiGraph()
        self._adjacent: Dict[int, Set[int]] = {}
        for row in range(config.rows):
            for index in range(config.segments):
                seg = Segment(
                    id=row * config.segments + index,
                    row=row,
                    index=index,
                    length=config.segment_length,
                    free_flow_speed=config.free_flow_speed,
                    start=(index * config.segment_length, row * config.row_spacing),
                )
                self.graph.add_node(seg.id, segment=seg)
                if index > 0:
                    self.graph.add_edge(seg.id - 1, seg.id, length=config.segment_length)
        for node in self.graph.nodes:
            self._adjacent[node] = set(self.graph.predecessors(node)) | set(self.graph.successors(node))
        if config.topology == "grid":
            for row in range(config.rows - 1):
                for index in range(config.segments):
                    a = row * config.segments + index
                    b = a + config.segments
                    self._adjacent[a].add(b)
                    self._adjacent[b].add(a)
        self._check()
        logger.debug("RoadNetwork: built %s with %d segments", config.topology, self.graph.number_of_nodes())

    def _check(self) -> None:
        for u, v in self.graph.edges:
            if u not in self._adjacent[v] or v not in self._adjacent[u]:
                raise ValueError(f"adjacency between {u} and {v} is not symmetric")
        for node in self.graph.nodes:
            if self.segment(node).length <= 0:
                raise ValueError(f"segment {node} has non-positive length")

    # --- Lookups ---

    def segment(self, seg_id: int) -> Segment:
        return self.graph.nodes[seg_id]["segment"]

    @property
    def segment_ids(self) -> List[int]:
        return sorted(self.graph.nodes)

    @property
    def rows(self) -> int:
        return self.config.rows

    def route(self, row: int) -> List[int]:
        first = row * self.config.segments
        return list(range(first, first + self.config.segments))

    def upstream(self, seg_id: int) -> List[int]:
        return sorted(self.graph.predecessors(seg_id))

    def downstream(self, seg_id: int) -> List[int]:
        return sorted(self.graph.successors(seg_id))

    def adjacent(self, seg_id: int) -> Set[int]:
        return set(self._adjacent[seg_id])

    def free_flow_time(self, seg_id: int) -> float:
        return self.segment(seg_id).free_flow_time

    def is_downstream_or_same(self, seg_id: int, other: int) -> bool:
        """True when `other` is `seg_id` or lies further along the same row."""
        return other == seg_id or nx.has_path(self.graph, seg_id, other)

    def upstream_within(self, seg_id: int, radius: float) -> Set[int]:
        """
        Segments whose downstream end lies less than `radius` metres upstream
        of the start of `seg_id`, plus `seg_id` itself.
        """
        reverse = self.graph.reverse(copy=False)
        # distance to the far (upstream) end of each predecessor
        reach = nx.single_source_dijkstra_path_length(reverse, seg_id, weight="length")
        return {node for node, far_end in reach.items() if node == seg_id or far_end - self.segment(node).length < radius}

    # --- Geometry ---

    def position(self, seg_id: int, offset: float) -> np.ndarray:
        seg = self.segment(seg_id)
        return np.array([seg.start[0] + offset, seg.start[1]])

    def lane_position(self, seg_id: int, offset: float) -> float:
        """Distance from the start of the row."""
        seg = self.segment(seg_id)
        return seg.index * seg.length + offset


def build_network(config: NetworkConfig) -> RoadNetwork:
    return RoadNetwork(config)
