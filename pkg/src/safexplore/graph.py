"""Observation graph: agent node, the 8 candidate-move nodes, frontier nodes.

Node 0 is always the agent and nodes 1..8 the move targets in action order,
so the policy's output shape stays fixed; move targets outside the map are
kept as infeasible nodes. Every node carries an 8-dim feature vector: a
4-slot one-hot of its class followed by free / unknown / occupied / frontier
cell counts from the k x k window around it, each divided by k^2. Window
positions outside the map count as occupied (the border is a wall).

Edges are directed and weighted by the Euclidean distance between endpoint
cells: agent and move nodes are linked both ways, move nodes are linked both
ways whenever their cells are within Chebyshev distance 1, and each frontier
sends a single edge to its nearest move node (ties to the lowest action
index).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .frontier_field import integral_image, window_counts_at
from .gridworld import ACTION_OFFSETS, AgentMap, CellState, GridError

FEATURE_DIM = 8


class NodeClass(enum.IntEnum):
    AGENT = 0
    NAV_FEASIBLE = 1
    NAV_INFEASIBLE = 2
    FRONTIER = 3


WIRE_CLASS_NAMES = {
    NodeClass.AGENT: "agent",
    NodeClass.NAV_FEASIBLE: "nav_feasible",
    NodeClass.NAV_INFEASIBLE: "nav_infeasible",
    NodeClass.FRONTIER: "frontier",
}
_CLASS_FROM_WIRE = {name: cls for cls, name in WIRE_CLASS_NAMES.items()}


@dataclass(frozen=True)
class GraphNode:
    id: int
    node_class: NodeClass
    cell: tuple[int, int]
    features: np.ndarray


@dataclass
class ExplorationGraph:
    """Array-backed graph; treat the arrays as immutable once built."""

    cells: np.ndarray  # (N, 2) int64
    classes: np.ndarray  # (N,) int64, NodeClass values
    features: np.ndarray  # (N, FEATURE_DIM) float64
    edge_index: np.ndarray  # (E, 2) int64 rows of (src, dst)
    edge_weights: np.ndarray  # (E,) float64
    agent_id: int = 0
    nav_ids: tuple[int, ...] = tuple(range(1, 9))
    _nodes: list | None = field(default=None, repr=False, compare=False)

    @property
    def n_nodes(self) -> int:
        return len(self.cells)

    def feature_matrix(self) -> np.ndarray:
        return self.features

    @property
    def nodes(self) -> list[GraphNode]:
        if self._nodes is None:
            self._nodes = [
                GraphNode(
                    id=i,
                    node_class=NodeClass(int(self.classes[i])),
                    cell=(int(self.cells[i, 0]), int(self.cells[i, 1])),
                    features=self.features[i],
                )
                for i in range(self.n_nodes)
            ]
        return self._nodes

    def to_payload(self) -> dict:
        return {
            "nodes": [
                {
                    "id": i,
                    "class": WIRE_CLASS_NAMES[NodeClass(int(self.classes[i]))],
                    "cell": [int(self.cells[i, 0]), int(self.cells[i, 1])],
                    "features": self.features[i].tolist(),
                }
                for i in range(self.n_nodes)
            ],
            "edges": [
                [int(s), int(d), float(w)]
                for (s, d), w in zip(self.edge_index, self.edge_weights)
            ],
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "ExplorationGraph":
        entries = payload["nodes"]
        if not entries:
            raise GridError("observation payload has no nodes")
        cells = np.asarray([e["cell"] for e in entries], dtype=np.int64)
        classes = np.asarray(
            [int(_CLASS_FROM_WIRE[e["class"]]) for e in entries], dtype=np.int64
        )
        features = np.asarray([e["features"] for e in entries], dtype=np.float64)
        if features.shape[1] != FEATURE_DIM:
            raise GridError(f"node features must be {FEATURE_DIM}-dim")
        edges = payload["edges"]
        if edges:
            edge_index = np.asarray([[e[0], e[1]] for e in edges], dtype=np.int64)
            edge_weights = np.asarray([e[2] for e in edges], dtype=np.float64)
        else:
            edge_index = np.empty((0, 2), dtype=np.int64)
            edge_weights = np.empty(0, dtype=np.float64)
        return cls(
            cells=cells,
            classes=classes,
            features=features,
            edge_index=edge_index,
            edge_weights=edge_weights,
        )


# Move-node pairs within Chebyshev distance 1 of each other, plus weights.
# Fixed by the move offsets, independent of the agent's position.
_NAV_PAIRS: list[tuple[int, int, float]] = [
    (i, j, math.hypot(ACTION_OFFSETS[i][0] - ACTION_OFFSETS[j][0],
                      ACTION_OFFSETS[i][1] - ACTION_OFFSETS[j][1]))
    for i in range(8)
    for j in range(i + 1, 8)
    if max(
        abs(ACTION_OFFSETS[i][0] - ACTION_OFFSETS[j][0]),
        abs(ACTION_OFFSETS[i][1] - ACTION_OFFSETS[j][1]),
    )
    <= 1
]

# Static core edges: agent <-> each move node, then the Chebyshev-adjacent
# move-node pairs, both directions each.
_CORE_EDGES: list[tuple[int, int]] = []
_CORE_WEIGHTS: list[float] = []
for _a, (_dr, _dc) in enumerate(ACTION_OFFSETS):
    _w = math.hypot(_dr, _dc)
    _CORE_EDGES += [(0, 1 + _a), (1 + _a, 0)]
    _CORE_WEIGHTS += [_w, _w]
for _i, _j, _w in _NAV_PAIRS:
    _CORE_EDGES += [(1 + _i, 1 + _j), (1 + _j, 1 + _i)]
    _CORE_WEIGHTS += [_w, _w]
_CORE_EDGES_ARR = np.asarray(_CORE_EDGES, dtype=np.int64)
_CORE_WEIGHTS_ARR = np.asarray(_CORE_WEIGHTS, dtype=np.float64)


def node_features(
    agent_map: AgentMap,
    cell: tuple[int, int],
    node_class: NodeClass,
    frontiers,
    k: int,
) -> np.ndarray:
    """Feature vector of a single node; frontiers is any iterable of cells."""
    fmask = np.zeros(agent_map.cells.shape, dtype=bool)
    for r, c in frontiers:
        fmask[int(r), int(c)] = True
    cells = np.asarray([cell], dtype=np.int64)
    classes = np.asarray([int(node_class)], dtype=np.int64)
    return _batch_features(agent_map, cells, classes, fmask, k)[0]


def build_graph(
    agent_map: AgentMap,
    agent_pos: tuple[int, int],
    frontiers,
    feasible,
    k: int,
) -> ExplorationGraph:
    if agent_map.cells[agent_pos] != CellState.FREE:
        raise GridError(f"agent position {agent_pos} is not known-free")
    feasible = frozenset(int(a) for a in feasible)
    fronts = _as_sorted_cells(frontiers)
    fmask = np.zeros(agent_map.cells.shape, dtype=bool)
    if len(fronts):
        fmask[fronts[:, 0], fronts[:, 1]] = True

    nav_cells = np.asarray(agent_pos, dtype=np.int64) + np.asarray(ACTION_OFFSETS)
    cells = np.concatenate(
        [np.asarray([agent_pos], dtype=np.int64), nav_cells, fronts.reshape(-1, 2)]
    )
    classes = np.empty(len(cells), dtype=np.int64)
    classes[0] = int(NodeClass.AGENT)
    for a in range(8):
        classes[1 + a] = int(
            NodeClass.NAV_FEASIBLE if a in feasible else NodeClass.NAV_INFEASIBLE
        )
    classes[9:] = int(NodeClass.FRONTIER)
    features = _batch_features(agent_map, cells, classes, fmask, k)

    if len(fronts):
        dists = np.hypot(
            fronts[:, 0][:, None] - nav_cells[:, 0][None, :],
            fronts[:, 1][:, None] - nav_cells[:, 1][None, :],
        )
        nearest = dists.argmin(axis=1)
        frontier_edges = np.column_stack(
            [np.arange(9, 9 + len(fronts), dtype=np.int64), 1 + nearest]
        )
        edge_index = np.concatenate([_CORE_EDGES_ARR, frontier_edges])
        edge_weights = np.concatenate(
            [_CORE_WEIGHTS_ARR, dists[np.arange(len(fronts)), nearest]]
        )
    else:
        edge_index = _CORE_EDGES_ARR.copy()
        edge_weights = _CORE_WEIGHTS_ARR.copy()

    return ExplorationGraph(
        cells=cells,
        classes=classes,
        features=features,
        edge_index=edge_index,
        edge_weights=edge_weights,
    )


def _as_sorted_cells(frontiers) -> np.ndarray:
    if isinstance(frontiers, np.ndarray):
        arr = frontiers.reshape(-1, 2).astype(np.int64)
        if len(arr) > 1:
            arr = arr[np.lexsort((arr[:, 1], arr[:, 0]))]
        return arr
    arr = np.asarray(sorted((int(r), int(c)) for r, c in frontiers), dtype=np.int64)
    return arr.reshape(-1, 2)


def _batch_features(
    agent_map: AgentMap,
    cells: np.ndarray,
    classes: np.ndarray,
    fmask: np.ndarray,
    k: int,
) -> np.ndarray:
    if k < 1 or k % 2 == 0:
        raise GridError(f"window size k must be a positive odd integer, got {k}")
    grid = agent_map.cells
    free_in = window_counts_at(integral_image(grid == CellState.FREE), k, cells)
    unknown_in = window_counts_at(integral_image(grid == CellState.UNKNOWN), k, cells)
    frontier_in = window_counts_at(integral_image(fmask), k, cells)

    # In-map occupied plus every out-of-map window position fills the rest
    # of the window: occupied slot = (k^2 - free - unknown) / k^2.
    area = float(k * k)
    feats = np.zeros((len(cells), FEATURE_DIM), dtype=np.float64)
    feats[np.arange(len(cells)), classes] = 1.0
    feats[:, 4] = free_in / area
    feats[:, 5] = unknown_in / area
    feats[:, 6] = (k * k - free_in - unknown_in) / area
    feats[:, 7] = frontier_in / area
    return feats
