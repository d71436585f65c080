"""Occupancy-grid world: procedural maps, agent placement, move kinematics.

Grid convention: row 0 is the top edge and moving North decreases the row
index. Cell (r, c) covers the unit square [r, r+1) x [c, c+1), so its center
sits at (r + 0.5, c + 0.5) in continuous coordinates. The eight move actions
are indexed clockwise starting at North; each action's heading is
45 degrees * index measured clockwise from North.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np


class GridError(ValueError):
    """Invalid map configuration or illegal grid operation."""


class InfeasibleActionError(GridError):
    """A move was requested that current map knowledge forbids."""


class CellState(enum.IntEnum):
    FREE = 0
    OCCUPIED = 1
    UNKNOWN = 2


class Action(enum.IntEnum):
    N = 0
    NE = 1
    E = 2
    SE = 3
    S = 4
    SW = 5
    W = 6
    NW = 7

    @property
    def offset(self) -> tuple[int, int]:
        return ACTION_OFFSETS[int(self)]

    @property
    def angle_deg(self) -> float:
        return 45.0 * int(self)

    @property
    def is_diagonal(self) -> bool:
        return int(self) % 2 == 1


# (row, col) displacement per action, same order as the Action enum.
ACTION_OFFSETS: tuple[tuple[int, int], ...] = (
    (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1),
)

N_ACTIONS = 8


@dataclass(frozen=True)
class Trunk:
    """Circular non-traversable region in continuous map coordinates."""

    center: tuple[float, float]
    radius: float


@dataclass
class GroundTruthMap:
    """Fully known occupancy grid; cells are only FREE or OCCUPIED."""

    cells: np.ndarray
    trunks: list[Trunk]

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    def free_mask(self) -> np.ndarray:
        return self.cells == CellState.FREE

    def is_free(self, cell: tuple[int, int]) -> bool:
        return self.cells[cell] == CellState.FREE


@dataclass
class AgentMap:
    """The agent's partial knowledge; starts all UNKNOWN."""

    cells: np.ndarray

    @classmethod
    def unknown(cls, height: int, width: int) -> "AgentMap":
        return cls(np.full((height, width), CellState.UNKNOWN, dtype=np.uint8))

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    def known_mask(self) -> np.ndarray:
        return self.cells != CellState.UNKNOWN

    def known_free_mask(self) -> np.ndarray:
        return self.cells == CellState.FREE

    def copy(self) -> "AgentMap":
        return AgentMap(self.cells.copy())


@dataclass(frozen=True)
class AgentState:
    position: tuple[int, int]
    step_count: int = 0


def rasterize_trunks(height: int, width: int, trunks: list[Trunk]) -> np.ndarray:
    """Mark every cell whose center lies within some trunk's radius OCCUPIED."""
    cells = np.full((height, width), CellState.FREE, dtype=np.uint8)
    if not trunks:
        return cells
    rows = np.arange(height)[:, None] + 0.5
    cols = np.arange(width)[None, :] + 0.5
    occupied = np.zeros((height, width), dtype=bool)
    for trunk in trunks:
        tr, tc = trunk.center
        occupied |= (rows - tr) ** 2 + (cols - tc) ** 2 <= trunk.radius**2
    cells[occupied] = CellState.OCCUPIED
    return cells


def generate_map(
    seed: int,
    height: int,
    width: int,
    trunk_count: int,
    radius_range: tuple[float, float],
) -> GroundTruthMap:
    """Sample trunk centers uniformly over the continuous map rectangle.

    Trunks may overlap each other and the border. Deterministic per seed.
    """
    r_min, r_max = radius_range
    if height < 8 or width < 8:
        raise GridError(f"map too small: {height}x{width}, need at least 8x8")
    if trunk_count < 0:
        raise GridError(f"trunk count must be nonnegative, got {trunk_count}")
    if r_min <= 0 or r_min > r_max:
        raise GridError(f"invalid radius range [{r_min}, {r_max}]")

    rng = np.random.default_rng(seed)
    centers = rng.uniform(size=(trunk_count, 2)) * (height, width)
    radii = rng.uniform(r_min, r_max, size=trunk_count)
    trunks = [
        Trunk(center=(float(r), float(c)), radius=float(rad))
        for (r, c), rad in zip(centers, radii)
    ]
    return GroundTruthMap(cells=rasterize_trunks(height, width, trunks), trunks=trunks)


def place_agent(truth: GroundTruthMap, seed: int) -> AgentState:
    """Pick a start cell uniformly among the map's free cells."""
    free_flat = np.flatnonzero(truth.cells.ravel() == CellState.FREE)
    if free_flat.size == 0:
        raise GridError("map has no free cell to place the agent on")
    rng = np.random.default_rng(seed)
    idx = int(free_flat[rng.integers(free_flat.size)])
    return AgentState(position=(idx // truth.width, idx % truth.width), step_count=0)


def moves_allowed(free_mask: np.ndarray, pos: tuple[int, int]) -> np.ndarray:
    """Which of the 8 moves from pos are permitted over the given free cells.

    A move is permitted when its target is in bounds and free; a diagonal
    additionally requires both orthogonally adjacent cells of the move to be
    free, so the agent can never cut a corner.
    """
    height, width = free_mask.shape
    r, c = pos
    out = np.zeros(N_ACTIONS, dtype=bool)
    for a, (dr, dc) in enumerate(ACTION_OFFSETS):
        tr, tc = r + dr, c + dc
        if not (0 <= tr < height and 0 <= tc < width):
            continue
        if not free_mask[tr, tc]:
            continue
        if dr != 0 and dc != 0 and not (free_mask[r + dr, c] and free_mask[r, c + dc]):
            continue
        out[a] = True
    return out


def apply_action(
    state: AgentState,
    action: int,
    truth: GroundTruthMap,
    agent_map: AgentMap,
) -> AgentState:
    """Displace the agent by one move; the caller must have shielded first."""
    if not 0 <= int(action) < N_ACTIONS:
        raise InfeasibleActionError(f"action index out of range: {action}")
    if not moves_allowed(agent_map.known_free_mask(), state.position)[int(action)]:
        raise InfeasibleActionError(
            f"action {Action(int(action)).name} from {state.position} is not "
            "feasible under the agent's map"
        )
    dr, dc = ACTION_OFFSETS[int(action)]
    new_pos = (state.position[0] + dr, state.position[1] + dc)
    return replace(state, position=new_pos, step_count=state.step_count + 1)


def exploration_ratio(agent_map: AgentMap, reachable_mask: np.ndarray) -> float:
    """Fraction of reachable cells the agent has observed so far."""
    reachable = int(np.count_nonzero(reachable_mask))
    if reachable == 0:
        raise GridError("reachable set is empty")
    known = np.count_nonzero(agent_map.known_mask() & reachable_mask)
    return known / reachable


def is_terminal(
    coverage: float, step_count: int, coverage_goal: float, step_limit: int
) -> bool:
    return coverage >= coverage_goal or step_count >= step_limit


def map_diagonal(height: int, width: int) -> float:
    return math.hypot(height, width)
