"""Frontier detection and the frontier-based potential field.

A frontier is a known-free cell with at least one unknown cell among its
eight neighbors. Each frontier scores a potential combining its distance
from the agent (scaled by the map diagonal) against the number of unknown
cells in a k x k window around it (scaled by k^2); the state potential is
the maximum normalized frontier potential, or zero with no frontiers left.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gridworld import AgentMap, CellState, GridError, map_diagonal


@dataclass(frozen=True)
class Frontier:
    cell: tuple[int, int]
    distance: float
    gain: int
    scaled_distance: float
    scaled_gain: float
    potential: float
    normalized_potential: float


def frontier_mask(agent_map: AgentMap) -> np.ndarray:
    """Boolean mask of frontier cells; border cells get no phantom neighbors."""
    height, width = agent_map.cells.shape
    unknown = agent_map.cells == CellState.UNKNOWN
    padded = np.zeros((height + 2, width + 2), dtype=bool)
    padded[1:-1, 1:-1] = unknown
    near_unknown = np.zeros((height, width), dtype=bool)
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if dr == 0 and dc == 0:
                continue
            near_unknown |= padded[1 + dr : 1 + dr + height, 1 + dc : 1 + dc + width]
    return agent_map.known_free_mask() & near_unknown


def frontier_cells(agent_map: AgentMap) -> np.ndarray:
    """Frontier cells as an (F, 2) array in row-major order."""
    return np.argwhere(frontier_mask(agent_map))


def detect_frontiers(agent_map: AgentMap) -> set[tuple[int, int]]:
    return {(int(r), int(c)) for r, c in frontier_cells(agent_map)}


def information_gain(agent_map: AgentMap, cell: tuple[int, int], k: int) -> int:
    """Unknown-cell count in the k x k window around cell, clipped at borders."""
    _check_k(k)
    height, width = agent_map.cells.shape
    r, c = cell
    rad = k // 2
    window = agent_map.cells[
        max(r - rad, 0) : min(r + rad + 1, height),
        max(c - rad, 0) : min(c + rad + 1, width),
    ]
    return int(np.count_nonzero(window == CellState.UNKNOWN))


def potential_terms(
    distance: float, gain: float, beta: float, k: int, diagonal: float
) -> tuple[float, float, float, float]:
    """Scaled distance/gain, raw potential, and its [0, 1] normalization."""
    scaled_d = distance / diagonal
    scaled_g = gain / (k * k)
    potential = -scaled_d + beta * scaled_g
    normalized = (potential + 1.0) / (beta + 1.0)
    return scaled_d, scaled_g, potential, normalized


def frontier_potentials(
    agent_map: AgentMap, agent_pos: tuple[int, int], beta: float, k: int
) -> list[Frontier]:
    if beta < 0:
        raise GridError(f"beta must be nonnegative, got {beta}")
    cells = frontier_cells(agent_map)
    dist, gains, scaled_d, scaled_g, potential, normalized = _potential_arrays(
        agent_map, cells, agent_pos, beta, k
    )
    return [
        Frontier(
            cell=(int(cells[i, 0]), int(cells[i, 1])),
            distance=float(dist[i]),
            gain=int(gains[i]),
            scaled_distance=float(scaled_d[i]),
            scaled_gain=float(scaled_g[i]),
            potential=float(potential[i]),
            normalized_potential=float(normalized[i]),
        )
        for i in range(len(cells))
    ]


def state_potential(
    agent_map: AgentMap, agent_pos: tuple[int, int], beta: float, k: int
) -> float:
    return max_normalized_potential(
        agent_map, frontier_cells(agent_map), agent_pos, beta, k
    )


def max_normalized_potential(
    agent_map: AgentMap,
    cells: np.ndarray,
    agent_pos: tuple[int, int],
    beta: float,
    k: int,
) -> float:
    """State potential given precomputed frontier cells."""
    if len(cells) == 0:
        _check_k(k)
        return 0.0
    normalized = _potential_arrays(agent_map, cells, agent_pos, beta, k)[-1]
    return float(normalized.max())


def _potential_arrays(agent_map, cells, agent_pos, beta, k):
    _check_k(k)
    if len(cells) == 0:
        empty = np.empty(0)
        return (empty,) * 6
    unknown = agent_map.cells == CellState.UNKNOWN
    gains = window_counts_at(integral_image(unknown), k, cells)
    dist = np.hypot(cells[:, 0] - agent_pos[0], cells[:, 1] - agent_pos[1])
    diagonal = map_diagonal(agent_map.height, agent_map.width)
    scaled_d = dist / diagonal
    scaled_g = gains / (k * k)
    potential = -scaled_d + beta * scaled_g
    normalized = (potential + 1.0) / (beta + 1.0)
    return dist, gains, scaled_d, scaled_g, potential, normalized


def integral_image(mask: np.ndarray) -> np.ndarray:
    ii = np.zeros((mask.shape[0] + 1, mask.shape[1] + 1), dtype=np.int64)
    ii[1:, 1:] = mask.cumsum(axis=0).cumsum(axis=1)
    return ii


def window_counts_at(ii: np.ndarray, k: int, cells: np.ndarray) -> np.ndarray:
    """True-cell counts of clipped k x k windows from an integral image.

    Centers may lie outside the map; the out-of-map part contributes zero.
    """
    height, width = ii.shape[0] - 1, ii.shape[1] - 1
    rad = k // 2
    r = np.asarray(cells)[:, 0]
    c = np.asarray(cells)[:, 1]
    r0 = np.clip(r - rad, 0, height)
    r1 = np.clip(r + rad + 1, 0, height)
    c0 = np.clip(c - rad, 0, width)
    c1 = np.clip(c + rad + 1, 0, width)
    return ii[r1, c1] - ii[r0, c1] - ii[r1, c0] + ii[r0, c0]


def _check_k(k: int) -> None:
    if k < 1 or k % 2 == 0:
        raise GridError(f"window size k must be a positive odd integer, got {k}")
