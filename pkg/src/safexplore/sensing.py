"""Simulated 360-degree LiDAR over the ground truth and agent-map updates.

Rays are cast at uniform angular spacing from the origin cell's center and
sampled at fixed sub-cell increments. A ray reports every free cell it
crosses; entering an occupied cell reports that cell and stops the ray, and
the map border stops a ray without reporting anything. Only cells whose
center lies within the sensor range are reported, so the observed set on an
empty map is exactly the disc of radius l around the origin.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .gridworld import AgentMap, CellState, GridError, GroundTruthMap

DEFAULT_RAY_COUNT = 360
DEFAULT_RAY_STEP = 0.25


@lru_cache(maxsize=16)
def _ray_table(n_rays: int, range_cells: float, ray_step: float):
    angles = np.arange(n_rays) * (2.0 * np.pi / n_rays)
    # Heading 0 points North (row decreases); angles grow clockwise.
    dir_r = -np.cos(angles)
    dir_c = np.sin(angles)
    n_steps = int(range_cells / ray_step + 1e-9)
    ts = np.arange(1, n_steps + 1) * ray_step
    offsets_r = dir_r[:, None] * ts[None, :]
    offsets_c = dir_c[:, None] * ts[None, :]
    return n_steps, offsets_r, offsets_c


class ScanContradictionError(RuntimeError):
    """A scan tried to flip a known cell between free and occupied."""


@dataclass
class ScanResult:
    origin: tuple[int, int]
    range_cells: float
    rows: np.ndarray
    cols: np.ndarray
    states: np.ndarray

    @cached_property
    def observations(self) -> list[tuple[tuple[int, int], CellState]]:
        return [
            ((int(r), int(c)), CellState(int(s)))
            for r, c, s in zip(self.rows, self.cols, self.states)
        ]

    def __len__(self) -> int:
        return int(self.rows.size)


def lidar_scan(
    truth: GroundTruthMap,
    origin: tuple[int, int],
    range_cells: float,
    n_rays: int = DEFAULT_RAY_COUNT,
    ray_step: float = DEFAULT_RAY_STEP,
) -> ScanResult:
    height, width = truth.cells.shape
    orow, ocol = origin
    if not (0 <= orow < height and 0 <= ocol < width):
        raise GridError(f"scan origin {origin} out of bounds")
    if truth.cells[orow, ocol] == CellState.OCCUPIED:
        raise GridError(f"scan origin {origin} is occupied")
    if range_cells <= 0:
        raise GridError(f"sensor range must be positive, got {range_cells}")
    if n_rays < 4:
        raise GridError(f"need at least 4 rays, got {n_rays}")
    if not 0 < ray_step <= 0.25:
        raise GridError(f"ray step must be in (0, 0.25], got {ray_step}")

    center = (orow + 0.5, ocol + 0.5)
    n_steps, offsets_r, offsets_c = _ray_table(n_rays, float(range_cells), float(ray_step))

    sample_r = np.floor(center[0] + offsets_r).astype(np.int64)
    sample_c = np.floor(center[1] + offsets_c).astype(np.int64)

    in_bounds = (
        (sample_r >= 0) & (sample_r < height) & (sample_c >= 0) & (sample_c < width)
    )
    occupied = np.zeros_like(in_bounds)
    occupied[in_bounds] = (
        truth.cells[sample_r[in_bounds], sample_c[in_bounds]] == CellState.OCCUPIED
    )

    blocked = occupied | ~in_bounds
    has_block = blocked.any(axis=1)
    first_block = np.where(has_block, blocked.argmax(axis=1), n_steps)

    free_sel = np.arange(n_steps)[None, :] < first_block[:, None]
    free_r = sample_r[free_sel]
    free_c = sample_c[free_sel]

    ray_idx = np.arange(n_rays)
    hit = has_block & occupied[ray_idx, np.minimum(first_block, n_steps - 1)]
    occ_r = sample_r[ray_idx[hit], first_block[hit]]
    occ_c = sample_c[ray_idx[hit], first_block[hit]]

    free_r = np.append(free_r, orow)
    free_c = np.append(free_c, ocol)

    def within_range(rs, cs):
        return (rs + 0.5 - center[0]) ** 2 + (cs + 0.5 - center[1]) ** 2 <= range_cells**2

    free_keys = np.unique(free_r * width + free_c)
    occ_keys = np.unique(occ_r * width + occ_c)

    keys = np.concatenate([free_keys, occ_keys])
    states = np.concatenate(
        [
            np.full(free_keys.size, CellState.FREE, dtype=np.uint8),
            np.full(occ_keys.size, CellState.OCCUPIED, dtype=np.uint8),
        ]
    )
    rows, cols = keys // width, keys % width
    keep = within_range(rows, cols)
    rows, cols, states = rows[keep], cols[keep], states[keep]

    order = np.argsort(rows * width + cols, kind="stable")
    return ScanResult(
        origin=(int(orow), int(ocol)),
        range_cells=float(range_cells),
        rows=rows[order],
        cols=cols[order],
        states=states[order],
    )


def integrate_scan(agent_map: AgentMap, scan: ScanResult) -> int:
    """Write a scan into the agent map; returns how many cells became known."""
    current = agent_map.cells[scan.rows, scan.cols]
    conflicting = (current != CellState.UNKNOWN) & (current != scan.states)
    if conflicting.any():
        i = int(np.flatnonzero(conflicting)[0])
        cell = (int(scan.rows[i]), int(scan.cols[i]))
        raise ScanContradictionError(
            f"cell {cell} observed as {CellState(int(scan.states[i])).name} but "
            f"already known as {CellState(int(current[i])).name}"
        )
    fresh = current == CellState.UNKNOWN
    agent_map.cells[scan.rows[fresh], scan.cols[fresh]] = scan.states[fresh]
    return int(np.count_nonzero(fresh))
