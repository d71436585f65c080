"""Safety shield: feasible-action computation and proposal projection.

The shield guarantees that an executed move never targets an occupied or
unknown cell and never cuts a corner between diagonal obstacles. When the
proposal is infeasible, the executed action is the feasible one whose
heading is angularly closest to the proposal; with nothing feasible the
agent stays put for the step.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .gridworld import (
    ACTION_OFFSETS,
    N_ACTIONS,
    AgentMap,
    GridError,
    GroundTruthMap,
    moves_allowed,
)

#: Executed-action value when the feasible set is empty.
STAY: Optional[int] = None


@dataclass(frozen=True)
class ShieldOutcome:
    proposed: int
    executed: Optional[int]
    intervened: bool
    feasible_set: frozenset[int]


def feasible_actions(agent_map: AgentMap, pos: tuple[int, int]) -> frozenset[int]:
    """Actions whose target is known-free, with corner cutting banned.

    Unknown cells are treated as infeasible: the shield may not gamble on
    unobserved space.
    """
    allowed = moves_allowed(agent_map.known_free_mask(), pos)
    return frozenset(int(a) for a in np.flatnonzero(allowed))


def angular_distance_steps(a: int, b: int) -> int:
    """Distance between two action headings in 45-degree steps (0..4)."""
    d = (int(a) - int(b)) % N_ACTIONS
    return min(d, N_ACTIONS - d)


def shield(proposed: int, feasible: frozenset[int]) -> ShieldOutcome:
    proposed = int(proposed)
    if not 0 <= proposed < N_ACTIONS:
        raise GridError(f"proposed action out of range: {proposed}")
    feasible = frozenset(int(a) for a in feasible)
    if proposed in feasible:
        return ShieldOutcome(proposed, proposed, False, feasible)
    if not feasible:
        return ShieldOutcome(proposed, STAY, True, feasible)
    executed = min(feasible, key=lambda a: (angular_distance_steps(proposed, a), a))
    return ShieldOutcome(proposed, executed, True, feasible)


def allowed_move_masks(free_mask: np.ndarray) -> list[np.ndarray]:
    """Per-action masks: allowed[a][r, c] is True when move a from (r, c) is
    permitted over the given free cells (in-bounds free target, no corner
    cutting on diagonals)."""
    masks = []
    for dr, dc in ACTION_OFFSETS:
        ok = free_mask & _shifted(free_mask, dr, dc)
        if dr != 0 and dc != 0:
            ok &= _shifted(free_mask, dr, 0) & _shifted(free_mask, 0, dc)
        masks.append(ok)
    return masks


def reachable_free_cells(truth: GroundTruthMap, start: tuple[int, int]) -> np.ndarray:
    """Mask of free cells connected to start under the shield's move rule."""
    free = truth.free_mask()
    if not free[start]:
        raise GridError(f"start cell {start} is not free")
    allowed = allowed_move_masks(free)
    reach = np.zeros_like(free)
    reach[start] = True
    while True:
        expanded = reach.copy()
        for (dr, dc), ok in zip(ACTION_OFFSETS, allowed):
            expanded |= _shifted(reach & ok, -dr, -dc)
        if (expanded == reach).all():
            return reach
        reach = expanded


def _shifted(mask: np.ndarray, dr: int, dc: int) -> np.ndarray:
    """out[r, c] = mask[r + dr, c + dc], False where that is out of bounds."""
    height, width = mask.shape
    out = np.zeros_like(mask)
    src_r = slice(max(dr, 0), height + min(dr, 0))
    src_c = slice(max(dc, 0), width + min(dc, 0))
    dst_r = slice(max(-dr, 0), height + min(-dr, 0))
    dst_c = slice(max(-dc, 0), width + min(-dc, 0))
    out[dst_r, dst_c] = mask[src_r, src_c]
    return out
