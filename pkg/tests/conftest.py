import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from safexplore.gridworld import AgentMap, CellState, GroundTruthMap, generate_map

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


def reveal_discs(truth: GroundTruthMap, centers, radius: float) -> AgentMap:
    """Agent map revealing truth inside discs around the given free cells.

    Keeps the sensing agreement invariant by construction; no line-of-sight
    model, so tests get arbitrary partial-knowledge shapes cheaply.
    """
    rows = np.arange(truth.height)[:, None]
    cols = np.arange(truth.width)[None, :]
    known = np.zeros(truth.cells.shape, dtype=bool)
    for r, c in centers:
        known |= (rows - r) ** 2 + (cols - c) ** 2 <= radius**2
    agent_map = AgentMap.unknown(truth.height, truth.width)
    agent_map.cells[known] = truth.cells[known]
    return agent_map


def random_partial_map(rng: np.random.Generator, height=12, width=12, n_t=4,
                       n_vantage=3, reveal_radius=4.0):
    """Random truth plus a partially revealed agent map and a vantage cell."""
    truth = generate_map(int(rng.integers(2**32)), height, width, n_t, (1.0, 2.5))
    free = np.argwhere(truth.free_mask())
    picks = free[rng.integers(len(free), size=n_vantage)]
    agent_map = reveal_discs(truth, [tuple(p) for p in picks], reveal_radius)
    agent_pos = (int(picks[0][0]), int(picks[0][1]))
    return truth, agent_map, agent_pos


@pytest.fixture
def rng():
    return np.random.default_rng(20240809)
