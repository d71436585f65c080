import numpy as np
import pytest

from safexplore.gridworld import (
    ACTION_OFFSETS,
    Action,
    AgentMap,
    AgentState,
    CellState,
    GridError,
    GroundTruthMap,
    InfeasibleActionError,
    Trunk,
    apply_action,
    exploration_ratio,
    generate_map,
    is_terminal,
    moves_allowed,
    place_agent,
    rasterize_trunks,
)
from safexplore.shield import reachable_free_cells

from conftest import random_partial_map, reveal_discs
from oracles import brute_rasterize, flood_fill_reachable

# Chi-square critical value, df=24, alpha=0.001.
CHI2_CRIT_DF24 = 51.179


def full_known_map(truth: GroundTruthMap) -> AgentMap:
    return AgentMap(truth.cells.copy())


def test_action_conventions():
    assert [a.angle_deg for a in Action] == [0, 45, 90, 135, 180, 225, 270, 315]
    assert Action.N.offset == (-1, 0)
    assert Action.SE.offset == (1, 1)
    assert [a.is_diagonal for a in Action] == [False, True] * 4


def test_single_trunk_on_cell_center_occupies_plus_shape():
    # Radius 1 around a cell center reaches exactly the 4 orthogonal
    # neighbors (distance 1) and not the diagonals (distance sqrt 2).
    cells = rasterize_trunks(20, 20, [Trunk(center=(10.5, 10.5), radius=1.0)])
    occupied = {tuple(c) for c in np.argwhere(cells == CellState.OCCUPIED)}
    assert occupied == {(10, 10), (9, 10), (11, 10), (10, 9), (10, 11)}


def test_rasterization_matches_brute_force(rng):
    for _ in range(10):
        trunks = [
            Trunk(
                center=(float(rng.uniform(0, 12)), float(rng.uniform(0, 12))),
                radius=float(rng.uniform(0.5, 3.0)),
            )
            for _ in range(int(rng.integers(0, 5)))
        ]
        cells = rasterize_trunks(12, 12, trunks)
        np.testing.assert_array_equal(cells, brute_rasterize(12, 12, trunks))


def test_generate_map_nominal_shape_and_determinism():
    m1 = generate_map(1, 50, 50, 45, (1.0, 3.0))
    m2 = generate_map(1, 50, 50, 45, (1.0, 3.0))
    assert m1.cells.shape == (50, 50)
    assert len(m1.trunks) == 45
    np.testing.assert_array_equal(m1.cells, m2.cells)
    assert m1.trunks == m2.trunks
    assert all(1.0 <= t.radius <= 3.0 for t in m1.trunks)
    # ground truth never contains unknown cells
    assert not (m1.cells == CellState.UNKNOWN).any()


def test_generate_map_no_trunks_all_free():
    m = generate_map(7, 20, 20, 0, (1.0, 3.0))
    assert (m.cells == CellState.FREE).all()


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(height=0, width=50, trunk_count=1, radius_range=(1.0, 3.0)),
        dict(height=50, width=4, trunk_count=1, radius_range=(1.0, 3.0)),
        dict(height=50, width=50, trunk_count=-1, radius_range=(1.0, 3.0)),
        dict(height=50, width=50, trunk_count=1, radius_range=(0.0, 3.0)),
        dict(height=50, width=50, trunk_count=1, radius_range=(3.0, 1.0)),
    ],
)
def test_generate_map_rejects_degenerate_config(kwargs):
    with pytest.raises(GridError):
        generate_map(1, kwargs["height"], kwargs["width"], kwargs["trunk_count"],
                     kwargs["radius_range"])


def test_place_agent_single_free_cell_is_forced():
    cells = np.full((8, 8), CellState.OCCUPIED, dtype=np.uint8)
    cells[3, 5] = CellState.FREE
    truth = GroundTruthMap(cells=cells, trunks=[])
    for seed in range(5):
        assert place_agent(truth, seed).position == (3, 5)


def test_place_agent_deterministic_and_on_free_cell():
    truth = generate_map(3, 50, 50, 45, (1.0, 3.0))
    a = place_agent(truth, 11)
    b = place_agent(truth, 11)
    assert a == b
    assert a.step_count == 0
    assert truth.is_free(a.position)


def test_place_agent_no_free_cells_errors():
    cells = np.full((8, 8), CellState.OCCUPIED, dtype=np.uint8)
    with pytest.raises(GridError):
        place_agent(GroundTruthMap(cells=cells, trunks=[]), 0)


def test_place_agent_uniform_over_free_cells():
    # All-free 5x8 map: 40 cells, 1000 placements, chi-square at alpha=0.001.
    cells = np.full((8, 8), CellState.OCCUPIED, dtype=np.uint8)
    cells[:5, :] = CellState.FREE
    truth = GroundTruthMap(cells=cells, trunks=[])
    counts = np.zeros(40)
    n = 1000
    for seed in range(n):
        r, c = place_agent(truth, seed).position
        counts[r * 8 + c] += 1
    expected = n / 40
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    # df = 39; critical value at alpha=0.001 is 72.055
    assert chi2 < 72.055


def test_apply_action_moves_and_counts():
    truth = generate_map(5, 20, 20, 0, (1.0, 3.0))
    agent_map = full_known_map(truth)
    state = AgentState(position=(10, 10))
    north = apply_action(state, Action.N, truth, agent_map)
    assert north.position == (9, 10)
    assert north.step_count == 1
    se = apply_action(state, Action.SE, truth, agent_map)
    assert se.position == (11, 11)


def test_apply_action_rejects_corner_cut_between_occupied():
    # Diagonal target free, both orthogonal adjacents occupied.
    cells = np.full((10, 10), CellState.FREE, dtype=np.uint8)
    cells[4, 5] = CellState.OCCUPIED  # N of agent
    cells[5, 6] = CellState.OCCUPIED  # E of agent
    truth = GroundTruthMap(cells=cells, trunks=[])
    agent_map = full_known_map(truth)
    state = AgentState(position=(5, 5))
    assert truth.is_free((4, 6))
    with pytest.raises(InfeasibleActionError):
        apply_action(state, Action.NE, truth, agent_map)


def test_apply_action_rejects_unknown_target():
    truth = generate_map(5, 20, 20, 0, (1.0, 3.0))
    agent_map = AgentMap.unknown(20, 20)
    agent_map.cells[10, 10] = CellState.FREE
    with pytest.raises(InfeasibleActionError):
        apply_action(AgentState(position=(10, 10)), Action.N, truth, agent_map)


def test_moves_allowed_matches_per_action_rule(rng):
    for _ in range(50):
        free = rng.random((9, 9)) > 0.35
        pos = (int(rng.integers(9)), int(rng.integers(9)))
        free[pos] = True
        got = moves_allowed(free, pos)
        for a, (dr, dc) in enumerate(ACTION_OFFSETS):
            tr, tc = pos[0] + dr, pos[1] + dc
            expect = 0 <= tr < 9 and 0 <= tc < 9 and free[tr, tc]
            if expect and dr != 0 and dc != 0:
                expect = bool(free[pos[0] + dr, pos[1]] and free[pos[0], pos[1] + dc])
            assert got[a] == expect


def test_reachable_free_cells_matches_flood_fill(rng):
    for _ in range(20):
        truth = generate_map(int(rng.integers(2**32)), 14, 14, 6, (1.0, 2.5))
        free = np.argwhere(truth.free_mask())
        start = tuple(free[rng.integers(len(free))])
        mask = reachable_free_cells(truth, start)
        expected = flood_fill_reachable(truth.free_mask(), start)
        assert {tuple(c) for c in np.argwhere(mask)} == expected


def test_exploration_ratio_bounds_and_endpoints():
    truth = generate_map(2, 16, 16, 4, (1.0, 2.0))
    free = np.argwhere(truth.free_mask())
    start = tuple(free[0])
    reachable = reachable_free_cells(truth, start)

    fresh = AgentMap.unknown(16, 16)
    assert exploration_ratio(fresh, reachable) == 0.0
    assert exploration_ratio(full_known_map(truth), reachable) == 1.0


def test_exploration_ratio_matches_recount(rng):
    for _ in range(10):
        truth, agent_map, pos = random_partial_map(rng, 10, 10, n_t=3)
        reachable = reachable_free_cells(truth, pos)
        got = exploration_ratio(agent_map, reachable)
        reach_set = flood_fill_reachable(truth.free_mask(), pos)
        known = {
            tuple(c)
            for c in np.argwhere(agent_map.cells != CellState.UNKNOWN)
        }
        assert got == pytest.approx(len(known & reach_set) / len(reach_set), abs=0)


def test_is_terminal_thresholds():
    assert is_terminal(0.98, 5, 0.98, 2500)
    assert is_terminal(0.50, 2500, 0.98, 2500)
    assert not is_terminal(0.979, 2499, 0.98, 2500)
