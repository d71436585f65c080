"""Independent reference implementations used to derive expected values.

Everything here is deliberately written with plain loops, dense matrices,
or heapq, to stay structurally unrelated to the library's vectorized code
paths it checks.
"""
from __future__ import annotations

import heapq
import math

import numpy as np

from safexplore.gridworld import ACTION_OFFSETS, AgentMap, CellState, GroundTruthMap


def brute_rasterize(height, width, trunks):
    cells = np.full((height, width), int(CellState.FREE), dtype=np.uint8)
    for r in range(height):
        for c in range(width):
            center = (r + 0.5, c + 0.5)
            for trunk in trunks:
                d = math.hypot(center[0] - trunk.center[0], center[1] - trunk.center[1])
                if d <= trunk.radius:
                    cells[r, c] = int(CellState.OCCUPIED)
                    break
    return cells


def disc_cells(origin, radius, height, width):
    """All cells whose center is within radius of the origin cell's center."""
    out = set()
    for r in range(height):
        for c in range(width):
            if math.hypot(r - origin[0], c - origin[1]) <= radius:
                out.add((r, c))
    return out


def flood_fill_reachable(free_mask, start):
    """Reachability under the corner-cut move rule, plain BFS."""
    height, width = free_mask.shape
    seen = {tuple(start)}
    queue = [tuple(start)]
    while queue:
        r, c = queue.pop()
        for dr, dc in ACTION_OFFSETS:
            tr, tc = r + dr, c + dc
            if not (0 <= tr < height and 0 <= tc < width):
                continue
            if not free_mask[tr, tc] or (tr, tc) in seen:
                continue
            if dr != 0 and dc != 0 and not (free_mask[r + dr, c] and free_mask[r, c + dc]):
                continue
            seen.add((tr, tc))
            queue.append((tr, tc))
    return seen


def brute_frontiers(agent_map: AgentMap):
    height, width = agent_map.cells.shape
    out = set()
    for r in range(height):
        for c in range(width):
            if agent_map.cells[r, c] != CellState.FREE:
                continue
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    if dr == 0 and dc == 0:
                        continue
                    rr, cc = r + dr, c + dc
                    if 0 <= rr < height and 0 <= cc < width:
                        if agent_map.cells[rr, cc] == CellState.UNKNOWN:
                            out.add((r, c))
    return out


def brute_window_count(agent_map: AgentMap, cell, k, state):
    height, width = agent_map.cells.shape
    rad = k // 2
    count = 0
    for rr in range(cell[0] - rad, cell[0] + rad + 1):
        for cc in range(cell[1] - rad, cell[1] + rad + 1):
            if 0 <= rr < height and 0 <= cc < width:
                if agent_map.cells[rr, cc] == state:
                    count += 1
    return count


def brute_node_features(agent_map: AgentMap, cell, node_class, frontier_set, k):
    height, width = agent_map.cells.shape
    rad = k // 2
    free = unknown = occupied = frontier = 0
    for rr in range(cell[0] - rad, cell[0] + rad + 1):
        for cc in range(cell[1] - rad, cell[1] + rad + 1):
            if not (0 <= rr < height and 0 <= cc < width):
                occupied += 1
                continue
            state = agent_map.cells[rr, cc]
            if state == CellState.FREE:
                free += 1
            elif state == CellState.UNKNOWN:
                unknown += 1
            else:
                occupied += 1
            if (rr, cc) in frontier_set:
                frontier += 1
    feats = [0.0] * 8
    feats[int(node_class)] = 1.0
    area = k * k
    feats[4] = free / area
    feats[5] = unknown / area
    feats[6] = occupied / area
    feats[7] = frontier / area
    return np.asarray(feats)


def brute_graph_description(agent_map, agent_pos, frontier_set, feasible, k):
    """Expected (node descriptions, weighted directed edge set)."""
    from safexplore.graph import NodeClass

    fronts = sorted(frontier_set)
    nav_cells = [
        (agent_pos[0] + dr, agent_pos[1] + dc) for dr, dc in ACTION_OFFSETS
    ]
    nodes = [(0, NodeClass.AGENT, tuple(agent_pos))]
    for a, cell in enumerate(nav_cells):
        cls = NodeClass.NAV_FEASIBLE if a in feasible else NodeClass.NAV_INFEASIBLE
        nodes.append((1 + a, cls, cell))
    for i, cell in enumerate(fronts):
        nodes.append((9 + i, NodeClass.FRONTIER, cell))

    edges = set()
    for a, cell in enumerate(nav_cells):
        w = math.hypot(cell[0] - agent_pos[0], cell[1] - agent_pos[1])
        edges.add((0, 1 + a, w))
        edges.add((1 + a, 0, w))
    for i in range(8):
        for j in range(8):
            if i == j:
                continue
            cheb = max(
                abs(nav_cells[i][0] - nav_cells[j][0]),
                abs(nav_cells[i][1] - nav_cells[j][1]),
            )
            if cheb <= 1:
                w = math.hypot(
                    nav_cells[i][0] - nav_cells[j][0], nav_cells[i][1] - nav_cells[j][1]
                )
                edges.add((1 + i, 1 + j, w))
    for i, cell in enumerate(fronts):
        best_a, best_w = None, None
        for a, nav in enumerate(nav_cells):
            w = math.hypot(cell[0] - nav[0], cell[1] - nav[1])
            if best_w is None or w < best_w:
                best_a, best_w = a, w
        edges.add((9 + i, 1 + best_a, best_w))

    features = {
        node_id: brute_node_features(agent_map, cell, cls, frontier_set, k)
        for node_id, cls, cell in nodes
    }
    return nodes, edges, features


# ---------------------------------------------------------------------------
# Dense graph-attention reference (explicit adjacency masking, no scatter)


def dense_gatv2_layer(x, edges, heads, concat=True, activation=None):
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    adj = np.zeros((n, n), dtype=bool)
    for s, d in edges:
        adj[d, s] = True
    adj[np.arange(n), np.arange(n)] = True

    outs = []
    for head in heads:
        s_term = x @ np.asarray(head.theta_s, dtype=np.float64).T
        t_term = x @ np.asarray(head.theta_t, dtype=np.float64).T
        pair = s_term[:, None, :] + t_term[None, :, :]
        pair = np.where(pair > 0, pair, 0.2 * pair)
        scores = pair @ np.asarray(head.attn, dtype=np.float64)
        scores = np.where(adj, scores, -np.inf)
        peak = scores.max(axis=1, keepdims=True)
        weights = np.where(adj, np.exp(scores - peak), 0.0)
        alpha = weights / weights.sum(axis=1, keepdims=True)
        outs.append(alpha @ t_term + np.asarray(head.bias, dtype=np.float64))
    out = np.concatenate(outs, axis=1) if concat else sum(outs)
    if activation == "relu":
        out = np.maximum(out, 0.0)
    return out


def dense_network_scalars(x, edges, net):
    hidden = dense_gatv2_layer(x, edges, net.layer1, concat=True, activation="relu")
    return dense_gatv2_layer(hidden, edges, (net.layer2,), concat=True)


def dense_policy_logits(graph, weights):
    scalars = dense_network_scalars(
        graph.feature_matrix(), graph.edge_index, weights.policy
    )
    return scalars[1:9, 0]


def dense_critic_value(graph, weights):
    scalars = dense_network_scalars(
        graph.feature_matrix(), graph.edge_index, weights.critic
    )
    pooled = scalars[0:9, 0].mean()
    return float(weights.critic_fc_weight[0] * pooled + weights.critic_fc_bias[0])


# ---------------------------------------------------------------------------
# Path distances for the frontier baseline (heapq Dijkstra)


def dijkstra_frontier_distances(agent_map: AgentMap, frontier_set):
    """Full octile distance-to-nearest-frontier field over known-free cells."""
    free = agent_map.known_free_mask()
    height, width = free.shape
    dist = {}
    heap = []
    for cell in frontier_set:
        dist[tuple(cell)] = 0
        heapq.heappush(heap, (0, tuple(cell)))
    while heap:
        d, (r, c) = heapq.heappop(heap)
        if d > dist.get((r, c), math.inf):
            continue
        for dr, dc in ACTION_OFFSETS:
            tr, tc = r + dr, c + dc
            if not (0 <= tr < height and 0 <= tc < width) or not free[tr, tc]:
                continue
            if dr != 0 and dc != 0 and not (free[r + dr, c] and free[r, c + dc]):
                continue
            step = 7 if dr != 0 and dc != 0 else 5
            nd = d + step
            if nd < dist.get((tr, tc), math.inf):
                dist[(tr, tc)] = nd
                heapq.heappush(heap, (nd, (tr, tc)))
    return dist


def brute_nearest_frontier_action(agent_map, pos, frontier_set, feasible):
    """Exhaustive 8-way evaluation mirroring the baseline's documented rule."""
    ordered = sorted(int(a) for a in feasible)
    if not ordered:
        return 0
    fronts = sorted(frontier_set)
    if not fronts:
        return ordered[0]
    field = dijkstra_frontier_distances(agent_map, fronts)
    scores = []
    for a in ordered:
        dr, dc = ACTION_OFFSETS[a]
        scores.append(field.get((pos[0] + dr, pos[1] + dc), math.inf))
    if all(math.isinf(s) for s in scores):
        scores = []
        for a in ordered:
            dr, dc = ACTION_OFFSETS[a]
            target = (pos[0] + dr, pos[1] + dc)
            scores.append(
                min(math.hypot(f[0] - target[0], f[1] - target[1]) for f in fronts)
            )
    best = min(range(len(ordered)), key=lambda i: (scores[i], ordered[i]))
    return ordered[best]


# ---------------------------------------------------------------------------
# Line-of-sight checking for scan soundness


def segment_crosses_occupied(
    truth: GroundTruthMap, a_cell, b_cell, margin: float = 0.05
) -> bool:
    """Does the segment between two cell centers pass through the interior of
    an occupied cell (other than the endpoints)? Points within ``margin`` of a
    cell boundary don't count, so grazing a corner is not a crossing."""
    a = (a_cell[0] + 0.5, a_cell[1] + 0.5)
    b = (b_cell[0] + 0.5, b_cell[1] + 0.5)
    length = math.hypot(b[0] - a[0], b[1] - a[1])
    samples = max(int(length / 0.02), 2)
    for i in range(1, samples):
        t = i / samples
        pr = a[0] + (b[0] - a[0]) * t
        pc = a[1] + (b[1] - a[1]) * t
        cell = (math.floor(pr), math.floor(pc))
        if cell == tuple(a_cell) or cell == tuple(b_cell):
            continue
        if not (0 <= cell[0] < truth.height and 0 <= cell[1] < truth.width):
            continue
        if truth.cells[cell] != CellState.OCCUPIED:
            continue
        if margin < pr - cell[0] < 1 - margin and margin < pc - cell[1] < 1 - margin:
            return True
    return False
