"""Two-layer graph-attention forward pass, weight files, and baselines.

Both the action-scoring network and the value network are two GATv2 layers:
layer 1 maps 8-dim node features to four concatenated 16-dim heads with a
ReLU, layer 2 maps the 64-dim embedding to one scalar per node with no
activation. Attention for a node spans its in-neighbors plus itself; scores
use the two-matrix LeakyReLU form with negative slope 0.2 and a softmax over
the aggregation set. Edge weights carried by the graph are deliberately not
consumed here; distances reach the networks only through node features.

Action logits are the scalar outputs of the 8 move nodes in action order.
The value network mean-pools the scalars of the agent and move nodes and
applies a final 1x1 affine layer.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .gridworld import ACTION_OFFSETS, N_ACTIONS, AgentMap
from .graph import ExplorationGraph

LEAKY_SLOPE = 0.2
FEATURE_DIM = 8
LAYER1_OUT = 16
LAYER1_HEADS = 4
LAYER2_IN = LAYER1_OUT * LAYER1_HEADS
LAYER2_OUT = 1
WEIGHT_FORMAT_VERSION = 1


class WeightFormatError(ValueError):
    """Weight file missing tensors, malformed, or carrying bad values."""


class ForwardError(RuntimeError):
    """Dimension mismatch or non-finite values during a forward pass."""


@dataclass(frozen=True)
class HeadParams:
    """Parameters of one attention head."""

    theta_s: np.ndarray  # (out, in) transform of the node being updated
    theta_t: np.ndarray  # (out, in) transform of the attended neighbor
    attn: np.ndarray  # (out,)
    bias: np.ndarray  # (out,)


@dataclass(frozen=True)
class NetworkWeights:
    layer1: tuple[HeadParams, ...]
    layer2: HeadParams


@dataclass(frozen=True)
class PolicyWeights:
    policy: NetworkWeights
    critic: NetworkWeights
    critic_fc_weight: np.ndarray  # (1,)
    critic_fc_bias: np.ndarray  # (1,)
    format_version: int = WEIGHT_FORMAT_VERSION


@dataclass(frozen=True)
class PolicyOutput:
    logits: np.ndarray
    probabilities: np.ndarray
    greedy_action: int


def gatv2_layer(
    features: np.ndarray,
    edges: np.ndarray,
    heads: Sequence[HeadParams],
    concat: bool = True,
    activation: Optional[str] = None,
    return_attention: bool = False,
):
    """One multi-head GATv2 layer over a directed edge list.

    Every node attends over its in-neighbors plus itself (a self-loop is
    always added). Per-head outputs are concatenated when concat is set and
    summed otherwise; the head bias is added after aggregation and the
    activation is applied last.
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise ForwardError(f"features must be 2-dim, got shape {x.shape}")
    n = x.shape[0]
    in_dim = x.shape[1]
    for head in heads:
        if head.theta_s.shape[1] != in_dim or head.theta_t.shape[1] != in_dim:
            raise ForwardError(
                f"head expects input dim {head.theta_t.shape[1]}, features have {in_dim}"
            )

    if edges is None or len(edges) == 0:
        src = np.arange(n, dtype=np.int64)
        dst = np.arange(n, dtype=np.int64)
    else:
        edges = np.asarray(edges, dtype=np.int64)
        if edges.min() < 0 or edges.max() >= n:
            raise ForwardError("edge endpoint out of range")
        src = np.concatenate([edges[:, 0], np.arange(n, dtype=np.int64)])
        dst = np.concatenate([edges[:, 1], np.arange(n, dtype=np.int64)])

    outputs = []
    attentions = []
    for head in heads:
        s = x @ head.theta_s.T.astype(np.float64)
        t = x @ head.theta_t.T.astype(np.float64)
        z = s[dst] + t[src]
        z = np.where(z > 0.0, z, LEAKY_SLOPE * z)
        scores = z @ head.attn.astype(np.float64)

        peak = np.full(n, -np.inf)
        np.maximum.at(peak, dst, scores)
        expd = np.exp(scores - peak[dst])
        denom = np.zeros(n)
        np.add.at(denom, dst, expd)
        alpha = expd / denom[dst]

        agg = np.zeros((n, t.shape[1]))
        np.add.at(agg, dst, alpha[:, None] * t[src])
        outputs.append(agg + head.bias.astype(np.float64))
        if return_attention:
            attentions.append(alpha)

    out = np.concatenate(outputs, axis=1) if concat else sum(outputs)
    if activation == "relu":
        out = np.maximum(out, 0.0)
    elif activation is not None:
        raise ForwardError(f"unsupported activation: {activation!r}")
    if not np.isfinite(out).all():
        raise ForwardError("non-finite layer output; weights are corrupt")
    if return_attention:
        return out, (src, dst, attentions)
    return out


def _network_scalars(graph: ExplorationGraph, net: NetworkWeights) -> np.ndarray:
    x = graph.feature_matrix()
    if x.shape[1] != FEATURE_DIM:
        raise ForwardError(f"graph features must be {FEATURE_DIM}-dim")
    if graph.n_nodes < 9:
        raise ForwardError("graph must contain the agent and 8 move nodes")
    hidden = gatv2_layer(x, graph.edge_index, net.layer1, concat=True, activation="relu")
    return gatv2_layer(hidden, graph.edge_index, (net.layer2,), concat=True)


def policy_output_from_logits(logits: np.ndarray) -> PolicyOutput:
    logits = np.asarray(logits, dtype=np.float64)
    shifted = logits - logits.max()
    expd = np.exp(shifted)
    probs = expd / expd.sum()
    return PolicyOutput(
        logits=logits, probabilities=probs, greedy_action=int(np.argmax(logits))
    )


def policy_forward(graph: ExplorationGraph, weights: PolicyWeights) -> PolicyOutput:
    scalars = _network_scalars(graph, weights.policy)
    logits = scalars[1:9, 0].copy()  # agent-node scalar is not an action
    return policy_output_from_logits(logits)


def critic_forward(graph: ExplorationGraph, weights: PolicyWeights) -> float:
    scalars = _network_scalars(graph, weights.critic)
    pooled = float(scalars[0:9, 0].mean())
    return float(weights.critic_fc_weight[0] * pooled + weights.critic_fc_bias[0])


# ---------------------------------------------------------------------------
# Weight file format


def canonical_tensor_shapes() -> dict[str, tuple[int, ...]]:
    shapes: dict[str, tuple[int, ...]] = {}
    for net in ("policy", "critic"):
        for h in range(LAYER1_HEADS):
            prefix = f"{net}.layer1.head{h}."
            shapes[prefix + "theta_s"] = (LAYER1_OUT, FEATURE_DIM)
            shapes[prefix + "theta_t"] = (LAYER1_OUT, FEATURE_DIM)
            shapes[prefix + "a"] = (LAYER1_OUT,)
            shapes[prefix + "bias"] = (LAYER1_OUT,)
        prefix = f"{net}.layer2."
        shapes[prefix + "theta_s"] = (LAYER2_OUT, LAYER2_IN)
        shapes[prefix + "theta_t"] = (LAYER2_OUT, LAYER2_IN)
        shapes[prefix + "a"] = (LAYER2_OUT,)
        shapes[prefix + "bias"] = (LAYER2_OUT,)
    shapes["critic.fc.weight"] = (1,)
    shapes["critic.fc.bias"] = (1,)
    return shapes


def _head_to_tensors(prefix: str, head: HeadParams) -> dict[str, np.ndarray]:
    return {
        prefix + "theta_s": head.theta_s,
        prefix + "theta_t": head.theta_t,
        prefix + "a": head.attn,
        prefix + "bias": head.bias,
    }


def weights_to_tensors(weights: PolicyWeights) -> dict[str, np.ndarray]:
    tensors: dict[str, np.ndarray] = {}
    for net_name, net in (("policy", weights.policy), ("critic", weights.critic)):
        for h, head in enumerate(net.layer1):
            tensors.update(_head_to_tensors(f"{net_name}.layer1.head{h}.", head))
        tensors.update(_head_to_tensors(f"{net_name}.layer2.", net.layer2))
    tensors["critic.fc.weight"] = weights.critic_fc_weight
    tensors["critic.fc.bias"] = weights.critic_fc_bias
    return tensors


def weights_from_tensors(tensors: dict[str, np.ndarray]) -> PolicyWeights:
    def head(prefix: str) -> HeadParams:
        return HeadParams(
            theta_s=tensors[prefix + "theta_s"],
            theta_t=tensors[prefix + "theta_t"],
            attn=tensors[prefix + "a"],
            bias=tensors[prefix + "bias"],
        )

    def network(net: str) -> NetworkWeights:
        return NetworkWeights(
            layer1=tuple(head(f"{net}.layer1.head{h}.") for h in range(LAYER1_HEADS)),
            layer2=head(f"{net}.layer2."),
        )

    return PolicyWeights(
        policy=network("policy"),
        critic=network("critic"),
        critic_fc_weight=tensors["critic.fc.weight"],
        critic_fc_bias=tensors["critic.fc.bias"],
    )


def save_weights(weights: PolicyWeights, path) -> None:
    tensors = weights_to_tensors(weights)
    doc = {"format_version": WEIGHT_FORMAT_VERSION, "tensors": {}}
    for name in sorted(tensors):
        arr = np.asarray(tensors[name], dtype=np.float32)
        if not np.isfinite(arr).all():
            raise WeightFormatError(f"tensor {name!r} contains non-finite values")
        # float32 -> float64 promotion is exact, and json emits the shortest
        # round-tripping decimal, so 32-bit values survive the trip exactly.
        doc["tensors"][name] = {
            "shape": list(arr.shape),
            "data": arr.astype(np.float64).ravel().tolist(),
        }
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_weights(path) -> PolicyWeights:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise WeightFormatError(f"cannot parse weight file {path}: {exc}") from exc

    if not isinstance(doc, dict) or "format_version" not in doc:
        raise WeightFormatError(f"{path}: not a weight document")
    if doc["format_version"] != WEIGHT_FORMAT_VERSION:
        raise WeightFormatError(
            f"{path}: unknown format_version {doc['format_version']!r}"
        )
    raw = doc.get("tensors")
    if not isinstance(raw, dict):
        raise WeightFormatError(f"{path}: missing tensors map")

    expected = canonical_tensor_shapes()
    missing = sorted(set(expected) - set(raw))
    if missing:
        raise WeightFormatError(f"{path}: missing tensor {missing[0]!r}")
    extra = sorted(set(raw) - set(expected))
    if extra:
        raise WeightFormatError(f"{path}: unexpected tensor {extra[0]!r}")

    tensors: dict[str, np.ndarray] = {}
    for name, shape in expected.items():
        entry = raw[name]
        got_shape = tuple(entry.get("shape", ()))
        if got_shape != shape:
            raise WeightFormatError(
                f"{path}: tensor {name!r} has shape {list(got_shape)}, expected {list(shape)}"
            )
        data = np.asarray(entry.get("data", ()), dtype=np.float64)
        if data.size != math.prod(shape):
            raise WeightFormatError(
                f"{path}: tensor {name!r} has {data.size} values, expected {math.prod(shape)}"
            )
        if not np.isfinite(data).all():
            raise WeightFormatError(f"{path}: tensor {name!r} contains non-finite values")
        tensors[name] = data.astype(np.float32).reshape(shape)
    return weights_from_tensors(tensors)


def zero_weights() -> PolicyWeights:
    tensors = {
        name: np.zeros(shape, dtype=np.float32)
        for name, shape in canonical_tensor_shapes().items()
    }
    return weights_from_tensors(tensors)


def random_weights(seed: int, scale: float = 0.5) -> PolicyWeights:
    rng = np.random.default_rng(seed)
    tensors = {
        name: rng.uniform(-scale, scale, size=shape).astype(np.float32)
        for name, shape in canonical_tensor_shapes().items()
    }
    return weights_from_tensors(tensors)


# ---------------------------------------------------------------------------
# Baseline proposal policies

# Integer octile step costs for the frontier baseline's path metric: the
# familiar 5 / 7 lattice approximation of 1 / sqrt(2).
STRAIGHT_COST = 5
DIAGONAL_COST = 7
_UNREACHED = np.iinfo(np.int32).max // 2


def frontier_path_distances(
    agent_map: AgentMap, frontiers, targets: Sequence[tuple[int, int]]
) -> list[int]:
    """Shortest-path distance from each target cell to its nearest frontier.

    Paths run over known-free cells under the shield's move rule; straight
    steps cost 5 and diagonal steps 7. Unreachable targets score a large
    sentinel. The relaxation stops as soon as every candidate that could
    still win the minimum is settled, so the cost scales with how far the
    nearest frontier is rather than with the map.
    """
    from .shield import allowed_move_masks  # local import avoids a cycle at load

    free = agent_map.known_free_mask()
    height, width = free.shape
    fronts = _frontier_array(frontiers)
    if len(fronts) == 0:
        return [int(_UNREACHED)] * len(targets)

    # Paths only cross known-free cells, so work on the known bounding box.
    known_rows = np.flatnonzero(free.any(axis=1))
    known_cols = np.flatnonzero(free.any(axis=0))
    r_off, r_end = int(known_rows[0]), int(known_rows[-1]) + 1
    c_off, c_end = int(known_cols[0]), int(known_cols[-1]) + 1
    free = free[r_off:r_end, c_off:c_end]
    fronts = fronts - (r_off, c_off)
    targets = [(r - r_off, c - c_off) for r, c in targets]
    height, width = free.shape

    dist = np.full((height, width), _UNREACHED, dtype=np.int32)
    dist[fronts[:, 0], fronts[:, 1]] = 0
    allowed = allowed_move_masks(free)
    costs = [DIAGONAL_COST if dr != 0 and dc != 0 else STRAIGHT_COST
             for dr, dc in ACTION_OFFSETS]

    in_targets = [
        (r, c) for r, c in targets if 0 <= r < height and 0 <= c < width and free[r, c]
    ]
    rows = np.asarray([t[0] for t in in_targets], dtype=np.int64)
    cols = np.asarray([t[1] for t in in_targets], dtype=np.int64)

    passes = 0
    while True:
        passes += 1
        updated = dist
        for (dr, dc), ok, cost in zip(ACTION_OFFSETS, allowed, costs):
            shifted = _shift_field(dist, dr, dc)
            updated = np.minimum(updated, np.where(ok, shifted + cost, _UNREACHED))
        finished = np.array_equal(updated, dist)
        dist = updated
        if rows.size:
            vmin = int(dist[rows, cols].min())
            # After m sweeps every value <= 5m is exact, and any value still
            # in flux will settle strictly above 5m, so the argmin is final.
            if vmin <= STRAIGHT_COST * passes:
                break
        if finished:
            break

    settled = {t: int(dist[t[0], t[1]]) for t in in_targets}
    return [settled.get((r, c), int(_UNREACHED)) for r, c in targets]


def _shift_field(dist: np.ndarray, dr: int, dc: int) -> np.ndarray:
    """out[r, c] = dist[r + dr, c + dc], sentinel where out of bounds."""
    height, width = dist.shape
    out = np.full_like(dist, _UNREACHED)
    src_r = slice(max(dr, 0), height + min(dr, 0))
    src_c = slice(max(dc, 0), width + min(dc, 0))
    dst_r = slice(max(-dr, 0), height + min(-dr, 0))
    dst_c = slice(max(-dc, 0), width + min(-dc, 0))
    out[dst_r, dst_c] = dist[src_r, src_c]
    return out


def _frontier_array(frontiers) -> np.ndarray:
    if isinstance(frontiers, np.ndarray):
        return frontiers.reshape(-1, 2)
    return np.asarray([(int(r), int(c)) for r, c in frontiers]).reshape(-1, 2)


def baseline_nearest_frontier(
    agent_map: AgentMap,
    pos: tuple[int, int],
    frontiers,
    feasible,
) -> int:
    """Feasible move whose target is path-closest to any frontier.

    Distance is the shortest known-free path under the shield's move rule
    (octile costs), which makes this the classic replanning nearest-frontier
    explorer; a plain straight-line metric stalls in concave pockets between
    obstacles. Ties go to the lowest action index. With every frontier
    path-unreachable the straight-line metric breaks the stalemate, with no
    frontiers left the lowest feasible index is proposed, and with nothing
    feasible index 0 is proposed so the shield resolves the step.
    """
    ordered = sorted(int(a) for a in feasible)
    if not ordered:
        return 0
    fronts = _frontier_array(frontiers)
    if len(fronts) == 0:
        return ordered[0]

    targets = [
        (pos[0] + ACTION_OFFSETS[a][0], pos[1] + ACTION_OFFSETS[a][1]) for a in ordered
    ]
    scores = frontier_path_distances(agent_map, fronts, targets)
    if min(scores) >= _UNREACHED:
        scores = [
            float(np.hypot(fronts[:, 0] - tr, fronts[:, 1] - tc).min())
            for tr, tc in targets
        ]
    best_action = ordered[0]
    best_score = scores[0]
    for a, score in zip(ordered[1:], scores[1:]):
        if score < best_score:
            best_score = score
            best_action = a
    return best_action


def baseline_random(feasible, rng: np.random.Generator) -> int:
    """Uniform proposal over all 8 moves, deliberately ignoring feasibility."""
    del feasible  # the shield is meant to see raw proposals
    return int(rng.integers(N_ACTIONS))
