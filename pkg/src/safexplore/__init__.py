"""Deterministic 2D exploration simulator and safe-policy harness."""

from .config import ConfigError, EnvConfig
from .engine import EpisodeEngine, EpisodeRecord, StepRecord, reset
from .frontier_field import (
    Frontier,
    detect_frontiers,
    frontier_potentials,
    information_gain,
    state_potential,
)
from .graph import ExplorationGraph, GraphNode, NodeClass, build_graph, node_features
from .gridworld import (
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
    place_agent,
)
from .policy import (
    PolicyOutput,
    PolicyWeights,
    WeightFormatError,
    baseline_nearest_frontier,
    baseline_random,
    critic_forward,
    gatv2_layer,
    load_weights,
    policy_forward,
    save_weights,
)
from .reward import RewardBranch, RewardParams, RewardTerms, compute_reward
from .sensing import ScanContradictionError, ScanResult, integrate_scan, lidar_scan
from .shield import STAY, ShieldOutcome, feasible_actions, reachable_free_cells, shield

__version__ = "0.1.0"

__all__ = [
    "Action",
    "AgentMap",
    "AgentState",
    "CellState",
    "ConfigError",
    "EnvConfig",
    "EpisodeEngine",
    "EpisodeRecord",
    "ExplorationGraph",
    "Frontier",
    "GraphNode",
    "GridError",
    "GroundTruthMap",
    "InfeasibleActionError",
    "NodeClass",
    "PolicyOutput",
    "PolicyWeights",
    "RewardBranch",
    "RewardParams",
    "RewardTerms",
    "STAY",
    "ScanContradictionError",
    "ScanResult",
    "ShieldOutcome",
    "StepRecord",
    "Trunk",
    "WeightFormatError",
    "apply_action",
    "baseline_nearest_frontier",
    "baseline_random",
    "build_graph",
    "compute_reward",
    "critic_forward",
    "detect_frontiers",
    "exploration_ratio",
    "feasible_actions",
    "frontier_potentials",
    "gatv2_layer",
    "generate_map",
    "information_gain",
    "integrate_scan",
    "is_terminal",
    "lidar_scan",
    "load_weights",
    "node_features",
    "place_agent",
    "policy_forward",
    "reachable_free_cells",
    "reset",
    "save_weights",
    "shield",
    "state_potential",
]
