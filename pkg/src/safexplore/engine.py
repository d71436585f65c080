"""Episode orchestration: observe, propose, shield, move, scan, reward.

One engine owns one episode. Each step shields the proposal, moves (or
stays when nothing is feasible), scans from the new cell, refreshes the
frontier set and observation graph, computes the reward, and checks
termination. The potential entering the reward uses the map and position
before the move; the potential after uses the post-scan map and new
position.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .config import EnvConfig
from .frontier_field import frontier_cells, max_normalized_potential
from .graph import ExplorationGraph, build_graph
from .gridworld import (
    AgentMap,
    AgentState,
    GroundTruthMap,
    apply_action,
    exploration_ratio,
    generate_map,
    is_terminal,
    place_agent,
)
from .reward import RewardParams, RewardTerms, compute_reward
from .sensing import integrate_scan, lidar_scan
from .shield import STAY, feasible_actions, reachable_free_cells, shield

TERMINATION_COVERAGE = "coverage"
TERMINATION_STEP_LIMIT = "step_limit"


class EpisodeDoneError(RuntimeError):
    """step() was called on a finished episode."""


@dataclass(frozen=True)
class StepRecord:
    index: int
    proposed: int
    executed: Optional[int]
    intervened: bool
    new_cells: int
    coverage: float
    reward: RewardTerms
    agent_cell: tuple[int, int]

    def to_json_dict(self) -> dict:
        return {
            "index": self.index,
            "proposed": self.proposed,
            "executed": self.executed,
            "intervened": self.intervened,
            "new_cells": self.new_cells,
            "coverage": self.coverage,
            "reward": self.reward.to_json_dict(),
            "agent_cell": [self.agent_cell[0], self.agent_cell[1]],
        }


@dataclass
class EpisodeRecord:
    seed: int
    config: dict
    steps: list[StepRecord]
    final_coverage: float
    termination: str
    intervention_rate: float

    def to_json_dict(self) -> dict:
        return {
            "seed": self.seed,
            "config": self.config,
            "final_coverage": self.final_coverage,
            "termination": self.termination,
            "intervention_rate": self.intervention_rate,
            "steps": [s.to_json_dict() for s in self.steps],
        }


class EpisodeEngine:
    """Single-episode simulator; not safe to share across threads."""

    def __init__(
        self,
        config: EnvConfig,
        seed: int,
        truth: Optional[GroundTruthMap] = None,
        start: Optional[tuple[int, int]] = None,
    ):
        self.config = config
        self.seed = int(seed)
        map_seed, place_seed = (
            int(s) for s in np.random.SeedSequence(self.seed).generate_state(2)
        )
        if truth is None:
            truth = generate_map(map_seed, config.h, config.w, config.n_t, config.r_range)
        self.truth = truth
        if start is None:
            self.state = place_agent(self.truth, place_seed)
        else:
            self.state = AgentState(position=(int(start[0]), int(start[1])))
        if not self.truth.is_free(self.state.position):
            raise ValueError(f"start cell {self.state.position} is not free")

        self.agent_map = AgentMap.unknown(self.truth.height, self.truth.width)
        self.reachable = reachable_free_cells(self.truth, self.state.position)
        self._reward_params = RewardParams(
            rho_star=config.rho_star, r_exp=config.r_exp, r_sigma=config.r_sigma
        )
        self.records: list[StepRecord] = []
        self.done = False
        self.termination: Optional[str] = None
        self._scan_and_refresh()

    # -- observation state ---------------------------------------------------

    def _scan_and_refresh(self) -> int:
        scan = lidar_scan(self.truth, self.state.position, self.config.l)
        new_cells = integrate_scan(self.agent_map, scan)
        self.frontier_cells = frontier_cells(self.agent_map)
        self.feasible = feasible_actions(self.agent_map, self.state.position)
        self.potential = max_normalized_potential(
            self.agent_map,
            self.frontier_cells,
            self.state.position,
            self.config.beta,
            self.config.k,
        )
        self.coverage = exploration_ratio(self.agent_map, self.reachable)
        self.observation = build_graph(
            self.agent_map,
            self.state.position,
            self.frontier_cells,
            self.feasible,
            self.config.k,
        )
        return new_cells

    # -- stepping -------------------------------------------------------------

    def step(self, proposed: int) -> tuple[StepRecord, ExplorationGraph, bool]:
        if self.done:
            raise EpisodeDoneError("episode already terminated; reset to continue")
        outcome = shield(proposed, self.feasible)
        potential_before = self.potential

        if outcome.executed is STAY:
            self.state = replace(self.state, step_count=self.state.step_count + 1)
        else:
            self.state = apply_action(
                self.state, outcome.executed, self.truth, self.agent_map
            )

        new_cells = self._scan_and_refresh()
        terms = compute_reward(
            self.coverage,
            outcome.intervened,
            new_cells,
            potential_before,
            self.potential,
            self._reward_params,
        )
        self.done = is_terminal(
            self.coverage,
            self.state.step_count,
            self.config.rho_star,
            self.config.n_s_star,
        )
        if self.done:
            self.termination = (
                TERMINATION_COVERAGE
                if self.coverage >= self.config.rho_star
                else TERMINATION_STEP_LIMIT
            )

        record = StepRecord(
            index=self.state.step_count,
            proposed=int(proposed),
            executed=outcome.executed,
            intervened=outcome.intervened,
            new_cells=new_cells,
            coverage=self.coverage,
            reward=terms,
            agent_cell=self.state.position,
        )
        self.records.append(record)
        return record, self.observation, self.done

    def record(self) -> EpisodeRecord:
        interventions = sum(1 for r in self.records if r.intervened)
        steps = len(self.records)
        return EpisodeRecord(
            seed=self.seed,
            config=self.config.to_dict(),
            steps=list(self.records),
            final_coverage=self.coverage,
            termination=self.termination or TERMINATION_STEP_LIMIT,
            intervention_rate=interventions / steps if steps else 0.0,
        )


def reset(config: EnvConfig, seed: int) -> tuple[EpisodeEngine, ExplorationGraph]:
    engine = EpisodeEngine(config, seed)
    return engine, engine.observation
