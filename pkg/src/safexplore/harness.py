"""Batch evaluation across seeds and config sweeps, with CSV/JSONL outputs.

Every run writes three files per variant: episodes.jsonl with the full
per-step records, coverage_curve.csv with the per-step mean and standard
deviation of coverage across episodes (episodes that finish early hold
their final coverage), and interventions.csv with each episode's
intervention rate. Outputs are byte-reproducible given the same inputs.
"""
from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .config import EnvConfig
from .engine import EpisodeEngine, EpisodeRecord
from .policy import (
    PolicyWeights,
    baseline_nearest_frontier,
    baseline_random,
    load_weights,
    policy_forward,
)

POLICY_KINDS = ("random", "frontier", "gnn")


class PolicySpecError(ValueError):
    """Unusable policy specification."""


@dataclass(frozen=True)
class PolicySpec:
    kind: str
    weights_path: str | None = None

    @classmethod
    def parse(cls, text: str) -> "PolicySpec":
        if text in ("random", "frontier"):
            return cls(kind=text)
        if text.startswith("gnn:"):
            path = text[len("gnn:") :]
            if not path:
                raise PolicySpecError("gnn policy needs a weights path: gnn:<path>")
            return cls(kind="gnn", weights_path=path)
        raise PolicySpecError(
            f"unknown policy spec {text!r}; expected random, frontier, or gnn:<path>"
        )

    def __str__(self) -> str:
        return self.kind if self.kind != "gnn" else f"gnn:{self.weights_path}"


class _RandomProposals:
    def __init__(self, seed: int):
        self._rng = np.random.default_rng([seed, 0x5EED])

    def propose(self, engine: EpisodeEngine) -> int:
        return baseline_random(engine.feasible, self._rng)


class _FrontierProposals:
    def propose(self, engine: EpisodeEngine) -> int:
        return baseline_nearest_frontier(
            engine.agent_map,
            engine.state.position,
            engine.frontier_cells,
            engine.feasible,
        )


class _GnnProposals:
    def __init__(self, weights: PolicyWeights):
        self._weights = weights

    def propose(self, engine: EpisodeEngine) -> int:
        return policy_forward(engine.observation, self._weights).greedy_action


def make_proposer(spec: PolicySpec, seed: int, weights: PolicyWeights | None = None):
    if spec.kind == "random":
        return _RandomProposals(seed)
    if spec.kind == "frontier":
        return _FrontierProposals()
    if spec.kind == "gnn":
        return _GnnProposals(weights if weights is not None else load_weights(spec.weights_path))
    raise PolicySpecError(f"unknown policy kind {spec.kind!r}")


def run_episode(
    config: EnvConfig,
    seed: int,
    spec: PolicySpec,
    step_cap: int,
    weights: PolicyWeights | None = None,
) -> EpisodeRecord:
    if step_cap < 1:
        raise ValueError(f"step cap must be at least 1, got {step_cap}")
    engine = EpisodeEngine(config, seed)
    proposer = make_proposer(spec, seed, weights)
    done = False
    while not done and len(engine.records) < step_cap:
        _, _, done = engine.step(proposer.propose(engine))
    return engine.record()


@dataclass
class RunSummary:
    label: str
    steps: int
    mean_curve: list[float]
    std_curve: list[float]
    final_coverages: list[float]
    intervention_rates: list[float]

    @property
    def mean_final_coverage(self) -> float:
        return float(np.mean(self.final_coverages))

    @property
    def median_intervention_rate(self) -> float:
        return float(np.median(self.intervention_rates))


def _episode_worker(args) -> EpisodeRecord:
    config_dict, seed, spec_text, step_cap = args
    config = EnvConfig().with_overrides(config_dict)
    return run_episode(config, seed, PolicySpec.parse(spec_text), step_cap)


def run_eval(
    config: EnvConfig,
    policy_spec,
    seeds,
    steps: int,
    out_dir,
    workers: int = 1,
    label: str = "run",
) -> RunSummary:
    spec = policy_spec if isinstance(policy_spec, PolicySpec) else PolicySpec.parse(policy_spec)
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise ValueError("need at least one seed")

    weights = None
    if spec.kind == "gnn":
        weights = load_weights(spec.weights_path)  # fail before any episode runs

    if workers > 1:
        jobs = [(config.to_dict(), s, str(spec), steps) for s in seeds]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_episode_worker, jobs))
    else:
        records = [run_episode(config, s, spec, steps, weights) for s in seeds]

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_episodes(out_dir / "episodes.jsonl", records)

    curves = np.empty((len(records), steps), dtype=np.float64)
    for i, record in enumerate(records):
        coverage = [s.coverage for s in record.steps]
        if len(coverage) < steps:
            coverage = coverage + [record.final_coverage] * (steps - len(coverage))
        curves[i] = coverage[:steps]
    mean_curve = curves.mean(axis=0)
    std_curve = curves.std(axis=0)

    with open(out_dir / "coverage_curve.csv", "w") as fh:
        fh.write("step,mean_coverage,stddev\n")
        for i in range(steps):
            fh.write(f"{i + 1},{mean_curve[i]!r},{std_curve[i]!r}\n")

    with open(out_dir / "interventions.csv", "w") as fh:
        fh.write("seed,intervention_rate\n")
        for record in records:
            fh.write(f"{record.seed},{record.intervention_rate!r}\n")

    return RunSummary(
        label=label,
        steps=steps,
        mean_curve=mean_curve.tolist(),
        std_curve=std_curve.tolist(),
        final_coverages=[r.final_coverage for r in records],
        intervention_rates=[r.intervention_rate for r in records],
    )


SWEEP_KINDS = ("map_size", "trees")


def run_sweep(
    config: EnvConfig,
    kind: str,
    values,
    policy_spec,
    seeds,
    steps: int,
    out_dir,
    workers: int = 1,
) -> dict[str, RunSummary]:
    if kind not in SWEEP_KINDS:
        raise ValueError(f"sweep kind must be one of {SWEEP_KINDS}, got {kind!r}")
    out_dir = Path(out_dir)
    summaries: dict[str, RunSummary] = {}
    for value in values:
        value = int(value)
        if kind == "map_size":
            variant = replace(config, h=value, w=value)
            label = f"map_{value}"
        else:
            variant = replace(config, n_t=value)
            label = f"trees_{value}"
        summaries[label] = run_eval(
            variant, policy_spec, seeds, steps, out_dir / label, workers, label
        )

    with open(out_dir / "sweep_summary.csv", "w") as fh:
        fh.write("label,mean_final_coverage,median_intervention_rate\n")
        for label, summary in summaries.items():
            fh.write(
                f"{label},{summary.mean_final_coverage!r},"
                f"{summary.median_intervention_rate!r}\n"
            )
    return summaries


def _write_episodes(path: Path, records) -> None:
    with open(path, "w") as fh:
        for record in records:
            fh.write(json.dumps(record.to_json_dict(), separators=(",", ":")) + "\n")


def aggregate_from_jsonl(path, steps: int) -> tuple[np.ndarray, np.ndarray, list, list]:
    """Recompute run aggregates from episodes.jsonl (a pure fold)."""
    curves = []
    finals = []
    rates = []
    with open(path) as fh:
        for line in fh:
            episode = json.loads(line)
            coverage = [s["coverage"] for s in episode["steps"]]
            if len(coverage) < steps:
                coverage += [episode["final_coverage"]] * (steps - len(coverage))
            curves.append(coverage[:steps])
            finals.append(episode["final_coverage"])
            rates.append(episode["intervention_rate"])
    arr = np.asarray(curves)
    return arr.mean(axis=0), arr.std(axis=0), finals, rates
