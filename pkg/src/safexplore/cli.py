"""Command-line front end: eval, sweep, and serve."""
from __future__ import annotations

import argparse
import sys

from .config import EnvConfig
from .harness import SWEEP_KINDS, PolicySpec, run_eval, run_sweep
from .server import serve, serve_stdio


def _load_config(path) -> EnvConfig:
    return EnvConfig.from_file(path) if path else EnvConfig()


def _add_eval_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="config file (defaults to nominal parameters)")
    parser.add_argument(
        "--policy", required=True, help="random | frontier | gnn:<weights path>"
    )
    parser.add_argument("--seeds", type=int, default=100, help="number of episodes")
    parser.add_argument("--seed-base", type=int, default=None,
                        help="first seed (default: config seed)")
    parser.add_argument("--steps", type=int, default=None,
                        help="per-episode step cap (default: config n_s_star)")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--workers", type=int, default=1)


def _eval_common(args) -> tuple[EnvConfig, PolicySpec, list[int], int]:
    config = _load_config(args.config)
    spec = PolicySpec.parse(args.policy)
    base = args.seed_base if args.seed_base is not None else config.seed
    seeds = list(range(base, base + args.seeds))
    steps = args.steps if args.steps is not None else config.n_s_star
    return config, spec, seeds, steps


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="safexplore",
        description="Exploration simulator: batch evaluation, sweeps, and the env service",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="run one episode per seed and aggregate")
    _add_eval_args(p_eval)

    p_sweep = sub.add_parser("sweep", help="run eval across map-size or tree-count variants")
    _add_eval_args(p_sweep)
    p_sweep.add_argument("--kind", required=True, choices=SWEEP_KINDS)
    p_sweep.add_argument(
        "--values", required=True, help="comma-separated variant values, e.g. 45,60,75"
    )

    p_serve = sub.add_parser("serve", help="run the environment wire service")
    p_serve.add_argument("--config", help="config file")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=7341)
    p_serve.add_argument("--stdio", action="store_true",
                         help="serve one session over stdin/stdout instead of TCP")

    args = parser.parse_args(argv)
    try:
        if args.command == "eval":
            config, spec, seeds, steps = _eval_common(args)
            summary = run_eval(config, spec, seeds, steps, args.out, args.workers)
            print(
                f"{len(seeds)} episodes: mean final coverage "
                f"{summary.mean_final_coverage:.4f}, median intervention rate "
                f"{summary.median_intervention_rate:.4f}"
            )
        elif args.command == "sweep":
            config, spec, seeds, steps = _eval_common(args)
            values = [int(v) for v in args.values.split(",") if v]
            summaries = run_sweep(
                config, args.kind, values, spec, seeds, steps, args.out, args.workers
            )
            for label, summary in summaries.items():
                print(
                    f"{label}: mean final coverage {summary.mean_final_coverage:.4f}, "
                    f"median intervention rate {summary.median_intervention_rate:.4f}"
                )
        elif args.command == "serve":
            config = _load_config(args.config)
            if args.stdio:
                serve_stdio(config)
            else:
                serve(config, args.host, args.port)
    except Exception as exc:  # surface a diagnostic, not a traceback
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
