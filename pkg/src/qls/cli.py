"""Command-line harness: instance generation, strategy runs, figure datasets.

Subcommands mirror the experiment harness; every command is deterministic
under fixed seeds, embeds the config hash in its output, and refuses to
overwrite existing files without --force. A JSON file passed via --config
overrides any flag of the same name.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields

from .graphs import ProblemGraph, generate_regular_graph
from .experiments import (
    ExperimentConfig,
    bound_vs_optim_command,
    check_output_path,
    curvature_variance_command,
    quartic_command,
    run_strategy_command,
    slice_command,
    ts_accuracy_command,
)

STRATEGIES = ("greedy", "single-ts", "fourier")


def _parse_int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok.strip() != ""]


def _add_ensemble_args(sub, default_p_max: int, default_n: str):
    sub.add_argument("--n-values", type=_parse_int_list, default=_parse_int_list(default_n),
                     help="comma-separated vertex counts")
    sub.add_argument("--seeds", type=_parse_int_list, default=None,
                     help="comma-separated instance seeds")
    sub.add_argument("--num-instances", type=int, default=10,
                     help="used when --seeds is absent: seeds = base..base+count-1")
    sub.add_argument("--seed-base", type=int, default=0)
    sub.add_argument("--p-max", type=int, default=default_p_max)
    sub.add_argument("--degree", type=int, default=3)
    sub.add_argument("--weighted", action="store_true")
    sub.add_argument("--strategy", choices=STRATEGIES, default="single-ts")
    sub.add_argument("--r", dest="num_perturbations", type=int, default=10,
                     help="random restarts per depth for the fourier strategy")
    sub.add_argument("--out", required=True)
    sub.add_argument("--force", action="store_true")
    sub.add_argument("--parallelism", type=int, default=0,
                     help="worker processes (0 = all cores; QLS_THREADS caps)")
    sub.add_argument("--config", default=None, help="JSON file overriding flags")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qls", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    graph = subs.add_parser("graph", help="problem-instance utilities")
    graph_subs = graph.add_subparsers(dest="graph_command", required=True)
    gen = graph_subs.add_parser("gen", help="sample a random regular graph")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--degree", type=int, default=3)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--weighted", action="store_true")
    gen.add_argument("--out", required=True)
    gen.add_argument("--force", action="store_true")

    run = subs.add_parser("run", help="run a depth-increasing strategy, write JSONL trace")
    _add_ensemble_args(run, default_p_max=10, default_n="12")

    tsacc = subs.add_parser("ts-accuracy", help="saddle estimate accuracy CSV")
    _add_ensemble_args(tsacc, default_p_max=10, default_n="10")

    curv = subs.add_parser("curvature-variance", help="curvature/variance/ratio decay CSV")
    _add_ensemble_args(curv, default_p_max=12, default_n="12")

    bound = subs.add_parser("bound-vs-optim", help="improvement bound vs optimization CSV")
    _add_ensemble_args(bound, default_p_max=10, default_n="12")

    quartic = subs.add_parser("quartic", help="exact vs approximate quartic coefficient CSV")
    _add_ensemble_args(quartic, default_p_max=10, default_n="12")

    slc = subs.add_parser("slice", help="energy slice scan CSV at one saddle")
    _add_ensemble_args(slc, default_p_max=5, default_n="10")
    slc.add_argument("--target-p", type=int, default=3,
                     help="depth of the minimum whose saddle is scanned")
    slc.add_argument("--eps-max", type=float, default=0.3)
    slc.add_argument("--eps-points", type=int, default=61)

    return parser


def _config_from_args(experiment: str, args: argparse.Namespace) -> ExperimentConfig:
    seeds = args.seeds
    if seeds is None:
        seeds = list(range(args.seed_base, args.seed_base + args.num_instances))
    known = {f.name for f in fields(ExperimentConfig)}
    overrides = {}
    if args.config:
        overrides = json.loads(open(args.config).read())
        unknown = set(overrides) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
    kwargs = dict(
        experiment=experiment,
        n_values=args.n_values,
        seeds=seeds,
        p_max=args.p_max,
        degree=args.degree,
        weighted=args.weighted,
        strategy=args.strategy,
        num_perturbations=args.num_perturbations,
        out=args.out,
        force=args.force,
        parallelism=args.parallelism,
    )
    for name in ("target_p", "eps_max", "eps_points"):
        if hasattr(args, name):
            kwargs[name] = getattr(args, name)
    kwargs.update(overrides)
    return ExperimentConfig(**kwargs)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "graph":
            path = check_output_path(args.out, args.force)
            graph = generate_regular_graph(args.n, args.degree, args.weighted, args.seed)
            graph.save(path)
            loaded = ProblemGraph.load(path)
            if loaded != graph:
                raise RuntimeError("round-trip validation of the written graph failed")
            print(path)
            return 0
        runner = {
            "run": run_strategy_command,
            "ts-accuracy": ts_accuracy_command,
            "curvature-variance": curvature_variance_command,
            "bound-vs-optim": bound_vs_optim_command,
            "quartic": quartic_command,
            "slice": slice_command,
        }[args.command]
        config = _config_from_args(args.command, args)
        print(runner(config))
        return 0
    except (ValueError, FileExistsError, FileNotFoundError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
