"""Command-line entry point.

Exit codes: 0 on success, 1 for configuration, input or argument errors,
2 when an exact computation exceeds its enumeration cap.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .errors import CapacityError, InvalidArgument, LoadError
from .experiment import ExperimentConfig, prepare, rng_stream, run_experiment, sweep
from .graph import TOPOLOGIES, build_topology, check_weights, constant_weights, format_edge_list, load_weighted_graph
from .metrics import metrics_report

EXIT_OK, EXIT_CONFIG, EXIT_CAPACITY = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which would read as a capacity error
    def error(self, message):
        raise InvalidArgument(message)


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=None, help="master seed (overrides the config file)")
    p.add_argument("--out", default=None, help="output path")
    p.add_argument("--config", default=None, help="TOML experiment config")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="imlinucb", description="Influence-maximization semi-bandit simulator.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("run", parents=[common], help="run the experiment in --config")

    p = sub.add_parser("sweep", parents=[common], help="repeat --config over several L and fit the exponent")
    p.add_argument("--L", dest="sizes", type=int, nargs="+", required=True, help="graph sizes")

    p = sub.add_parser("metrics", parents=[common], help="complexity report for a graph as JSON")
    p.add_argument("--kind", choices=TOPOLOGIES)
    p.add_argument("--graph", help="edge-list file, optionally with a probability column")
    p.add_argument("--L", type=int, default=8)
    p.add_argument("--K", type=int, default=1)
    p.add_argument("--omega", type=float, default=None, help="constant edge weight")
    p.add_argument("--mode", choices=("auto", "exact", "sampled"), default="auto")
    p.add_argument("--n-sets", type=int, default=100, help="random seed sets in sampled mode")

    p = sub.add_parser("topology", parents=[common], help="print a generated graph as an edge list")
    p.add_argument("--kind", choices=TOPOLOGIES, required=True)
    p.add_argument("--L", type=int, required=True)
    return parser


def _load_config(args) -> ExperimentConfig:
    if not args.config:
        raise InvalidArgument("--config is required")
    cfg = ExperimentConfig.from_file(args.config)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.out is not None:
        changes["output"] = args.out
    return dataclasses.replace(cfg, **changes) if changes else cfg


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_run(args) -> None:
    cfg = _load_config(args)
    log = run_experiment(cfg, progress=lambda r: print(f"run {r + 1}/{cfg.runs} done", file=sys.stderr))
    finals = log.final_regrets()
    summary = {
        "mean_final_regret": float(finals.mean()),
        "final_regrets": finals.tolist(),
        "f_star": log.metadata["f_star"],
        "c_used": log.metadata["c_used"],
        "output": cfg.output,
    }
    print(json.dumps(summary, indent=2))


def _cmd_sweep(args) -> None:
    cfg = _load_config(args)
    result = sweep(dataclasses.replace(cfg, output=None), args.sizes)
    fit = result["fit"]
    payload = {
        "points": [{"L": r["L"], "mean_regret": r["mean_regret"], "final_regrets": r["final_regrets"]} for r in result["rows"]],
        "exponent": fit.exponent,
        "intercept": fit.intercept,
        "constant": fit.constant,
        "r_squared": fit.r_squared,
    }
    _emit(json.dumps(payload, indent=2) + "\n", args.out)


def _cmd_metrics(args) -> None:
    seed = args.seed if args.seed is not None else 0
    if args.config:
        cfg = _load_config(args)
        inst = prepare(dataclasses.replace(cfg, n=1))
        graph, weights, k = inst.graph, inst.weights, cfg.K
    elif args.graph:
        graph, weights = load_weighted_graph(args.graph)
        if args.omega is not None:
            weights = constant_weights(graph, args.omega)
        elif weights is None:
            raise InvalidArgument("graph file has no probabilities; pass --omega")
        k = args.K
    elif args.kind:
        graph = build_topology(args.kind, args.L, rng_stream(seed, 0))
        weights = constant_weights(graph, 1.0 if args.omega is None else args.omega)
        k = args.K
    else:
        raise InvalidArgument("metrics needs --kind, --graph or --config")
    weights = check_weights(graph, weights)
    report = metrics_report(graph, k, weights, mode=args.mode, n_sets=args.n_sets, rng=rng_stream(seed, 4))
    report.update(n_nodes=graph.n_nodes, n_edges=graph.n_edges, K=k)
    _emit(json.dumps(report, indent=2) + "\n", args.out)


def _cmd_topology(args) -> None:
    seed = args.seed if args.seed is not None else 0
    graph = build_topology(args.kind, args.L, rng_stream(seed, 0))
    _emit(format_edge_list(graph), args.out)


_COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "metrics": _cmd_metrics, "topology": _cmd_topology}


def cli_main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _COMMANDS[args.command](args)
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (InvalidArgument, LoadError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
