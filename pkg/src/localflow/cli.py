"""Command-line front end: instance generation, clustering runs, batch
experiments and evaluation. Exit codes: 0 success, 1 runtime failure,
2 usage error."""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys

from . import io
from .attributes import default_gamma, estimate_sigma_hat, neighborhood_average
from .clustering import alpha_sweep, local_cluster, precision_recall_f1
from .diffusion import DiffusionConfig
from .errors import LocalFlowError
from .graph import NodeSet
from .synth import ModelParams, generate
from .experiments import ExperimentSpec, run_experiment, write_outputs

log = logging.getLogger(__name__)


def _probability(name: str):
    def parse(text: str) -> float:
        value = float(text)
        if not (0.0 <= value <= 1.0):
            raise argparse.ArgumentTypeError(
                f"{name} must be a probability in [0, 1], got {text}")
        return value
    return parse


def _positive(name: str, cast=float):
    def parse(text: str):
        value = cast(text)
        if value <= 0:
            raise argparse.ArgumentTypeError(f"{name} must be positive, got {text}")
        return value
    return parse


def _grid(text: str) -> list[float]:
    """Parse `start:stop:step` (inclusive stop) or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError("grid must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise argparse.ArgumentTypeError("grid needs step > 0 and stop >= start")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [start + i * step for i in range(count)]
    return [float(p) for p in text.split(",") if p]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="localflow",
                                     description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="sample a synthetic instance to files")
    gen.add_argument("--n", type=_positive("--n", int), required=True)
    gen.add_argument("--k", type=_positive("--k", int), required=True)
    gen.add_argument("--p", type=_probability("--p"), required=True)
    gen.add_argument("--q", type=_probability("--q"), required=True)
    gen.add_argument("--p-out", type=_probability("--p-out"), default=None)
    gen.add_argument("--outside", choices=["sbm", "er"], default="sbm")
    gen.add_argument("--d", type=_positive("--d", int), default=1)
    gen.add_argument("--a", type=float, default=0.0)
    gen.add_argument("--sigma", type=_positive("--sigma"), default=1.0)
    gen.add_argument("--noise", choices=["gaussian", "rademacher", "uniform"],
                     default="gaussian")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", default=".", help="output directory")

    clu = sub.add_parser("cluster", help="recover a cluster around a seed node")
    clu.add_argument("--graph", required=True)
    clu.add_argument("--attrs")
    clu.add_argument("--seed-node", required=True)
    clu.add_argument("--gamma", default="auto",
                     help="kernel bandwidth, or 'auto' for the default rule")
    clu.add_argument("--alpha", type=_positive("--alpha"))
    clu.add_argument("--alpha-grid", type=_grid,
                     help="start:stop:step or comma list; adds a selected row")
    clu.add_argument("--size-estimate", type=_positive("--size-estimate"),
                     required=True,
                     help="estimate of the target cluster's total sink capacity")
    clu.add_argument("--sink", choices=["unit", "degree"], default="unit")
    clu.add_argument("--sweep", action="store_true",
                     help="apply sweep-cut rounding to the support")
    clu.add_argument("--sweep-normalized", action="store_true",
                     help="order the sweep by x/deg instead of raw x")
    clu.add_argument("--no-attributes", action="store_true")
    clu.add_argument("--avg-attrs", action="store_true",
                     help="average each node's attributes with its neighbors'")
    clu.add_argument("--ground-truth")
    clu.add_argument("--cluster-out")
    clu.add_argument("--rng-seed", type=int, default=0)

    exp = sub.add_parser("experiment", help="batch trials over synthetic instances")
    exp.add_argument("--mode", choices=["figure1a", "figure1b", "figure1c",
                                        "figure2", "custom"], default="custom")
    exp.add_argument("--trials", type=_positive("--trials", int), default=100)
    exp.add_argument("--seeds", type=int, default=0)
    exp.add_argument("--alpha-grid", type=_grid)
    exp.add_argument("--a-grid", type=_grid)
    exp.add_argument("--methods", default="attributed,unattributed")
    exp.add_argument("--shared-instance", action="store_true")
    exp.add_argument("--sink", choices=["unit", "degree"], default="unit")
    exp.add_argument("--out", default=".", help="output directory")
    exp.add_argument("--n", type=_positive("--n", int), default=1000)
    exp.add_argument("--k", type=_positive("--k", int), default=100)
    exp.add_argument("--p", type=_probability("--p"), default=0.05)
    exp.add_argument("--q", type=_probability("--q"), default=0.005)
    exp.add_argument("--d", type=_positive("--d", int), default=10)
    exp.add_argument("--sigma", type=_positive("--sigma"), default=1.0)

    ev = sub.add_parser("eval", help="score a cluster file against ground truth")
    ev.add_argument("--cluster", required=True)
    ev.add_argument("--target", required=True)

    return parser


def _cmd_generate(args) -> int:
    params = ModelParams(n=args.n, k=args.k, p=args.p, q=args.q, d=args.d,
                         a=args.a, sigma=args.sigma, noise=args.noise,
                         outside_model=args.outside, p_out=args.p_out,
                         seed=args.seed)
    inst = generate(params)
    io.write_instance(args.out, inst)
    print(f"wrote graph.txt attrs.csv target.txt params.json to {args.out}")
    return 0


CLUSTER_HEADER = "seed,alpha,gamma,cluster_size,conductance,nodes_touched,pushes,converged"


def _cluster_row(seed_label: str, result, with_metrics: bool) -> str:
    cond = repr(result.conductance) if result.conductance is not None else "nan"
    parts = [seed_label, repr(result.alpha), repr(result.gamma),
             str(len(result.cluster)), cond, str(result.nodes_touched),
             str(result.pushes), "true" if result.converged else "false"]
    if with_metrics:
        m = result.metrics
        parts += [repr(m.precision), repr(m.recall), repr(m.f1)]
    return ",".join(parts)


def _cmd_cluster(args, parser) -> int:
    if (args.alpha is None) == (args.alpha_grid is None):
        parser.error("exactly one of --alpha / --alpha-grid is required")
    graph, node_map = io.read_edge_list(args.graph)
    if not node_map.is_identity:
        node_map.write(os.path.join(os.path.dirname(args.graph) or ".", "nodes.map"))
    seed = node_map.index(args.seed_node)

    attrs = None
    if args.attrs and not args.no_attributes:
        attrs = io.read_attributes(args.attrs, node_map, graph.n)
        if args.avg_attrs:
            attrs = neighborhood_average(graph, attrs)

    if args.no_attributes or attrs is None:
        gamma = 0.0
    elif args.gamma == "auto":
        gamma = default_gamma(graph.n, estimate_sigma_hat(attrs))
    else:
        gamma = float(args.gamma)
        if gamma < 0:
            parser.error("--gamma must be nonnegative")

    target = None
    if args.ground_truth:
        target = io.read_target(args.ground_truth, node_map)

    cfg = DiffusionConfig(rng_seed=args.rng_seed)
    header = CLUSTER_HEADER + (",precision,recall,f1" if target is not None else "")
    print(header)
    if args.alpha is not None:
        result = local_cluster(graph, attrs, seed, gamma, args.alpha,
                               args.size_estimate, sink=args.sink, cfg=cfg,
                               target=target, sweep=args.sweep,
                               sweep_normalized=args.sweep_normalized)
        print(_cluster_row(args.seed_node, result, target is not None))
        chosen = result
    else:
        outcome = alpha_sweep(graph, attrs, seed, gamma, args.alpha_grid,
                              args.size_estimate, sink=args.sink, cfg=cfg,
                              target=target, sweep=args.sweep,
                              sweep_normalized=args.sweep_normalized)
        for cand in outcome.candidates:
            print(_cluster_row(args.seed_node, cand, target is not None))
        print(_cluster_row("selected", outcome.selected, target is not None))
        chosen = outcome.selected
    if args.cluster_out:
        io.write_target(args.cluster_out, chosen.cluster)
    return 0


def _cmd_experiment(args) -> int:
    kwargs = dict(mode=args.mode, trials=args.trials, seeds=args.seeds,
                  methods=tuple(m.strip() for m in args.methods.split(",") if m.strip()),
                  shared_instance=args.shared_instance, sink=args.sink,
                  n=args.n, k=args.k, p=args.p, q=args.q, d=args.d,
                  sigma=args.sigma)
    if args.alpha_grid:
        kwargs["alpha_grid"] = args.alpha_grid
    if args.a_grid:
        kwargs["a_grid"] = args.a_grid
    spec = ExperimentSpec(**kwargs)
    if args.mode != "custom":
        if args.alpha_grid:
            spec.alpha_grid = sorted(args.alpha_grid)
        if args.a_grid:
            spec.a_grid = sorted(args.a_grid)
    rows = run_experiment(spec)
    write_outputs(args.out, spec, rows)
    print(f"wrote long.csv summary.csv bestf1.csv params.json to {args.out}")
    return 0


def _cmd_eval(args) -> int:
    cluster_ids = []
    with open(args.cluster, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                cluster_ids.append(int(line))
    target_ids = []
    with open(args.target, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                target_ids.append(int(line))
    if not target_ids:
        raise LocalFlowError(f"{args.target}: empty target set")
    metrics = precision_recall_f1(NodeSet.of(cluster_ids), NodeSet.of(target_ids))
    print("precision,recall,f1")
    print(f"{metrics.precision!r},{metrics.recall!r},{metrics.f1!r}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "generate":
            return _cmd_generate(args)
        if args.command == "cluster":
            return _cmd_cluster(args, parser)
        if args.command == "experiment":
            return _cmd_experiment(args)
        if args.command == "eval":
            return _cmd_eval(args)
        parser.error(f"unknown command {args.command}")
    except LocalFlowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
