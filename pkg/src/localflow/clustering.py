"""End-to-end local clustering pipeline, sweep-cut rounding, and metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import diffusion
from .attributes import AttributeMatrix, EdgeWeightView, base_view, reweight
from .diffusion import DiffusionConfig, SourceSink
from .errors import LocalFlowError
from .graph import Graph, NodeSet, weighted_conductance


@dataclass
class Metrics:
    precision: float
    recall: float
    f1: float
    empty_prediction: bool = False


@dataclass
class ClusterResult:
    cluster: NodeSet
    alpha: float
    gamma: float
    conductance: float | None
    nodes_touched: int
    pushes: int
    converged: bool
    degenerate: bool = False
    metrics: Metrics | None = None
    support_size: int = 0
    x: dict[int, float] | None = None


def precision_recall_f1(C: NodeSet, K: NodeSet) -> Metrics:
    """Precision |C∩K|/|C|, recall |C∩K|/|K|, F1 their harmonic mean."""
    if not len(K):
        raise LocalFlowError("ground-truth set must be nonempty")
    if not len(C):
        return Metrics(0.0, 0.0, 0.0, empty_prediction=True)
    inter = len(set(C.members) & set(K.members))
    precision = inter / len(C)
    recall = inter / len(K)
    f1 = 2.0 / (1.0 / precision + 1.0 / recall) if inter else 0.0
    return Metrics(precision, recall, f1)


def sweep_cut(g: Graph, w: EdgeWeightView, x: dict[int, float],
              normalized: bool = False) -> NodeSet:
    """Minimum-conductance prefix of the support ordered by x descending.

    Ties break by ascending node id; with normalized=True the ordering key is
    x_i / deg(i). Cut and volume are updated incrementally, so total work is
    linear in the volume of the support.
    """
    supp = [i for i, v in x.items() if v > 0]
    if not supp:
        raise LocalFlowError("sweep cut needs a nonempty support")
    if normalized:
        order = sorted(supp, key=lambda i: (-x[i] / max(g.degree(i), 1), i))
    else:
        order = sorted(supp, key=lambda i: (-x[i], i))
    inset: set[int] = set()
    cut = 0.0
    vol = 0.0
    best_phi = math.inf
    best_idx = 0
    for idx, v in enumerate(order):
        nbrs = g.neighbor_ids(v)
        if len(nbrs):
            wv = w.node_weights(v)
            total = float(wv.sum())
            internal = float(sum(wv[k] for k, j in enumerate(nbrs.tolist()) if j in inset))
        else:
            total = 0.0
            internal = 0.0
        vol += total
        cut += total - 2.0 * internal
        inset.add(v)
        phi = cut / vol if vol > 0 else math.inf
        if phi < best_phi:
            best_phi = phi
            best_idx = idx
    return NodeSet.of(order[:best_idx + 1])


def _conductance_or_none(g: Graph, w, cluster: NodeSet) -> float | None:
    if not len(cluster) or len(cluster) == g.n:
        return None
    try:
        return weighted_conductance(g, w, cluster)
    except LocalFlowError:
        return None


def local_cluster(g: Graph, X: AttributeMatrix | None, s: int, gamma: float,
                  alpha: float, size_estimate: float, sink="unit",
                  cfg: DiffusionConfig | None = None, target: NodeSet | None = None,
                  sweep: bool = False, sweep_normalized: bool = False,
                  keep_x: bool = False) -> ClusterResult:
    """Run the reweighted diffusion from seed s and extract a cluster.

    Source mass is alpha * size_estimate, where size_estimate stands in for
    the total sink capacity of the target cluster. Only edges the diffusion
    actually crosses ever have kernel weights computed.
    """
    if s < 0 or s >= g.n:
        raise LocalFlowError(f"seed node {s} out of range")
    if alpha <= 0:
        raise LocalFlowError("alpha must be positive")
    if size_estimate <= 0:
        raise LocalFlowError("size estimate must be positive")
    view = reweight(g, X, gamma) if (X is not None and gamma > 0) else base_view(g)
    st = SourceSink({s: alpha * size_estimate}, sink)
    state = diffusion.run(g, view, st, cfg)
    supp = diffusion.support(state)
    if sweep and len(supp):
        cluster = sweep_cut(g, view, state.x, normalized=sweep_normalized)
    else:
        cluster = supp
    result = ClusterResult(
        cluster=cluster,
        alpha=alpha,
        gamma=gamma if (X is not None and gamma > 0) else 0.0,
        conductance=_conductance_or_none(g, view, cluster),
        nodes_touched=state.nodes_touched,
        pushes=state.push_count,
        converged=state.converged,
        degenerate=len(cluster) == 0,
        support_size=len(supp),
        x=dict(state.x) if keep_x else None,
    )
    if target is not None:
        result.metrics = precision_recall_f1(cluster, target)
    return result


@dataclass
class SweepOutcome:
    selected: ClusterResult
    candidates: list[ClusterResult]


def alpha_sweep(g: Graph, X: AttributeMatrix | None, s: int, gamma: float,
                alphas, size_estimate: float, sink="unit",
                cfg: DiffusionConfig | None = None, target: NodeSet | None = None,
                select: str = "min_conductance", sweep: bool = False,
                sweep_normalized: bool = False) -> SweepOutcome:
    """Run local_cluster for every alpha and pick a winner.

    select="min_conductance" picks the candidate with the lowest weighted
    conductance (ties by smaller alpha); select="best_f1" requires ground
    truth and picks the highest F1.
    """
    alphas = list(alphas)
    if not alphas:
        raise LocalFlowError("alpha grid must be nonempty")
    if select == "best_f1" and target is None:
        raise LocalFlowError("best_f1 selection needs ground truth")
    candidates = [local_cluster(g, X, s, gamma, a, size_estimate, sink=sink,
                                cfg=cfg, target=target, sweep=sweep,
                                sweep_normalized=sweep_normalized)
                  for a in sorted(alphas)]
    usable = [c for c in candidates if not c.degenerate]
    if not usable:
        raise LocalFlowError("every alpha produced an empty cluster")
    if select == "min_conductance":
        best = min(usable, key=lambda c: (c.conductance if c.conductance is not None
                                          else math.inf))
    elif select == "best_f1":
        best = max(usable, key=lambda c: c.metrics.f1)
    else:
        raise LocalFlowError(f"unknown selection rule {select!r}")
    return SweepOutcome(selected=best, candidates=candidates)
