"""File ingestion and emission: edge lists, attribute CSVs, target lists,
params JSON, and the external-id relabeling map."""

from __future__ import annotations

import json
import os

import numpy as np

from .attributes import AttributeMatrix
from .errors import GraphFormatError
from .graph import Graph, NodeSet
from .synth import Instance, ModelParams


class NodeMap:
    """Bidirectional map between external node ids and dense indices.

    When every external id is a nonnegative integer the identity mapping is
    used (n = max id + 1); otherwise ids are assigned dense indices in order
    of first appearance.
    """

    def __init__(self, identity_n: int | None = None,
                 to_index: dict[str, int] | None = None):
        self.identity_n = identity_n
        self.to_index = to_index or {}

    @property
    def is_identity(self) -> bool:
        return self.identity_n is not None

    def index(self, external) -> int:
        if self.is_identity:
            i = int(external)
            if i < 0 or i >= self.identity_n:
                raise GraphFormatError(f"node id {external} out of range")
            return i
        key = str(external)
        if key not in self.to_index:
            raise GraphFormatError(f"unknown node id {external!r}")
        return self.to_index[key]

    def write(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            if self.is_identity:
                fh.write(f"# identity {self.identity_n}\n")
            else:
                for ext, idx in sorted(self.to_index.items(), key=lambda kv: kv[1]):
                    fh.write(f"{ext}\t{idx}\n")

    @classmethod
    def read(cls, path: str) -> "NodeMap":
        with open(path, encoding="utf-8") as fh:
            first = fh.readline()
            if first.startswith("# identity"):
                return cls(identity_n=int(first.split()[2]))
            mapping = {}
            for line in [first] + fh.readlines():
                if not line.strip():
                    continue
                ext, idx = line.rsplit("\t", 1)
                mapping[ext] = int(idx)
            return cls(to_index=mapping)


def _all_int(tokens) -> bool:
    for t in tokens:
        try:
            if int(t) < 0:
                return False
        except ValueError:
            return False
    return True


def read_edge_list(path: str) -> tuple[Graph, NodeMap]:
    """Parse a whitespace-separated `u v [w]` edge list; `#` lines ignored."""
    raw: list[tuple[str, str, float, int]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) not in (2, 3):
                raise GraphFormatError(f"{path}:{lineno}: expected 'u v [w]'")
            w = 1.0
            if len(parts) == 3:
                try:
                    w = float(parts[2])
                except ValueError:
                    raise GraphFormatError(
                        f"{path}:{lineno}: non-numeric weight {parts[2]!r}") from None
            if parts[0] == parts[1]:
                raise GraphFormatError(f"{path}:{lineno}: self-loop {parts[0]}")
            raw.append((parts[0], parts[1], w, lineno))
    if not raw:
        raise GraphFormatError(f"{path}: no edges")

    tokens = [t for u, v, _, _ in raw for t in (u, v)]
    if _all_int(tokens):
        ints = [int(t) for t in tokens]
        node_map = NodeMap(identity_n=max(ints) + 1)
        us = np.array(ints[0::2], dtype=np.int64)
        vs = np.array(ints[1::2], dtype=np.int64)
    else:
        mapping: dict[str, int] = {}
        for t in tokens:
            if t not in mapping:
                mapping[t] = len(mapping)
        node_map = NodeMap(to_index=mapping)
        us = np.array([mapping[u] for u, _, _, _ in raw], dtype=np.int64)
        vs = np.array([mapping[v] for _, v, _, _ in raw], dtype=np.int64)
    ws = np.array([w for _, _, w, _ in raw])
    try:
        graph = Graph.from_arrays(us, vs, ws)
    except GraphFormatError as exc:
        raise GraphFormatError(f"{path}: {exc}") from None
    return graph, node_map


def write_edge_list(path: str, g: Graph) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# u v w\n")
        for i in range(g.n):
            nbrs = g.neighbor_ids(i)
            ws = g.neighbor_base_weights(i)
            for j, w in zip(nbrs.tolist(), ws.tolist()):
                if i < j:
                    fh.write(f"{i} {j} {w!r}\n")


def read_attributes(path: str, node_map: NodeMap, n: int) -> AttributeMatrix:
    """Parse `node_id,x1,...,xd` CSV; a non-numeric first field marks a header."""
    rows: dict[int, list[float]] = {}
    d = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if lineno == 1:
                try:
                    float(parts[0])
                except ValueError:
                    continue  # header
            try:
                values = [float(t) for t in parts[1:]]
            except ValueError as exc:
                raise GraphFormatError(f"{path}:{lineno}: {exc}") from None
            if d is None:
                d = len(values)
            elif len(values) != d:
                raise GraphFormatError(
                    f"{path}:{lineno}: expected {d} attributes, got {len(values)}")
            rows[node_map.index(parts[0])] = values
    if d is None:
        raise GraphFormatError(f"{path}: no attribute rows")
    if len(rows) != n:
        raise GraphFormatError(
            f"{path}: {len(rows)} attribute rows for {n} nodes")
    mat = np.empty((n, d))
    for idx, values in rows.items():
        mat[idx] = values
    return AttributeMatrix(mat)


def write_attributes(path: str, X: AttributeMatrix) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        header = ",".join(["node_id"] + [f"x{j + 1}" for j in range(X.d)])
        fh.write(header + "\n")
        for i in range(X.n):
            fh.write(str(i) + "," + ",".join(repr(v) for v in X.rows[i].tolist()) + "\n")


def read_target(path: str, node_map: NodeMap) -> NodeSet:
    ids = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            ids.append(node_map.index(line))
    if not ids:
        raise GraphFormatError(f"{path}: no node ids")
    return NodeSet.of(ids)


def write_target(path: str, target: NodeSet) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for i in target:
            fh.write(f"{i}\n")


def write_params(path: str, params: ModelParams, extra: dict | None = None) -> None:
    payload = params.to_dict()
    if extra:
        payload.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_params(path: str) -> ModelParams:
    with open(path, encoding="utf-8") as fh:
        return ModelParams.from_dict(json.load(fh))


def write_instance(out_dir: str, inst: Instance) -> None:
    """Emit graph.txt, attrs.csv, target.txt and params.json."""
    os.makedirs(out_dir, exist_ok=True)
    write_edge_list(os.path.join(out_dir, "graph.txt"), inst.graph)
    write_attributes(os.path.join(out_dir, "attrs.csv"), inst.attrs)
    write_target(os.path.join(out_dir, "target.txt"), inst.target)
    write_params(os.path.join(out_dir, "params.json"), inst.params,
                 extra={"mu_hat": inst.mu_hat})


def read_instance(in_dir: str) -> Instance:
    graph, node_map = read_edge_list(os.path.join(in_dir, "graph.txt"))
    params = read_params(os.path.join(in_dir, "params.json"))
    n = params.n
    if graph.n < n:
        # isolated trailing nodes are absent from the edge list
        graph = Graph(n, np.concatenate([graph.indptr,
                                         np.full(n - graph.n, graph.indptr[-1])]),
                      graph.indices.copy(), graph.base_weights.copy(),
                      duplicates_dropped=graph.duplicates_dropped)
        node_map = NodeMap(identity_n=n)
    attrs = read_attributes(os.path.join(in_dir, "attrs.csv"), node_map, n)
    target = read_target(os.path.join(in_dir, "target.txt"), node_map)
    return Instance(graph=graph, attrs=attrs, target=target, params=params,
                    mu_hat=params.mu_hat)
