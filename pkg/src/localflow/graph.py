"""Immutable weighted undirected graph stored in compressed sparse row form.

Each undirected edge is stored twice, once per endpoint, with neighbor lists
sorted ascending so iteration order is deterministic. The canonical edge
orientation is (min(i,j), max(i,j)).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ConductanceUndefinedError, GraphFormatError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class NodeSet:
    """A sorted, duplicate-free set of node ids."""

    members: tuple[int, ...]

    @classmethod
    def of(cls, ids) -> "NodeSet":
        return cls(tuple(sorted(set(int(i) for i in ids))))

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, i) -> bool:
        return i in self._member_set()

    def _member_set(self):
        # cached via object dict trick is unavailable on frozen dataclass;
        # recompute lazily and stash with object.__setattr__
        s = self.__dict__.get("_set")
        if s is None:
            s = frozenset(self.members)
            object.__setattr__(self, "_set", s)
        return s

    def validate(self, n: int) -> None:
        if any(i < 0 or i >= n for i in self.members):
            raise GraphFormatError(f"node id out of range 0..{n - 1}")


class Graph:
    """Undirected weighted graph with O(deg) neighbor scans.

    Attributes:
        n: number of nodes (ids are dense 0..n-1).
        m: number of undirected edges.
        indptr, indices, base_weights: CSR adjacency; indices[indptr[i]:indptr[i+1]]
            are the sorted neighbors of i with parallel base weights.
        duplicates_dropped: count of duplicate input edges discarded (first kept).
    """

    def __init__(self, n: int, indptr: np.ndarray, indices: np.ndarray,
                 base_weights: np.ndarray, duplicates_dropped: int = 0):
        self.n = int(n)
        self.indptr = indptr
        self.indices = indices
        self.base_weights = base_weights
        self.m = len(indices) // 2
        self.duplicates_dropped = duplicates_dropped
        for a in (self.indptr, self.indices, self.base_weights):
            a.flags.writeable = False
        self._degrees = np.diff(self.indptr)
        self._degrees.flags.writeable = False

    # -- construction ------------------------------------------------------

    @classmethod
    def from_arrays(cls, u: np.ndarray, v: np.ndarray,
                    w: np.ndarray | None = None, n: int | None = None) -> "Graph":
        """Build from parallel endpoint arrays of undirected edges.

        Duplicate edges (same unordered pair) keep the first occurrence.
        Self loops are rejected.
        """
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        if w is None:
            w = np.ones(len(u), dtype=np.float64)
        else:
            w = np.asarray(w, dtype=np.float64)
        if len(u) != len(v) or len(u) != len(w):
            raise GraphFormatError("endpoint/weight arrays differ in length")
        if len(u) and (u.min() < 0 or v.min() < 0):
            raise GraphFormatError("node ids must be nonnegative")
        if np.any(u == v):
            bad = int(np.flatnonzero(u == v)[0])
            raise GraphFormatError(f"self-loop at edge entry {bad + 1}: ({u[bad]}, {v[bad]})")
        if np.any(w <= 0):
            bad = int(np.flatnonzero(w <= 0)[0])
            raise GraphFormatError(f"non-positive weight at edge entry {bad + 1}")
        if n is None:
            n = int(max(u.max(), v.max())) + 1 if len(u) else 0
        n = int(n)

        lo = np.minimum(u, v)
        hi = np.maximum(u, v)
        key = lo * n + hi
        _, first = np.unique(key, return_index=True)
        dups = len(u) - len(first)
        if dups:
            log.warning("dropped %d duplicate edge entries (first occurrence kept)", dups)
        first.sort()
        lo, hi, w = lo[first], hi[first], w[first]

        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        ww = np.concatenate([w, w])
        order = np.lexsort((dst, src))
        src, dst, ww = src[order], dst[order], ww[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        np.cumsum(indptr, out=indptr)
        return cls(n, indptr, dst, ww, duplicates_dropped=dups)

    @classmethod
    def from_edge_list(cls, entries, n: int | None = None) -> "Graph":
        """Build from an iterable of (u, v) or (u, v, w) tuples.

        Missing weights default to 1.0. Errors name the 1-based entry position.
        """
        us, vs, ws = [], [], []
        for pos, entry in enumerate(entries, start=1):
            if len(entry) not in (2, 3):
                raise GraphFormatError(f"entry {pos}: expected (u, v) or (u, v, w)")
            try:
                u = int(entry[0])
                v = int(entry[1])
                w = float(entry[2]) if len(entry) == 3 else 1.0
            except (TypeError, ValueError) as exc:
                raise GraphFormatError(f"entry {pos}: non-numeric token ({exc})") from None
            if u == v:
                raise GraphFormatError(f"entry {pos}: self-loop ({u}, {v}) not allowed")
            if u < 0 or v < 0:
                raise GraphFormatError(f"entry {pos}: negative node id")
            if w <= 0:
                raise GraphFormatError(f"entry {pos}: weight must be positive, got {w}")
            us.append(u)
            vs.append(v)
            ws.append(w)
        if not us:
            return cls.from_arrays(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64),
                                   np.empty(0), n=n or 0)
        return cls.from_arrays(np.array(us), np.array(vs), np.array(ws), n=n)

    # -- queries -----------------------------------------------------------

    def degree(self, i: int) -> int:
        return int(self._degrees[i])

    @property
    def degrees(self) -> np.ndarray:
        return self._degrees

    def neighbor_ids(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def neighbor_base_weights(self, i: int) -> np.ndarray:
        return self.base_weights[self.indptr[i]:self.indptr[i + 1]]

    def edge_slot(self, i: int, j: int) -> int:
        """Position of neighbor j inside i's CSR slice, or -1 if (i,j) is not an edge."""
        nbrs = self.neighbor_ids(i)
        k = int(np.searchsorted(nbrs, j))
        if k < len(nbrs) and nbrs[k] == j:
            return k
        return -1

    def has_edge(self, i: int, j: int) -> bool:
        return self.edge_slot(i, j) >= 0

    def _check_ids(self, C: NodeSet) -> None:
        C.validate(self.n)


def volume(g: Graph, C: NodeSet) -> int:
    """Sum of combinatorial degrees over C."""
    g._check_ids(C)
    if not len(C):
        return 0
    return int(g._degrees[np.fromiter(C, dtype=np.int64)].sum())


def cut_weight(g: Graph, w, C: NodeSet) -> float:
    """Total view weight of edges with exactly one endpoint in C, each counted once.

    `w` is an edge weight view exposing node_weights(i) aligned with neighbor_ids(i).
    """
    g._check_ids(C)
    inside = C._member_set()
    total = 0.0
    for i in C:
        nbrs = g.neighbor_ids(i)
        if not len(nbrs):
            continue
        wv = w.node_weights(i)
        outside_mask = np.fromiter((j not in inside for j in nbrs.tolist()),
                                   dtype=bool, count=len(nbrs))
        if outside_mask.any():
            total += float(wv[outside_mask].sum())
    return total


def weighted_volume(g: Graph, w, C: NodeSet) -> float:
    """Sum over i in C of total incident view weight (internal edges counted twice)."""
    g._check_ids(C)
    return float(sum(w.node_weight_sum(i) for i in C))


def weighted_conductance(g: Graph, w, C: NodeSet) -> float:
    """Boundary view weight of C divided by the weighted volume of C."""
    if not len(C):
        raise ConductanceUndefinedError("undefined conductance: empty set")
    denom = weighted_volume(g, w, C)
    if denom <= 0:
        raise ConductanceUndefinedError("undefined conductance: zero weighted volume")
    return cut_weight(g, w, C) / denom
