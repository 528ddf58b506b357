"""Push-based flow diffusion solver and its dense reference oracle.

The solver performs coordinate descent on the nonnegative quadratic dual of
the mass-spreading problem: each push removes a node's excess mass by raising
its potential and handing the excess to neighbors proportionally to edge
weights. State is kept in hash maps so untouched parts of the graph are never
materialized.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from .errors import LocalFlowError, PushPreconditionError, TrappedMassError
from .graph import Graph, NodeSet

EXCESS_FLOOR = 1e-10

UNIFORM = "uniform"
MAX_EXCESS = "max_excess"
ROUND_ROBIN = "round_robin"


@dataclass
class SourceSink:
    """Sparse source mass and sink capacities.

    sink is "unit" (T_i = 1), "degree" (T_i = deg(i)), or an explicit vector
    with every entry >= 1.
    """

    delta: dict[int, float]
    sink: str | np.ndarray = "unit"

    def __post_init__(self):
        self.delta = {int(i): float(v) for i, v in self.delta.items() if v != 0.0}
        if any(v < 0 for v in self.delta.values()):
            raise LocalFlowError("source mass must be nonnegative")
        if not self.delta:
            raise LocalFlowError("total source mass must be positive")
        if isinstance(self.sink, str):
            if self.sink not in ("unit", "degree"):
                raise LocalFlowError(f"unknown sink mode {self.sink!r}")
        else:
            self.sink = np.asarray(self.sink, dtype=np.float64)
            if np.any(self.sink < 1.0):
                raise LocalFlowError("explicit sink capacities must be >= 1")

    @property
    def total_mass(self) -> float:
        return float(sum(self.delta.values()))

    def validate(self, g: Graph) -> None:
        if any(i < 0 or i >= g.n for i in self.delta):
            raise LocalFlowError("source node id out of range")
        if not isinstance(self.sink, str) and len(self.sink) != g.n:
            raise LocalFlowError("explicit sink vector length does not match node count")

    def capacity_fn(self, g: Graph):
        if isinstance(self.sink, str):
            if self.sink == "unit":
                return lambda i: 1.0
            degs = g.degrees
            return lambda i: float(degs[i])
        T = self.sink
        return lambda i: float(T[i])

    def capacities(self, g: Graph) -> np.ndarray:
        if isinstance(self.sink, str):
            if self.sink == "unit":
                return np.ones(g.n)
            return g.degrees.astype(np.float64)
        return np.asarray(self.sink, dtype=np.float64)

    def delta_vector(self, g: Graph) -> np.ndarray:
        d = np.zeros(g.n)
        for i, v in self.delta.items():
            d[i] = v
        return d


@dataclass
class DiffusionConfig:
    max_pushes: int | None = None      # default: 50 * ||delta||_1
    tolerance: float | None = None     # default: dynamic 1e-6*||delta||_1/touched
    rng_seed: int = 0
    selection: str = UNIFORM

    def __post_init__(self):
        if self.tolerance is not None and self.tolerance < 0:
            raise LocalFlowError("tolerance must be nonnegative")
        if self.max_pushes is not None and self.max_pushes < 1:
            raise LocalFlowError("max_pushes must be at least 1")
        if self.selection not in (UNIFORM, MAX_EXCESS, ROUND_ROBIN):
            raise LocalFlowError(f"unknown selection strategy {self.selection!r}")


@dataclass
class DiffusionState:
    """Sparse solver state: potentials x, masses m, and bookkeeping."""

    x: dict[int, float] = field(default_factory=dict)
    m: dict[int, float] = field(default_factory=dict)
    push_count: int = 0
    converged: bool = False
    stop_reason: str = "init"

    @property
    def touched(self) -> set[int]:
        """Nodes whose mass or potential was ever modified."""
        return set(self.m) | set(self.x)

    @property
    def nodes_touched(self) -> int:
        return len(self.m.keys() | self.x.keys())


def push(state: DiffusionState, i: int, g: Graph, w, st: SourceSink) -> np.ndarray:
    """Remove node i's excess mass, spreading it to neighbors by view weight.

    Returns the neighbor id array so callers can refresh their active sets.
    """
    Ti = st.capacity_fn(g)(i)
    mi = state.m.get(i, 0.0)
    excess = mi - Ti
    if excess <= 0:
        raise PushPreconditionError(f"push on node {i} without excess (m={mi}, T={Ti})")
    nbrs = g.neighbor_ids(i)
    if len(nbrs) == 0:
        raise TrappedMassError(f"mass trapped at isolated node {i}")
    wv = w.node_weights(i)
    wi = w.node_weight_sum(i)
    if wi <= 0.0:
        raise TrappedMassError(f"mass trapped at node {i}: incident weights underflowed to zero")
    state.x[i] = state.x.get(i, 0.0) + excess / wi
    state.m[i] = Ti
    m = state.m
    for j, share in zip(nbrs.tolist(), ((excess / wi) * wv).tolist()):
        m[j] = m.get(j, 0.0) + share
    state.push_count += 1
    return nbrs


def run(g: Graph, w, st: SourceSink, cfg: DiffusionConfig | None = None) -> DiffusionState:
    """Run pushes until no node's mass exceeds its capacity by more than the
    excess tolerance, or until the push budget is exhausted."""
    cfg = cfg or DiffusionConfig()
    st.validate(g)
    l1 = st.total_mass
    max_pushes = cfg.max_pushes if cfg.max_pushes is not None else max(1, int(50 * l1))
    tol_scale = 1e-6 * l1
    cap = st.capacity_fn(g)

    state = DiffusionState(m=dict(st.delta))
    m = state.m

    def eps_now() -> float:
        if cfg.tolerance is not None:
            return cfg.tolerance
        return max(tol_scale / len(m), EXCESS_FLOOR)

    floor = cfg.tolerance if cfg.tolerance is not None else EXCESS_FLOOR

    rng = random.Random(cfg.rng_seed)
    active = sorted(i for i in m if m[i] > cap(i) + floor)
    in_active = set(active)
    rr = 0

    while state.push_count < max_pushes:
        if not active:
            # the dynamic tolerance shrinks as the touched set grows; rescan
            # so no node is left above the final threshold
            eps = eps_now()
            stragglers = sorted(i for i in m if m[i] > cap(i) + eps)
            if not stragglers:
                break
            active = stragglers
            in_active = set(active)
            rr = 0
        if cfg.selection == UNIFORM:
            idx = rng.randrange(len(active))
        elif cfg.selection == MAX_EXCESS:
            idx = max(range(len(active)), key=lambda k: m[active[k]] - cap(active[k]))
        else:  # round robin
            if rr >= len(active):
                rr = 0
            idx = rr
        i = active[idx]
        if m[i] - cap(i) <= eps_now():
            last = active.pop()
            in_active.discard(i)
            if idx < len(active):
                active[idx] = last
            if cfg.selection == ROUND_ROBIN and idx < rr:
                rr -= 1
            continue
        nbrs = push(state, i, g, w, st)
        last = active.pop()
        in_active.discard(i)
        if idx < len(active):
            active[idx] = last
        for j in nbrs.tolist():
            if j not in in_active and m[j] > cap(j) + floor:
                in_active.add(j)
                active.append(j)
        if cfg.selection == ROUND_ROBIN:
            rr = idx if idx < len(active) else 0

    eps = eps_now()
    remaining = [i for i in m if m[i] - cap(i) > eps]
    state.converged = not remaining
    state.stop_reason = "converged" if state.converged else "max_pushes"
    return state


def support(state: DiffusionState) -> NodeSet:
    """Nodes with positive potential, sorted."""
    return NodeSet.of(i for i, v in state.x.items() if v > 0)


def excess_nodes(state: DiffusionState, st: SourceSink, g: Graph, tol: float) -> NodeSet:
    """Nodes whose mass still exceeds capacity by more than tol, sorted."""
    cap = st.capacity_fn(g)
    return NodeSet.of(i for i, v in state.m.items() if v - cap(i) > tol)


def dual_objective(g: Graph, w, x, st: SourceSink) -> float:
    """1/2 sum_{(i,j) in E} w'_ij (x_i - x_j)^2 + sum_i x_i (T_i - Delta_i).

    x may be a sparse mapping or a dense vector; each undirected edge is
    summed once.
    """
    if isinstance(x, dict):
        if any(v < 0 for v in x.values()):
            raise LocalFlowError("dual variable must be nonnegative")
        xs = {i: float(v) for i, v in x.items() if v != 0.0}
    else:
        xv = np.asarray(x, dtype=np.float64)
        if np.any(xv < 0):
            raise LocalFlowError("dual variable must be nonnegative")
        xs = {i: float(v) for i, v in enumerate(xv) if v != 0.0}
    cap = st.capacity_fn(g)
    quad = 0.0
    for i, xi in xs.items():
        nbrs = g.neighbor_ids(i)
        if not len(nbrs):
            continue
        wv = w.node_weights(i)
        for k, j in enumerate(nbrs.tolist()):
            xj = xs.get(j, 0.0)
            if xj == 0.0 or j > i:
                quad += float(wv[k]) * (xi - xj) ** 2
    linear = sum(xi * (cap(i) - st.delta.get(i, 0.0)) for i, xi in xs.items())
    return 0.5 * quad + linear


def solve_dual_reference(g: Graph, w, st: SourceSink, tol: float,
                         max_iters: int = 2_000_000) -> np.ndarray:
    """Dense projected-gradient reference solver for the dual problem.

    Independent of the push solver; guarded to small graphs. Iterates
    x <- max(x - step * (Lx + T - Delta), 0) with step 1/(2 max_i w_i) until
    the projected gradient norm drops to tol.
    """
    if g.n > 2000:
        raise LocalFlowError("reference solver is guarded to n <= 2000")
    st.validate(g)
    n = g.n
    L = np.zeros((n, n))
    for i in range(n):
        nbrs = g.neighbor_ids(i)
        if not len(nbrs):
            continue
        wv = w.node_weights(i)
        L[i, nbrs] = -wv
        L[i, i] = wv.sum()
    wmax = max((w.node_weight_sum(i) for i in range(n) if g.degree(i)), default=0.0)
    if wmax <= 0:
        raise TrappedMassError("mass trapped at isolated node")
    step = 1.0 / (2.0 * wmax)
    c = st.capacities(g) - st.delta_vector(g)

    x = np.zeros(n)
    check_every = 50
    for it in range(max_iters):
        grad = L @ x + c
        if it % check_every == 0:
            pg = np.where(x > 0, grad, np.minimum(grad, 0.0))
            if float(np.linalg.norm(pg)) <= tol:
                return x
        x = np.maximum(x - step * grad, 0.0)
    grad = L @ x + c
    pg = np.where(x > 0, grad, np.minimum(grad, 0.0))
    norm = float(np.linalg.norm(pg))
    if norm <= tol:
        return x
    raise LocalFlowError(f"reference solver iteration budget exhausted "
                         f"(projected gradient norm {norm:.3e} > {tol:.3e})")
