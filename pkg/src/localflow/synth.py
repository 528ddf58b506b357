"""Planted-cluster random instances with node attributes, plus calculators
for the theoretical quantities that govern recovery."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .attributes import AttributeMatrix
from .errors import LocalFlowError
from .graph import Graph, NodeSet

GAUSSIAN = "gaussian"
RADEMACHER = "rademacher"
UNIFORM = "uniform"

SBM = "sbm"
ERDOS_RENYI = "er"


@dataclass
class ModelParams:
    """Configuration of the planted-cluster model.

    The target cluster K holds nodes 0..k-1 with intra-edge probability p and
    boundary probability q. The rest of the graph is wired either as an SBM
    of k-sized blocks (intra probability p_out, inter probability q) or as an
    Erdos-Renyi graph with probability q. Attributes are X_i = mu_i + Z_i
    with mu at +/- a*sigma_hat*sqrt(log n)/(2 sqrt(d)) per coordinate inside
    and outside K, and coordinate-wise noise scaled to sigma_l.
    """

    n: int
    k: int
    p: float
    q: float
    d: int = 1
    a: float = 0.0
    sigma: float | np.ndarray = 1.0
    noise: str = GAUSSIAN
    outside_model: str = SBM
    p_out: float | None = None
    seed: int = 0

    def __post_init__(self):
        if not (1 < self.k < self.n):
            raise LocalFlowError("need 1 < k < n")
        if self.d < 1:
            raise LocalFlowError("attribute dimension must be >= 1")
        for name in ("p", "q"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise LocalFlowError(f"{name} must be in [0, 1], got {v}")
        if self.p_out is None:
            self.p_out = self.p
        if not (0.0 <= self.p_out <= 1.0):
            raise LocalFlowError("p_out must be in [0, 1]")
        if self.a < 0:
            raise LocalFlowError("signal multiplier a must be nonnegative")
        if self.noise not in (GAUSSIAN, RADEMACHER, UNIFORM):
            raise LocalFlowError(f"unknown noise family {self.noise!r}")
        if self.outside_model not in (SBM, ERDOS_RENYI):
            raise LocalFlowError(f"unknown outside model {self.outside_model!r}")
        self.sigma = np.broadcast_to(np.asarray(self.sigma, dtype=np.float64),
                                     (self.d,)).copy()
        if np.any(self.sigma <= 0):
            raise LocalFlowError("all noise scales must be positive")

    @property
    def sigma_hat(self) -> float:
        return float(self.sigma.max())

    @property
    def mu_hat(self) -> float:
        return self.a * self.sigma_hat * math.sqrt(math.log(self.n))

    def to_dict(self) -> dict:
        return {
            "n": self.n, "k": self.k, "p": self.p, "q": self.q, "d": self.d,
            "a": self.a, "sigma": self.sigma.tolist(), "noise": self.noise,
            "outside_model": self.outside_model, "p_out": self.p_out,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelParams":
        sigma = data.get("sigma", 1.0)
        if isinstance(sigma, list):
            sigma = np.asarray(sigma)
        return cls(n=data["n"], k=data["k"], p=data["p"], q=data["q"],
                   d=data.get("d", 1), a=data.get("a", 0.0), sigma=sigma,
                   noise=data.get("noise", GAUSSIAN),
                   outside_model=data.get("outside_model", SBM),
                   p_out=data.get("p_out"), seed=data.get("seed", 0))


@dataclass
class Instance:
    graph: Graph
    attrs: AttributeMatrix
    target: NodeSet
    params: ModelParams
    mu_hat: float = field(default=0.0)


def _block_ranges(params: ModelParams) -> list[tuple[int, int]]:
    if params.outside_model == ERDOS_RENYI:
        return [(0, params.k), (params.k, params.n)]
    ranges = [(0, params.k)]
    start = params.k
    while start < params.n:
        end = min(start + params.k, params.n)
        ranges.append((start, end))
        start = end
    return ranges


def _sample_intra(rng, lo: int, hi: int, prob: float, us: list, vs: list,
                  chunk: int = 512) -> None:
    """Bernoulli-sample the upper triangle of the index range [lo, hi)."""
    if prob <= 0 or hi - lo < 2:
        return
    ids = np.arange(lo, hi)
    for row0 in range(0, len(ids), chunk):
        rows = ids[row0:row0 + chunk]
        draws = rng.random((len(rows), len(ids)))
        mask = draws < prob
        mask &= ids[None, :] > rows[:, None]
        r, c = np.nonzero(mask)
        us.append(rows[r])
        vs.append(ids[c])


def _sample_cross(rng, alo: int, ahi: int, blo: int, bhi: int, prob: float,
                  us: list, vs: list, chunk: int = 512) -> None:
    """Bernoulli-sample the rectangle [alo, ahi) x [blo, bhi)."""
    if prob <= 0:
        return
    cols = np.arange(blo, bhi)
    for row0 in range(alo, ahi, chunk):
        rows = np.arange(row0, min(row0 + chunk, ahi))
        mask = rng.random((len(rows), len(cols))) < prob
        r, c = np.nonzero(mask)
        us.append(rows[r])
        vs.append(cols[c])


def generate(params: ModelParams) -> Instance:
    """Sample a (graph, attributes, target) instance; deterministic per seed."""
    ss = np.random.SeedSequence(params.seed)
    graph_ss, noise_ss = ss.spawn(2)
    rng = np.random.default_rng(graph_ss)

    ranges = _block_ranges(params)
    us: list[np.ndarray] = []
    vs: list[np.ndarray] = []
    for bi, (lo, hi) in enumerate(ranges):
        if bi == 0:
            prob = params.p
        elif params.outside_model == ERDOS_RENYI:
            prob = params.q
        else:
            prob = params.p_out
        _sample_intra(rng, lo, hi, prob, us, vs)
    for ai in range(len(ranges)):
        for bi in range(ai + 1, len(ranges)):
            _sample_cross(rng, *ranges[ai], *ranges[bi], params.q, us, vs)
    if us:
        u = np.concatenate(us)
        v = np.concatenate(vs)
    else:
        u = np.empty(0, dtype=np.int64)
        v = np.empty(0, dtype=np.int64)
    graph = Graph.from_arrays(u, v, n=params.n)

    mu_coord = params.a * params.sigma_hat * math.sqrt(math.log(params.n)) \
        / (2.0 * math.sqrt(params.d))
    mu = np.full((params.n, params.d), -mu_coord)
    mu[:params.k, :] = mu_coord

    nrng = np.random.default_rng(noise_ss)
    shape = (params.n, params.d)
    if params.noise == GAUSSIAN:
        Z = nrng.standard_normal(shape) * params.sigma
    elif params.noise == RADEMACHER:
        Z = (nrng.integers(0, 2, size=shape) * 2 - 1).astype(np.float64) * params.sigma
    else:
        half = params.sigma * math.sqrt(3.0)
        Z = nrng.uniform(-1.0, 1.0, size=shape) * half

    attrs = AttributeMatrix(mu + Z)
    target = NodeSet.of(range(params.k))
    return Instance(graph=graph, attrs=attrs, target=target, params=params,
                    mu_hat=params.mu_hat)


@dataclass
class TheoryBounds:
    """Inputs to the closed-form recovery quantities."""

    p: float
    q: float
    k: int
    n: int
    gamma: float
    mu_hat: float

    def __post_init__(self):
        if not (0 < self.k < self.n):
            raise LocalFlowError("need 0 < k < n")
        if self.p <= 0 or self.q < 0 or self.gamma < 0 or self.mu_hat < 0:
            raise LocalFlowError("bounds parameters must be nonnegative (p positive)")


def eta(b: TheoryBounds, c: float) -> float:
    """Effective signal ratio p(k-1) / (p(k-1) + q(n-k) e^{-c*gamma*mu_hat^2})."""
    if not (0.0 <= c <= 1.0):
        raise LocalFlowError("c must lie in [0, 1]")
    intra = b.p * (b.k - 1)
    cross = b.q * (b.n - b.k) * math.exp(-c * b.gamma * b.mu_hat ** 2)
    return intra / (intra + cross)


def m_factor(b: TheoryBounds, delta1: float, delta2: float) -> float:
    """(1 + 3 delta1 + 1/(p(k-1)))^2 / ((1 - delta1)(1 - delta2))."""
    if not (0 < delta1 <= 1) or not (0 < delta2 <= 1):
        raise LocalFlowError("delta1, delta2 must lie in (0, 1]")
    if delta1 == 1 or delta2 == 1:
        raise LocalFlowError("delta of exactly 1 makes the factor infinite")
    pk = b.p * (b.k - 1)
    return (1.0 + 3.0 * delta1 + 1.0 / pk) ** 2 / ((1.0 - delta1) * (1.0 - delta2))


def theorem2_source_mass(b: TheoryBounds, c1: float, c2: float,
                         delta1: float, delta2: float, t_max: float) -> float:
    """Source mass c1 * T_max * m(delta1, delta2) * k / eta(c2)^2."""
    if c1 <= 1:
        raise LocalFlowError("c1 must exceed 1")
    if c2 >= 1:
        raise LocalFlowError("c2 must be below 1")
    e = eta(b, c2)
    if e <= 0:
        raise LocalFlowError("eta(c2) vanished; source mass undefined")
    return c1 * t_max * m_factor(b, delta1, delta2) * b.k / e ** 2


def edge_weight_separation(inst: Instance, gamma: float) -> tuple[float | None, float | None]:
    """Empirical kernel-weight separation across the planted boundary.

    Returns (min intra-K view weight, max K-to-outside view weight) over the
    edges that exist in the instance; a side with no edges reports None.
    """
    g = inst.graph
    X = inst.attrs
    k = len(inst.target)
    min_intra: float | None = None
    max_cross: float | None = None
    for i in inst.target:
        nbrs = g.neighbor_ids(i)
        if not len(nbrs):
            continue
        base = g.neighbor_base_weights(i)
        diffs = X.rows[nbrs] - X.rows[i]
        weights = base * np.exp(-gamma * (diffs * diffs).sum(axis=1))
        intra_mask = nbrs < k
        if intra_mask.any():
            lo = float(weights[intra_mask].min())
            min_intra = lo if min_intra is None else min(min_intra, lo)
        if (~intra_mask).any():
            hi = float(weights[~intra_mask].max())
            max_cross = hi if max_cross is None else max(max_cross, hi)
    return min_intra, max_cross
