"""Cost functions over quartet topologies and the normalized tree score.

A cost function assigns a real cost to each of the 3*C(n,4) topologies,
either explicitly (flat array indexed by quartet colex rank and topology
index) or derived from a distance matrix as d(u,v) + d(w,x). A tree's cost
C_T sums the costs of its embedded topologies; with the per-quartet minimum
and maximum sums m and M the normalized benefit score is
S(T) = (M - C_T) / (M - m), mapping the worst tree to 0 and a perfect tree
to 1.

Score exactness: S(T) is reported as exactly 1.0 iff every quartet of T is
embedded at its per-quartet minimal cost. That certificate compares floats
computed identically on both sides, so it is immune to the summation-order
noise that makes ``C_T == m`` unreliable; conversely a non-certified tree is
never reported as 1.0 even when rounding pushes the quotient to 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np

from . import fastcost
from .trees import (
    QuartetTopology,
    Tree,
    embedded_topology_indices,
    enumerate_quartets,
    hop_distances,
    quartet_index_arrays,
    topology_from_index,
)

__all__ = [
    "CostFunction",
    "DistanceCostFunction",
    "DistanceMatrix",
    "ExplicitCostFunction",
    "IncompleteCostFunctionError",
    "ScoreBounds",
    "bounds",
    "cost_from_mqc",
    "cost_of",
    "is_min_perfect",
    "quartet_rank",
    "score",
    "score_from_cost",
    "tree_cost_naive",
]

_BLOCK = 1 << 20  # fixed quartet block size keeps large-n reductions deterministic

ONE_BELOW_ONE = float(np.nextafter(1.0, 0.0))


class IncompleteCostFunctionError(ValueError):
    """An explicit cost mapping does not cover every topology."""


def quartet_rank(a: int, b: int, c: int, d: int) -> int:
    """Colex rank of the sorted quartet a<b<c<d among all 4-subsets."""
    a, b, c, d = sorted((a, b, c, d))
    return a + math.comb(b, 2) + math.comb(c, 3) + math.comb(d, 4)


def _iter_quartet_blocks(n: int) -> Iterator[tuple[np.ndarray, ...]]:
    q = math.comb(n, 4)
    if q <= _BLOCK or n <= 64:
        yield quartet_index_arrays(n)
        return
    buf = np.empty((4, _BLOCK), dtype=np.int32)
    fill = 0
    for quartet in enumerate_quartets(n):
        buf[:, fill] = quartet
        fill += 1
        if fill == _BLOCK:
            yield tuple(buf[k, :fill].copy() for k in range(4))
            fill = 0
    if fill:
        yield tuple(buf[k, :fill].copy() for k in range(4))


# ---------------------------------------------------------------------- #
# Distance matrices
# ---------------------------------------------------------------------- #


class DistanceMatrix:
    """Symmetric nonnegative matrix with zero diagonal, plus optional names."""

    __slots__ = ("n", "d", "names")

    def __init__(self, d: np.ndarray, names: Iterable[str] | None = None):
        d = np.asarray(d, dtype=np.float64).copy()
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError(f"distance matrix must be square, got shape {d.shape}")
        n = d.shape[0]
        if not np.all(np.isfinite(d)):
            raise ValueError("distance matrix contains non-finite values")
        if np.any(d < 0):
            i, j = np.argwhere(d < 0)[0]
            raise ValueError(f"negative distance d[{i},{j}] = {d[i, j]}")
        if np.any(np.diag(d) != 0):
            i = int(np.argwhere(np.diag(d) != 0)[0][0])
            raise ValueError(f"nonzero diagonal entry d[{i},{i}] = {d[i, i]}")
        mism = np.argwhere(d != d.T)
        if mism.size:
            i, j = (int(x) for x in mism[0])
            raise ValueError(
                f"matrix is not symmetric: d[{i},{j}]={d[i, j]:.17g} != d[{j},{i}]={d[j, i]:.17g}"
            )
        self.n = n
        self.d = d
        d.setflags(write=False)
        if names is not None:
            names = [str(x) for x in names]
            if len(names) != n:
                raise ValueError(f"{len(names)} names for {n} items")
            if len(set(names)) != n:
                raise ValueError("item names must be unique")
        self.names = list(names) if names is not None else None

    def __repr__(self) -> str:
        return f"DistanceMatrix(n={self.n})"


# ---------------------------------------------------------------------- #
# Cost functions
# ---------------------------------------------------------------------- #


class CostFunction:
    """Total assignment of finite costs to all 3*C(n,4) topologies."""

    n: int

    def cost_of(self, topo: QuartetTopology) -> float:
        raise NotImplementedError

    @property
    def distance_backed(self) -> bool:
        raise NotImplementedError

    def _check_labels(self, topo: QuartetTopology) -> None:
        if topo.labels[-1] >= self.n:
            raise ValueError(
                f"topology {topo} uses label {topo.labels[-1]} outside 0..{self.n - 1}"
            )


class ExplicitCostFunction(CostFunction):
    """Costs in a flat (C(n,4), 3) array; row = quartet colex rank."""

    __slots__ = ("n", "costs")

    def __init__(self, n: int, costs: np.ndarray):
        if n < 4:
            raise ValueError(f"need at least 4 items, got n={n}")
        costs = np.asarray(costs, dtype=np.float64).copy()
        q = math.comb(n, 4)
        if costs.shape != (q, 3):
            raise ValueError(f"cost array has shape {costs.shape}, expected ({q}, 3)")
        if not np.all(np.isfinite(costs)):
            raise IncompleteCostFunctionError("cost array contains non-finite entries")
        self.n = n
        self.costs = costs
        costs.setflags(write=False)

    @classmethod
    def from_mapping(
        cls, n: int, mapping: Mapping[QuartetTopology, float]
    ) -> "ExplicitCostFunction":
        q = math.comb(n, 4)
        costs = np.full((q, 3), np.nan)
        for topo, value in mapping.items():
            a, b, c, d = topo.labels
            if d >= n:
                raise ValueError(f"topology {topo} uses label {d} outside 0..{n - 1}")
            costs[quartet_rank(a, b, c, d), topo.topo_index] = float(value)
        holes = np.argwhere(np.isnan(costs))
        if holes.size:
            rank, idx = (int(x) for x in holes[0])
            quartet = _unrank_quartet(n, rank)
            raise IncompleteCostFunctionError(
                f"no cost assigned to topology {topology_from_index(quartet, idx)} "
                f"({holes.shape[0]} topologies missing in total)"
            )
        return cls(n, costs)

    @property
    def distance_backed(self) -> bool:
        return False

    def cost_of(self, topo: QuartetTopology) -> float:
        self._check_labels(topo)
        return float(self.costs[quartet_rank(*topo.labels), topo.topo_index])


class DistanceCostFunction(CostFunction):
    """Costs derived from a distance matrix: C(uv|wx) = d(u,v) + d(w,x)."""

    __slots__ = ("n", "dm")

    def __init__(self, dm: DistanceMatrix):
        if dm.n < 4:
            raise ValueError(f"need at least 4 items, got n={dm.n}")
        self.n = dm.n
        self.dm = dm

    @property
    def distance_backed(self) -> bool:
        return True

    def cost_of(self, topo: QuartetTopology) -> float:
        self._check_labels(topo)
        d = self.dm.d
        (u, v), (w, x) = topo.pair_a, topo.pair_b
        return float(d[u, v] + d[w, x])


def cost_of(cf: CostFunction, topo: QuartetTopology) -> float:
    return cf.cost_of(topo)


def cost_from_mqc(n: int, p_set: Iterable[QuartetTopology]) -> ExplicitCostFunction:
    """Cost function encoding a quartet-consistency instance: topologies in
    ``p_set`` cost 0, all others cost 1, so minimizing tree cost maximizes
    the number of embedded topologies from ``p_set``."""
    q = math.comb(n, 4)
    costs = np.ones((q, 3))
    for topo in p_set:
        a, b, c, d = topo.labels
        if d >= n:
            raise ValueError(f"topology {topo} uses label {d} outside 0..{n - 1}")
        costs[quartet_rank(a, b, c, d), topo.topo_index] = 0.0
    return ExplicitCostFunction(n, costs)


def _unrank_quartet(n: int, rank: int) -> tuple[int, int, int, int]:
    for quartet_rank_, quartet in enumerate(enumerate_quartets(n)):
        if quartet_rank_ == rank:
            return quartet
    raise ValueError(f"rank {rank} out of range")


# ---------------------------------------------------------------------- #
# Tree cost, bounds, score
# ---------------------------------------------------------------------- #


@dataclass(frozen=True)
class ScoreBounds:
    """Per-quartet minimal (m) and maximal (M) summed topology costs."""

    m: float
    M: float

    def __post_init__(self):
        if not (self.m <= self.M):
            raise ValueError(f"bounds require m <= M, got m={self.m}, M={self.M}")


def tree_cost_naive(tree_or_adj, cf: CostFunction, n: int | None = None) -> float:
    """C_T summed over the tree's embedded topologies in quartet rank order.

    The reference scorer: works for any cost function and is the oracle the
    decomposition scorer is checked against.
    """
    adj, n = _adj_of(tree_or_adj, n)
    if n != cf.n:
        raise ValueError(f"tree has {n} leaves but cost function covers {cf.n}")
    if isinstance(cf, ExplicitCostFunction):
        idx = embedded_topology_indices(adj, n)
        return float(cf.costs[np.arange(len(idx)), idx].sum())
    d = cf.dm.d
    L = hop_distances(adj, n)
    total = 0.0
    for a, b, c, d4 in _iter_quartet_blocks(n):
        s0 = L[a, b] + L[c, d4]
        s1 = L[a, c] + L[b, d4]
        s2 = L[a, d4] + L[b, c]
        c0 = d[a, b] + d[c, d4]
        c1 = d[a, c] + d[b, d4]
        c2 = d[a, d4] + d[b, c]
        picked = np.where(
            s0 < s1, np.where(s0 < s2, c0, c2), np.where(s1 < s2, c1, c2)
        )
        total += float(picked.sum())
    return total


def bounds(cf: CostFunction) -> ScoreBounds:
    """Summed per-quartet minima and maxima of the three topology costs."""
    if isinstance(cf, ExplicitCostFunction):
        return ScoreBounds(float(cf.costs.min(axis=1).sum()), float(cf.costs.max(axis=1).sum()))
    d = cf.dm.d
    lo = 0.0
    hi = 0.0
    for a, b, c, d4 in _iter_quartet_blocks(cf.n):
        c0 = d[a, b] + d[c, d4]
        c1 = d[a, c] + d[b, d4]
        c2 = d[a, d4] + d[b, c]
        lo += float(np.minimum(np.minimum(c0, c1), c2).sum())
        hi += float(np.maximum(np.maximum(c0, c1), c2).sum())
    return ScoreBounds(lo, hi)


def is_min_perfect(tree_or_adj, cf: CostFunction, n: int | None = None) -> bool:
    """Exact certificate that every quartet is embedded at its minimal cost
    (equivalently C_T = m, hence S(T) = 1)."""
    adj, n = _adj_of(tree_or_adj, n)
    if n != cf.n:
        raise ValueError(f"tree has {n} leaves but cost function covers {cf.n}")
    if isinstance(cf, ExplicitCostFunction):
        idx = embedded_topology_indices(adj, n)
        picked = cf.costs[np.arange(len(idx)), idx]
        return bool(np.all(picked == cf.costs.min(axis=1)))
    d = cf.dm.d
    L = hop_distances(adj, n)
    for a, b, c, d4 in _iter_quartet_blocks(n):
        s0 = L[a, b] + L[c, d4]
        s1 = L[a, c] + L[b, d4]
        s2 = L[a, d4] + L[b, c]
        c0 = d[a, b] + d[c, d4]
        c1 = d[a, c] + d[b, d4]
        c2 = d[a, d4] + d[b, c]
        picked = np.where(
            s0 < s1, np.where(s0 < s2, c0, c2), np.where(s1 < s2, c1, c2)
        )
        if not np.all(picked == np.minimum(np.minimum(c0, c1), c2)):
            return False
    return True


def score_from_cost(cost: float, b: ScoreBounds, perfect: bool) -> float:
    """Normalized benefit score from a precomputed tree cost.

    Degenerate bounds (M = m) score every tree 1. Otherwise the quotient is
    clipped into [0, 1), with the exactness certificate alone granting 1.0.
    """
    if b.M == b.m:
        return 1.0
    if perfect:
        return 1.0
    s = (b.M - cost) / (b.M - b.m)
    if s >= 1.0:
        return ONE_BELOW_ONE
    return max(s, 0.0)


def score(tree: Tree, cf: CostFunction) -> float:
    """S(T) in [0, 1]; exactly 1.0 iff the tree is certified optimal."""
    b = bounds(cf)
    if isinstance(cf, DistanceCostFunction):
        cost = fastcost.tree_cost_fast(tree, cf.dm)
    else:
        cost = tree_cost_naive(tree, cf)
    return score_from_cost(cost, b, is_min_perfect(tree, cf))


def _adj_of(tree_or_adj, n: int | None) -> tuple[np.ndarray, int]:
    if isinstance(tree_or_adj, Tree):
        return tree_or_adj.adj_array, tree_or_adj.n
    if n is None:
        n = (tree_or_adj.shape[0] + 2) // 2
    return tree_or_adj, n
