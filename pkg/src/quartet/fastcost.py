"""Fast O(n^3) tree-cost evaluation for distance-backed cost functions.

Decomposes C_T over internal nodes: at node p with incident edges e1,e2,e3
and subtree leaf counts n1,n2,n3, each edge contributes C(n_i,2) times the
summed distances between leaf pairs crossing the other two subtrees; the
node totals sum to the tree cost. This is the search's hot kernel.

Two interchangeable backends implement it: a compiled extension
(``quartet._kernel``) and a pure-Python mirror (``quartet._pure``). The
compiled one is selected at import when available; set QUARTET_PURE=1 to
force the fallback. Both produce bit-identical values (see _pure docstring),
so backend choice never changes search trajectories.
"""

from __future__ import annotations

import os

import numpy as np

from .trees import Tree

try:  # pragma: no cover - depends on build environment
    from . import _kernel
except ImportError:  # pragma: no cover
    _kernel = None

from . import _pure

if _kernel is not None and not os.environ.get("QUARTET_PURE"):
    _impl = _kernel
else:
    _impl = _pure

HAVE_KERNEL = _kernel is not None
BACKEND = _impl.BACKEND

__all__ = [
    "BACKEND",
    "HAVE_KERNEL",
    "cost_distance_from_adj",
    "subtree_leaf_counts",
    "tree_cost_fast",
]


def cost_distance_from_adj(adj: np.ndarray, n: int, d: np.ndarray) -> float:
    """Backend entry point on raw arrays (the search inner loop)."""
    return _impl.cost_distance(adj, n, d)


def tree_cost_fast(tree: Tree, dm) -> float:
    """C_T for the distance matrix ``dm``; equals the naive scorer up to
    float summation order (<= 1e-9 relative)."""
    d = dm.d if hasattr(dm, "d") else np.asarray(dm, dtype=np.float64)
    if d.shape[0] != tree.n:
        raise ValueError(
            f"tree has {tree.n} leaves but distance matrix is {d.shape[0]}x{d.shape[1]}"
        )
    return _impl.cost_distance(tree.adj_array, tree.n, d)


def subtree_leaf_counts(tree: Tree, p: int) -> tuple[int, int, int]:
    """Leaf counts of the three subtrees hanging off internal node ``p``,
    ordered by ascending neighbor id. They always partition the n leaves."""
    if tree.is_leaf(p):
        raise ValueError(f"node {p} is a leaf; subtree counts need an internal node")
    if not p < tree.node_count:
        raise ValueError(f"node {p} out of range")
    adj = tree.adj_array
    out = []
    for root in adj[p]:
        seen = {int(root), p}
        stack = [int(root)]
        cnt = 0
        while stack:
            v = stack.pop()
            if v < tree.n:
                cnt += 1
                continue
            for w in adj[v]:
                w = int(w)
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        out.append(cnt)
    return tuple(out)  # type: ignore[return-value]
