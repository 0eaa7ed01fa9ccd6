"""Hierarchical clustering by minimum quartet tree cost.

Builds unrooted ternary trees over n labeled items so that the summed cost
of the embedded quartet topologies is as low as possible, searching by
randomized hill climbing with an optional Metropolis walk. Costs come from
explicit per-topology assignments or from a distance matrix (including
compression-based distances), and a benchmark harness reproduces the
artificial-tree reconstruction and score-comparison experiments.
"""

__version__ = "0.1.0"

from .cost import (
    CostFunction,
    DistanceCostFunction,
    DistanceMatrix,
    ExplicitCostFunction,
    ScoreBounds,
    bounds,
    cost_from_mqc,
    cost_of,
    score,
    tree_cost_naive,
)
from .fastcost import BACKEND, HAVE_KERNEL, subtree_leaf_counts, tree_cost_fast
from .trees import (
    QuartetTopology,
    Tree,
    all_topologies,
    embedded_quartets,
    enumerate_all_trees,
    enumerate_quartets,
    is_consistent,
    random_tree,
    tree_from_newick,
    tree_to_dot,
    tree_to_newick,
    trees_equal,
)

__all__ = [
    "BACKEND",
    "CostFunction",
    "DistanceCostFunction",
    "DistanceMatrix",
    "ExplicitCostFunction",
    "HAVE_KERNEL",
    "QuartetTopology",
    "ScoreBounds",
    "Tree",
    "all_topologies",
    "bounds",
    "cost_from_mqc",
    "cost_of",
    "embedded_quartets",
    "enumerate_all_trees",
    "enumerate_quartets",
    "is_consistent",
    "random_tree",
    "score",
    "subtree_leaf_counts",
    "tree_cost_fast",
    "tree_cost_naive",
    "tree_from_newick",
    "tree_to_dot",
    "tree_to_newick",
    "trees_equal",
    "__version__",
]
