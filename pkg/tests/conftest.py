import numpy as np
import pytest

from quartet.cost import DistanceMatrix, ExplicitCostFunction
from quartet.trees import QuartetTopology, Tree, all_topologies


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def random_symmetric_matrix(n: int, rng: np.random.Generator) -> DistanceMatrix:
    d = rng.random((n, n))
    d = (d + d.T) / 2.0
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(d)


def adversarial_five_costs(eps: float) -> ExplicitCostFunction:
    """The 5-item instance whose optimum stays strictly below score 1.

    Labels u,v,w,x,y = 0,1,2,3,4. One topology of the {u,v,w,x} quartet
    costs 1-eps, its siblings cost 0, the four y-topologies compatible with
    the target tree cost 0, everything else costs 1. Bounds: m=0, M=5-eps;
    the best tree reaches S = 4/(5-eps).
    """
    mapping = {topo: 1.0 for topo in all_topologies(5)}
    mapping[QuartetTopology((0, 1), (2, 3))] = 1.0 - eps  # uv|wx
    mapping[QuartetTopology((0, 2), (3, 1))] = 0.0  # uw|xv
    mapping[QuartetTopology((0, 3), (1, 2))] = 0.0  # ux|vw
    mapping[QuartetTopology((3, 4), (0, 1))] = 0.0  # xy|uv
    mapping[QuartetTopology((2, 4), (0, 1))] = 0.0  # wy|uv
    mapping[QuartetTopology((0, 4), (2, 3))] = 0.0  # uy|wx
    mapping[QuartetTopology((1, 4), (2, 3))] = 0.0  # vy|wx
    return ExplicitCostFunction.from_mapping(5, mapping)


def five_leaf_target() -> Tree:
    """(y,((u,v),(w,x))): u,v siblings and w,x siblings, y on the middle."""
    return Tree.from_adjacency(
        {0: [5], 1: [5], 2: [6], 3: [6], 4: [7], 5: [0, 1, 7], 6: [2, 3, 7], 7: [4, 5, 6]}
    )


@pytest.fixture
def rng():
    return rng_for(20240817)
