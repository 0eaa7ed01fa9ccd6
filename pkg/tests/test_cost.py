import math

import numpy as np
import pytest

from quartet.cost import (
    DistanceCostFunction,
    DistanceMatrix,
    ExplicitCostFunction,
    IncompleteCostFunctionError,
    ScoreBounds,
    bounds,
    cost_from_mqc,
    cost_of,
    is_min_perfect,
    quartet_rank,
    score,
    score_from_cost,
    tree_cost_naive,
)
from quartet.trees import (
    QuartetTopology,
    Tree,
    embedded_quartets,
    enumerate_all_trees,
    enumerate_quartets,
    is_consistent,
    random_tree,
    topology_from_index,
)

from conftest import adversarial_five_costs, five_leaf_target, random_symmetric_matrix, rng_for


def four_leaf_tree():
    return Tree.from_adjacency({0: [4], 1: [4], 2: [5], 3: [5], 4: [0, 1, 5], 5: [2, 3, 4]})


def explicit_n4(c01, c02, c03):
    return ExplicitCostFunction.from_mapping(
        4,
        {
            QuartetTopology((0, 1), (2, 3)): c01,
            QuartetTopology((0, 2), (1, 3)): c02,
            QuartetTopology((0, 3), (1, 2)): c03,
        },
    )


# ----------------------------------------------------------------- basics


def test_quartet_rank_is_colex_order():
    for want, quartet in enumerate(enumerate_quartets(8)):
        assert quartet_rank(*quartet) == want


def test_distance_matrix_validation():
    with pytest.raises(ValueError):
        DistanceMatrix(np.array([[0.0, -1.0], [-1.0, 0.0]]))
    with pytest.raises(ValueError):
        DistanceMatrix(np.array([[0.0, np.inf], [np.inf, 0.0]]))
    d = np.zeros((3, 3))
    d[0, 1] = 1.0
    with pytest.raises(ValueError):
        DistanceMatrix(d)  # asymmetric
    with pytest.raises(ValueError):
        DistanceMatrix(np.zeros((4, 4)), names=["a", "a", "b", "c"])


def test_cost_of_distance_backed():
    d = np.zeros((4, 4))
    d[0, 1] = d[1, 0] = 1.0
    d[2, 3] = d[3, 2] = 2.0
    cf = DistanceCostFunction(DistanceMatrix(d))
    assert cost_of(cf, QuartetTopology((0, 1), (2, 3))) == 3.0
    assert cost_of(cf, QuartetTopology((0, 2), (1, 3))) == 0.0
    zero = DistanceCostFunction(DistanceMatrix(np.zeros((5, 5))))
    assert all(cost_of(zero, t) == 0.0 for t in [QuartetTopology((0, 1), (2, 4))])
    with pytest.raises(ValueError):
        cost_of(cf, QuartetTopology((0, 1), (2, 9)))


def test_explicit_mapping_must_be_total():
    with pytest.raises(IncompleteCostFunctionError):
        ExplicitCostFunction.from_mapping(4, {QuartetTopology((0, 1), (2, 3)): 1.0})


def test_cost_from_mqc():
    rng = rng_for(3)
    t = random_tree(5, rng)
    cf = cost_from_mqc(5, embedded_quartets(t))
    # optimum exactly at the planted tree, and only there
    best = [s for s in range(1)]
    scores = []
    for cand in enumerate_all_trees(5):
        s = score(cand, cf)
        scores.append((s, cand))
    from quartet.trees import trees_equal

    tops = [cand for s, cand in scores if s == 1.0]
    assert len(tops) == 1 and trees_equal(tops[0], t)
    assert all(s < 1.0 for s, cand in scores if not trees_equal(cand, t))
    del best

    # empty set: all-ones costs, degenerate bounds
    cf0 = cost_from_mqc(5, [])
    b = bounds(cf0)
    assert b.m == b.M == math.comb(5, 4)
    # single planted topology: any tree embedding it costs C(n,4)-1
    topo = QuartetTopology((0, 1), (2, 3))
    cf1 = cost_from_mqc(5, [topo])
    for cand in enumerate_all_trees(5):
        want = math.comb(5, 4) - (1 if is_consistent(cand, topo) else 0)
        assert tree_cost_naive(cand, cf1) == want


# ------------------------------------------------------------- tree costs


def test_tree_cost_single_quartet():
    cf = explicit_n4(3.0, 7.0, 9.0)
    assert tree_cost_naive(four_leaf_tree(), cf) == 3.0
    b = bounds(cf)
    assert (b.m, b.M) == (3.0, 9.0)


def test_tree_cost_zero_matrix(rng):
    cf = DistanceCostFunction(DistanceMatrix(np.zeros((6, 6))))
    for _ in range(3):
        assert tree_cost_naive(random_tree(6, rng), cf) == 0.0


def test_naive_cost_matches_literal_sum(rng):
    for n in (5, 6, 8):
        t = random_tree(n, rng)
        dm = random_symmetric_matrix(n, rng)
        cf = DistanceCostFunction(dm)
        literal = sum(cost_of(cf, topo) for topo in sorted(embedded_quartets(t), key=str))
        assert tree_cost_naive(t, cf) == pytest.approx(literal, rel=1e-12)


def test_adversarial_five_instance():
    cf = adversarial_five_costs(0.1)
    b = bounds(cf)
    assert b.M == pytest.approx(5 - 0.1, abs=1e-15)
    assert b.m == 0.0
    t0 = five_leaf_target()
    assert tree_cost_naive(t0, cf) == pytest.approx(0.9, abs=1e-15)
    # brute force over all 15 trees: max score is 4/4.9 at t0 exactly
    from quartet.trees import trees_equal

    best_s, best_t = -1.0, None
    for cand in enumerate_all_trees(5):
        s = score(cand, cf)
        if s > best_s:
            best_s, best_t = s, cand
    assert best_s == pytest.approx(4 / 4.9, abs=1e-12)
    assert trees_equal(best_t, t0)
    assert score(t0, cf) == pytest.approx((4.9 - 0.9) / 4.9, abs=1e-12)


# ---------------------------------------------------------------- bounds


def test_bounds_all_equal_costs():
    q = math.comb(6, 4)
    cf = ExplicitCostFunction(6, np.full((q, 3), 2.5))
    b = bounds(cf)
    assert b.m == b.M == pytest.approx(q * 2.5)


def test_bounds_bracket_tree_costs(rng):
    for n in (5, 7, 10):
        dm = random_symmetric_matrix(n, rng)
        cf = DistanceCostFunction(dm)
        b = bounds(cf)
        for _ in range(5):
            c = tree_cost_naive(random_tree(n, rng), cf)
            assert b.m <= c <= b.M


def test_score_bounds_type():
    with pytest.raises(ValueError):
        ScoreBounds(2.0, 1.0)


# ----------------------------------------------------------------- score


def test_score_examples(rng):
    cf = explicit_n4(3.0, 7.0, 9.0)
    assert score(four_leaf_tree(), cf) == 1.0  # embeds the min topology
    # degenerate bounds
    q = math.comb(5, 4)
    flat = ExplicitCostFunction(5, np.ones((q, 3)))
    assert score(random_tree(5, rng), flat) == 1.0


def test_score_affine_invariance(rng):
    for trial in range(10):
        n = int(rng.integers(5, 9))
        t = random_tree(n, rng)
        q = math.comb(n, 4)
        base = rng.random((q, 3))
        a, b = float(rng.random()) * 5 + 0.1, float(rng.random()) * 10 - 5
        s1 = score(t, ExplicitCostFunction(n, base))
        s2 = score(t, ExplicitCostFunction(n, a * base + b))
        assert s1 == pytest.approx(s2, abs=1e-12)


def test_score_two_arrangements_agree(rng):
    for trial in range(10):
        n = int(rng.integers(5, 9))
        t = random_tree(n, rng)
        dm = random_symmetric_matrix(n, rng)
        cf = DistanceCostFunction(dm)
        b = bounds(cf)
        c = tree_cost_naive(t, cf)
        s1 = (b.M - c) / (b.M - b.m)
        s2 = 1.0 - (c - b.m) / (b.M - b.m)
        assert s1 == pytest.approx(s2, abs=1e-12)
        assert score(t, cf) == pytest.approx(s1, abs=1e-12)


def test_random_tree_baseline_uniform_costs():
    # With iid uniform(0,1) topology costs the embedded topology of a random
    # tree is independent of the costs, so per quartet the expected embedded
    # cost is 1/2 against bounds (1/4, 3/4); the mean score concentrates at
    # (3/4 - 1/2) / (1/2) = 1/2.
    rng = rng_for(777)
    n, q = 10, math.comb(10, 4)
    total = 0.0
    for _ in range(200):
        cf = ExplicitCostFunction(n, rng.random((q, 3)))
        total += score(random_tree(n, rng), cf)
    assert 0.47 <= total / 200 <= 0.53


def test_random_tree_baseline_planted_costs_is_one_third():
    # With one zero-cost topology per quartet (two costing 1), a random tree
    # embeds the zero one for about a third of quartets, so S(T) ~ 1/3.
    rng = rng_for(778)
    n = 10
    total = 0.0
    for _ in range(200):
        planted = random_tree(n, rng)
        cf = cost_from_mqc(n, embedded_quartets(planted))
        total += score(random_tree(n, rng), cf)
    assert 0.28 <= total / 200 <= 0.38


def test_perfect_certificate(rng):
    # a planted tree-metric instance certifies exactly; a perturbed tree does not
    from quartet.trees import hop_distances
    from quartet.mutate import leaf_interchange

    t = random_tree(9, rng)
    d = (hop_distances(t).astype(float) + 1.0) / 9
    np.fill_diagonal(d, 0.0)
    cf = DistanceCostFunction(DistanceMatrix(d))
    assert is_min_perfect(t, cf)
    assert score(t, cf) == 1.0
    other, rec = leaf_interchange(t, rng)
    assert rec is not None
    assert not is_min_perfect(other, cf)
    assert score(other, cf) < 1.0


def test_score_from_cost_clipping():
    b = ScoreBounds(0.0, 1.0)
    assert score_from_cost(-1e-18, b, perfect=False) < 1.0
    assert score_from_cost(2.0, b, perfect=False) == 0.0
    assert score_from_cost(0.5, b, perfect=True) == 1.0
