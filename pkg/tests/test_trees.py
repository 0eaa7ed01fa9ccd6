import math

import numpy as np
import pytest

from quartet.trees import (
    QuartetTopology,
    Tree,
    all_topologies,
    embedded_quartets,
    enumerate_all_trees,
    enumerate_quartets,
    hop_distances,
    is_consistent,
    random_tree,
    topology_from_index,
    tree_from_newick,
    tree_to_dot,
    tree_to_newick,
    trees_equal,
)

from conftest import rng_for


# ---------------------------------------------------------------- topology


def test_topology_canonical_forms():
    t1 = QuartetTopology((5, 2), (7, 1))
    assert t1.pair_a == (1, 7) and t1.pair_b == (2, 5)
    assert t1 == QuartetTopology((1, 7), (5, 2)) == QuartetTopology((7, 1), (2, 5))
    assert str(QuartetTopology((3, 0), (2, 1))) == "0,3|1,2"


def test_topology_rejects_repeats():
    with pytest.raises(ValueError):
        QuartetTopology((0, 1), (1, 2))


@pytest.mark.parametrize("quartet", [(0, 1, 2, 3), (2, 5, 9, 11)])
def test_topology_index_round_trip(quartet):
    for idx in range(3):
        topo = topology_from_index(quartet, idx)
        assert topo.topo_index == idx
        assert topo.labels == tuple(sorted(quartet))


def test_enumerate_counts():
    assert len(list(enumerate_quartets(4))) == 1
    assert len(all_topologies(4)) == 3
    assert len(list(enumerate_quartets(5))) == 5
    assert len(all_topologies(5)) == 15
    assert len(list(enumerate_quartets(10))) == 210
    assert len(all_topologies(10)) == 630
    assert len(set(all_topologies(6))) == 3 * math.comb(6, 4)
    with pytest.raises(ValueError):
        list(enumerate_quartets(3))


# ---------------------------------------------------------------- Tree type


def test_tree_invariants_enforced():
    with pytest.raises(ValueError):
        Tree.from_adjacency({0: [1], 1: [0]})
    # degree-4 internal node
    with pytest.raises(ValueError):
        Tree.from_adjacency({0: [4], 1: [4], 2: [4], 3: [4], 4: [0, 1, 2, 3], 5: []})
    # disconnected but degree-correct is impossible with 2n-3 edges; break symmetry instead
    adj = random_tree(5, rng_for(1)).copy_adjacency()
    adj[0, 0] = 7 if adj[0, 0] != 7 else 6
    with pytest.raises(ValueError):
        Tree(adj)


def test_random_tree_structure(rng):
    for n in (4, 5, 9, 17):
        t = random_tree(n, rng)
        assert t.leaf_count == n
        assert t.node_count == 2 * n - 2
        for v in t.leaves:
            assert len(t.neighbors(v)) == 1
        for v in t.internal_nodes:
            assert len(t.neighbors(v)) == 3
    with pytest.raises(ValueError):
        random_tree(3, rng)


def test_random_tree_n4_hits_all_three_shapes():
    rng = rng_for(99)
    counts = {}
    for _ in range(10_000):
        key = random_tree(4, rng).canonical_key()
        counts[key] = counts.get(key, 0) + 1
    assert len(counts) == 3
    # uniform generator: each count within 5 sigma of 10000/3
    for c in counts.values():
        assert abs(c - 10_000 / 3) < 5 * math.sqrt(10_000 * (1 / 3) * (2 / 3))


def test_enumerate_all_trees_counts_and_distinctness():
    for n, want in ((4, 3), (5, 15), (6, 105), (7, 945)):
        keys = {t.canonical_key() for t in enumerate_all_trees(n)}
        assert len(keys) == want


# ------------------------------------------------------------- consistency


def test_single_quartet_consistency():
    t = Tree.from_adjacency({0: [4], 1: [4], 2: [5], 3: [5], 4: [0, 1, 5], 5: [2, 3, 4]})
    assert is_consistent(t, QuartetTopology((0, 1), (2, 3)))
    assert not is_consistent(t, QuartetTopology((0, 2), (1, 3)))
    assert not is_consistent(t, QuartetTopology((0, 3), (1, 2)))
    with pytest.raises(ValueError):
        is_consistent(t, QuartetTopology((0, 1), (2, 9)))


def test_exactly_one_topology_consistent_everywhere(rng):
    for n in (5, 6, 8):
        t = random_tree(n, rng)
        for quartet in enumerate_quartets(n):
            hits = [
                idx
                for idx in range(3)
                if is_consistent(t, topology_from_index(quartet, idx))
            ]
            assert len(hits) == 1


def test_embedded_quartets_matches_literal_checks(rng):
    for n in (5, 7):
        t = random_tree(n, rng)
        emb = embedded_quartets(t)
        assert len(emb) == math.comb(n, 4)
        for topo in emb:
            assert is_consistent(t, topo)


def test_embedded_quartets_examples():
    t4 = Tree.from_adjacency({0: [4], 1: [4], 2: [5], 3: [5], 4: [0, 1, 5], 5: [2, 3, 4]})
    assert embedded_quartets(t4) == {QuartetTopology((0, 1), (2, 3))}
    from conftest import five_leaf_target

    t5 = five_leaf_target()
    assert embedded_quartets(t5) == {
        QuartetTopology((0, 1), (2, 3)),  # uv|wx
        QuartetTopology((0, 1), (2, 4)),  # wy|uv
        QuartetTopology((0, 1), (3, 4)),  # xy|uv
        QuartetTopology((0, 4), (2, 3)),  # uy|wx
        QuartetTopology((1, 4), (2, 3)),  # vy|wx
    }


def test_embedded_quartet_count_n7(rng):
    t = random_tree(7, rng)
    assert len(embedded_quartets(t)) == 35


# ------------------------------------------------------------- trees_equal


def test_trees_equal_ignores_internal_ids(rng):
    t = random_tree(9, rng)
    perm = list(range(9)) + [9 + int(x) for x in rng.permutation(7)]
    mapping = {
        perm[v]: [perm[int(w)] for w in t.adj_array[v] if w >= 0]
        for v in range(t.node_count)
    }
    t2 = Tree.from_adjacency(mapping)
    assert trees_equal(t, t2)
    assert embedded_quartets(t) == embedded_quartets(t2)


def test_trees_equal_detects_leaf_swap(rng):
    from quartet.mutate import leaf_interchange

    t = random_tree(6, rng)
    t2, rec = leaf_interchange(t, rng)
    assert rec is not None
    assert not trees_equal(t, t2)
    assert embedded_quartets(t) != embedded_quartets(t2)
    assert trees_equal(t, t)


def test_trees_equal_is_quartet_set_equality(rng):
    # equality decisions agree with the embedded-set comparison on random pairs
    for n in (5, 6, 7):
        a, b = random_tree(n, rng), random_tree(n, rng)
        assert trees_equal(a, b) == (embedded_quartets(a) == embedded_quartets(b))
    with pytest.raises(ValueError):
        trees_equal(random_tree(5, rng), random_tree(6, rng))


# ----------------------------------------------------------- serialization


def test_newick_round_trip(rng):
    for n in (4, 8, 13):
        t = random_tree(n, rng)
        names = [f"item{i}" for i in range(n)]
        text = tree_to_newick(t, names)
        back, back_names = tree_from_newick(text, names)
        assert back_names == names
        assert trees_equal(t, back)


def test_newick_rooted_binary_input_is_unrooted():
    text = "((a:0.1,b:0.2)0.9:0.3,(c:0.1,d:0.2):0.4);"
    t, names = tree_from_newick(text)
    assert names == ["a", "b", "c", "d"]
    assert trees_equal(
        t, Tree.from_adjacency({0: [4], 1: [4], 2: [5], 3: [5], 4: [0, 1, 5], 5: [2, 3, 4]})
    )


def test_newick_quoted_names_and_errors():
    t, names = tree_from_newick("(('sp one','two''s'),(c,d));")
    assert names == ["c", "d", "sp one", "two's"]
    with pytest.raises(ValueError):
        tree_from_newick("((a,b),(c,d));", names=["a", "b", "c", "x"])
    with pytest.raises(ValueError):
        tree_from_newick("((a,b),(a,d));")  # duplicate leaf
    with pytest.raises(ValueError):
        tree_from_newick("((a,b),(c,d)") # unbalanced


def test_dot_output_names_internal_nodes(rng):
    t = random_tree(6, rng)
    dot = tree_to_dot(t, [f"s{i}" for i in range(6)])
    for j in range(1, 5):
        assert f'label="k{j}"' in dot
    assert dot.count(" -- ") == 2 * 6 - 3


def test_hop_distances_symmetric(rng):
    t = random_tree(10, rng)
    L = hop_distances(t)
    assert np.array_equal(L, L.T)
    assert np.all(np.diag(L) == 0)
    assert L[0, 1] >= 2
