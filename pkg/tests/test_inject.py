import numpy as np
import pytest

from fmgad.graph import SparseGraph
from fmgad.inject import (Dataset, InjectionSpec, inject, inject_attribute, inject_structural,
                          random_graph, synthetic_benchmark)


def test_cliques_on_edgeless_graph():
    g = SparseGraph.empty(10)
    out, nodes = inject_structural(g, InjectionSpec(clique_size=3, clique_count=2), np.random.default_rng(0))
    assert nodes.size == 6 and out.num_edges == 6
    out, nodes = inject_structural(g, InjectionSpec(clique_size=2, clique_count=1), np.random.default_rng(0))
    assert nodes.size == 2 and out.num_edges == 1


def test_clique_errors():
    with pytest.raises(ValueError):
        inject_structural(SparseGraph.empty(5), InjectionSpec(clique_size=3, clique_count=2), np.random.default_rng(0))


def test_cliques_disjoint_complete_and_additive():
    base = random_graph(n=60, p=0.05, d=3, seed=1).graph
    old = {tuple(e) for e in base.edge_list().tolist()}
    spec = InjectionSpec(clique_size=4, clique_count=5)
    for seed in range(100):
        rng = np.random.default_rng(seed)
        out, nodes = inject_structural(base, spec, rng)
        assert np.unique(nodes).size == 20
        new = {tuple(e) for e in out.edge_list().tolist()}
        assert old <= new
        added = new - old
        # every added edge lies within the chosen nodes, and each chosen node's clique is complete
        assert all(u in set(nodes.tolist()) and v in set(nodes.tolist()) for u, v in added)
        for u in nodes.tolist():
            inside = [v for v in out.neighbors(u).tolist() if v in set(nodes.tolist())]
            assert len(inside) >= 3


def test_clique_groups_replayed():
    # replay the draw to recover the groups and check each is complete
    base = SparseGraph.empty(30)
    spec = InjectionSpec(clique_size=5, clique_count=3)
    out, _ = inject_structural(base, spec, np.random.default_rng(7))
    groups = np.random.default_rng(7).choice(np.arange(30), size=15, replace=False).reshape(3, 5)
    for grp in groups:
        for i in grp:
            for j in grp:
                assert i == j or out.has_edge(int(i), int(j))
    assert out.num_edges == 3 * 10


def test_attribute_identical_features():
    X = np.ones((20, 3))
    spec = InjectionSpec(attribute_count=4, k_cand=5)
    out, nodes = inject_attribute(X, SparseGraph.empty(20), spec, np.random.default_rng(0))
    assert nodes.size == 4 and np.array_equal(out, X)


def test_attribute_two_nodes():
    X = np.array([[1.0, 2.0], [5.0, -1.0]])
    spec = InjectionSpec(attribute_count=1, k_cand=1)
    out, nodes, src = inject_attribute(X, SparseGraph.empty(2), spec, np.random.default_rng(3), return_sources=True)
    i = int(nodes[0])
    assert src[i] == 1 - i and np.array_equal(out[i], X[1 - i])


def test_attribute_argmax_oracle():
    rng_x = np.random.default_rng(0)
    X = rng_x.normal(size=(40, 4))
    spec = InjectionSpec(attribute_count=6, k_cand=7)
    out, nodes, src = inject_attribute(X, SparseGraph.empty(40), spec, np.random.default_rng(5),
                                       return_sources=True)
    # replay the candidate draws
    rng = np.random.default_rng(5)
    chosen = rng.choice(np.arange(40), size=6, replace=False)
    for i in chosen:
        cand = rng.choice(39, size=7, replace=False)
        cand = cand + (cand >= i)
        assert i not in cand
        best = max(cand.tolist(), key=lambda j: sum((X[i] - X[j]) ** 2))
        assert src[int(i)] == best
        assert np.array_equal(out[i], X[best])
    untouched = np.setdiff1d(np.arange(40), nodes)
    assert np.array_equal(out[untouched], X[untouched])


def test_attribute_k_cand_too_large():
    with pytest.raises(ValueError):
        inject_attribute(np.zeros((5, 2)), SparseGraph.empty(5), InjectionSpec(attribute_count=1, k_cand=5),
                         np.random.default_rng(0))


def test_inject_totals():
    base = random_graph(n=200, p=0.03, d=4, seed=0)
    out = inject(base, 20, InjectionSpec(clique_size=5), np.random.default_rng(0))
    assert out.labels.sum() == 20
    assert (out.kinds == 1).sum() == 10 and (out.kinds == 2).sum() == 10
    one = inject(base, 10, InjectionSpec(clique_size=5), np.random.default_rng(0))
    assert (one.kinds == 1).sum() == 5 and (one.kinds == 2).sum() == 5
    with pytest.raises(ValueError, match="multiple"):
        inject(base, 25, InjectionSpec(clique_size=5))
    normal = out.kinds == 0
    assert np.array_equal(out.features[normal | (out.kinds == 1)], base.features[normal | (out.kinds == 1)])


@pytest.mark.parametrize("n,ratio", [(2708, 5.54), (3327, 4.51)])
def test_citation_scale_ratios(n, ratio):
    # the feature content is irrelevant here; the counts are the point
    rng = np.random.default_rng(0)
    base = Dataset(SparseGraph.empty(n), rng.normal(size=(n, 2)))
    out = inject(base, 150, InjectionSpec(clique_size=15, k_cand=50), np.random.default_rng(1))
    assert (out.kinds == 1).sum() == 75 and (out.kinds == 2).sum() == 75
    assert out.graph.num_edges == 5 * 15 * 14 // 2
    assert round(100 * out.labels.sum() / n, 2) == ratio


def test_synthetic_benchmark_shape():
    d = synthetic_benchmark(seed=0)
    assert d.n == 500 and d.features.shape == (500, 32) and d.labels.sum() == 50
    assert (d.kinds == 1).sum() == 25
    again = synthetic_benchmark(seed=0)
    assert np.array_equal(d.features, again.features) and np.array_equal(d.graph.col_idx, again.graph.col_idx)
