import numpy as np
import pytest

from fmgad import autodiff as ad
from fmgad.graph import SparseGraph, high_pass_filter, k_hop_neighborhood, laplacian, sym_normalize
from fmgad.inject import random_graph
from fmgad.reconstruct import (ReconConfig, build_context, extract_env_subgraph, fuse, highpass_encode,
                               lowpass_encode, recon_forward, recon_loss, reconstruct_features, row_errors)
from fdcheck import RTOL, check, smooth_instances

rng = np.random.default_rng(4)


@pytest.fixture(scope="module")
def data():
    return random_graph(n=120, p=0.025, d=4, seed=5)


def _dense_stack(op, x, ws):
    h = x
    for w in ws:
        h = np.maximum(op @ h @ w, 0)
    return h


def test_env_subgraph_cases(data):
    g, X = data.graph, data.features
    assert extract_env_subgraph(g, X, [7], 0).mapping.tolist() == [7]
    assert extract_env_subgraph(g, X, [3, 50], 2).mapping.tolist() == k_hop_neighborhood(g, [3, 50], 2).tolist()
    whole = extract_env_subgraph(g, X, [0], 10_000)
    comp = k_hop_neighborhood(g, [0], g.n)
    assert whole.mapping.tolist() == comp.tolist()
    np.testing.assert_array_equal(whole.features, X[comp])
    with pytest.raises(ValueError):
        extract_env_subgraph(g, X, [], 2)


def test_lowpass_cases(data):
    x = rng.normal(size=(data.n, 4))
    assert not lowpass_encode(sym_normalize(data.graph), x, [ad.Tensor(np.zeros((4, 3))), ad.Tensor(np.zeros((3, 3)))]).value.any()
    empty = SparseGraph.empty(5)
    xe = rng.normal(size=(5, 3))
    w = rng.normal(size=(3, 3))
    # no edges: each row only sees itself
    np.testing.assert_allclose(lowpass_encode(sym_normalize(empty), xe, [ad.Tensor(w)]).value,
                               np.maximum(xe @ w, 0))
    a = sym_normalize(data.graph)
    ws = [rng.normal(size=(4, 3)), rng.normal(size=(3, 3))]
    np.testing.assert_allclose(lowpass_encode(a, x, [ad.Tensor(v) for v in ws]).value,
                               _dense_stack(a, x, ws), atol=1e-12)


def test_highpass_cases(data):
    env = extract_env_subgraph(data.graph, data.features, [1, 2], 2)
    x = env.features
    assert not highpass_encode(high_pass_filter(env.graph, 0.5), x, [ad.Tensor(np.zeros((4, 4)))] * 5).value.any()
    ws = [rng.normal(size=(4, 4)) * 0.7 for _ in range(5)]
    lap = laplacian(env.graph)
    np.testing.assert_allclose(highpass_encode(high_pass_filter(env.graph, 1.0), x, [ad.Tensor(w) for w in ws]).value,
                               _dense_stack(lap, x, ws), atol=1e-12)
    f = high_pass_filter(env.graph, 0.3, dense=False)
    np.testing.assert_allclose(highpass_encode(f, x, [ad.Tensor(w) for w in ws]).value,
                               _dense_stack(f.toarray(), x, ws), atol=1e-12)


def test_highpass_trace_length(data):
    env = extract_env_subgraph(data.graph, data.features, [1], 3)
    trace = []
    highpass_encode(high_pass_filter(env.graph, 0.1), env.features,
                    [ad.Tensor(rng.normal(size=(4, 4))) for _ in range(5)], trace)
    assert len(trace) == 5 and all(t >= 0 for t in trace)


def test_fuse_zero_padding(data):
    env = extract_env_subgraph(data.graph, data.features, [10], 2)
    h_r = ad.Tensor(rng.normal(size=(data.n, 3)))
    h_f = ad.Tensor(rng.normal(size=(env.mapping.size, 2)))
    out = fuse(h_r, h_f, env.mapping).value
    inside = np.zeros(data.n, dtype=bool)
    inside[env.mapping] = True
    assert np.array_equal(out[~inside, 3:], np.zeros(((~inside).sum(), 2)))
    np.testing.assert_array_equal(out[:, :3], h_r.value)
    for local, node in enumerate(env.mapping):
        np.testing.assert_array_equal(out[node, 3:], h_f.value[local])


def test_fuse_whole_graph_has_no_padding():
    g = SparseGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    env = extract_env_subgraph(g, np.ones((4, 2)), [0], 5)
    out = fuse(ad.Tensor(np.zeros((4, 1))), ad.Tensor(np.ones((4, 2))), env.mapping).value
    assert (out[:, 1:] == 1).all()


def test_receptive_field(data):
    """Perturbing a seed's features moves H_f only inside its depth-hop ball."""
    g = data.graph
    depth = 3
    env = extract_env_subgraph(g, data.features, [0], depth)
    f = high_pass_filter(env.graph, 0.5)
    # positive weights and inputs keep every ReLU open, so changes are not masked
    ws = [ad.Tensor(np.abs(rng.normal(size=(4, 4)))) for _ in range(depth)]
    x = np.abs(env.features) + 5.0
    base = highpass_encode(np.abs(f), x, ws).value
    x2 = x.copy()
    seed_local = int(np.flatnonzero(env.mapping == 0)[0])
    x2[seed_local] += 1.0
    moved = np.abs(highpass_encode(np.abs(f), x2, ws).value - base).max(axis=1) > 0
    ball = set(k_hop_neighborhood(g, [0], depth).tolist())
    assert set(env.mapping[moved].tolist()) == ball


def test_reconstruct_features():
    h = rng.normal(size=(5, 4))
    assert not reconstruct_features(ad.Tensor(h), ad.Tensor(np.zeros((4, 3))), ad.Tensor(np.zeros(3))).value.any()
    w = np.zeros((4, 2))
    w[1, 0] = w[3, 1] = 1.0
    np.testing.assert_array_equal(reconstruct_features(ad.Tensor(h), ad.Tensor(w), ad.Tensor(np.zeros(2))).value,
                                  h[:, [1, 3]])
    w, b = rng.normal(size=(4, 3)), rng.normal(size=3)
    np.testing.assert_allclose(reconstruct_features(ad.Tensor(h), ad.Tensor(w), ad.Tensor(b)).value, h @ w + b)


def test_recon_loss_values():
    X = rng.normal(size=(6, 3))
    assert recon_loss(ad.Tensor(X), X).value == 0
    assert recon_loss(ad.Tensor([[1.0, 1.0]]), np.zeros((1, 2))).value == 2.0
    Y = rng.normal(size=(6, 3))
    oracle = sum(sum((Y[i, j] - X[i, j]) ** 2 for j in range(3)) for i in range(6)) / 6
    assert recon_loss(ad.Tensor(Y), X).value == pytest.approx(oracle, rel=1e-12)
    np.testing.assert_allclose(row_errors(Y, X), ((Y - X) ** 2).sum(1))
    with pytest.raises(ValueError):
        recon_loss(ad.Tensor(Y), X[:5])


def test_recon_loss_gradient(data):
    g = SparseGraph.from_edges(30, [(i, (i + 1) % 30) for i in range(30)] + [(0, 15), (3, 20)])
    X = rng.normal(size=(30, 3))
    cfg = ReconConfig(M=2, epsilon=0.5, low_depth=2, high_depth=3)
    ctx = build_context(g, X, [0, 7], cfg, sym_normalize(g))
    shapes = [(3, 4), (4, 4), (3, 4), (4, 4), (4, 4), (8, 3), (3,)]

    def f(l0, l1, h0, h1, h2, w, b):
        return recon_loss(recon_forward(ctx, [l0, l1], [h0, h1, h2], w, b), X)

    cases = smooth_instances(f, lambda: [rng.normal(size=s) * 0.6 for s in shapes], 20)
    errs = [check(f, *arrays) for arrays in cases]
    assert max(errs) < RTOL


def test_config_validation():
    with pytest.raises(ValueError):
        ReconConfig(M=0)
    with pytest.raises(ValueError):
        ReconConfig(epsilon=-1)
