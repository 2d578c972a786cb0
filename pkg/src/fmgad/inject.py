"""Clique and feature-swap anomaly injection (the DOMINANT recipe)."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .graph import SparseGraph


@dataclass(frozen=True)
class InjectionSpec:
    clique_size: int = 15
    clique_count: int = 0
    attribute_count: int = 0
    k_cand: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.clique_size < 2:
            raise ValueError("clique_size must be >= 2")
        if self.clique_count < 0 or self.attribute_count < 0:
            raise ValueError("anomaly counts must be >= 0")
        if self.k_cand < 1:
            raise ValueError("k_cand must be >= 1")


@dataclass
class Dataset:
    graph: SparseGraph
    features: np.ndarray
    labels: np.ndarray | None = None
    kinds: np.ndarray | None = None  # 0 normal, 1 structural, 2 attribute
    name: str = ""

    @property
    def n(self) -> int:
        return self.graph.n


def _available(n, exclude):
    mask = np.ones(n, dtype=bool)
    if exclude is not None:
        mask[np.asarray(exclude, dtype=np.int64)] = False
    return np.flatnonzero(mask)


def inject_structural(g: SparseGraph, spec: InjectionSpec, rng: np.random.Generator,
                      exclude=None) -> tuple[SparseGraph, np.ndarray]:
    """Turn ``clique_count`` disjoint random groups of ``clique_size`` nodes into cliques."""
    m, q = spec.clique_size, spec.clique_count
    pool = _available(g.n, exclude)
    if m * q > pool.size:
        raise ValueError(f"need {m * q} nodes for {q} cliques of {m}, only {pool.size} available")
    chosen = rng.choice(pool, size=m * q, replace=False)
    iu, ju = np.triu_indices(m, k=1)
    new_edges = [np.stack([grp[iu], grp[ju]], axis=1) for grp in chosen.reshape(q, m)]
    edges = np.concatenate([g.edge_list()] + new_edges) if q else g.edge_list()
    return SparseGraph.from_edges(g.n, edges), np.sort(chosen)


def inject_attribute(X: np.ndarray, g: SparseGraph, spec: InjectionSpec, rng: np.random.Generator,
                     exclude=None, return_sources: bool = False):
    """Replace each selected node's features with those of the farthest of
    ``k_cand`` randomly drawn other nodes.

    Sources are always read from the unmodified ``X``.  With
    ``return_sources`` the chosen source node per labeled node is returned too.
    """
    n = X.shape[0]
    if spec.k_cand >= n:
        raise ValueError(f"k_cand={spec.k_cand} must be smaller than the node count {n}")
    pool = _available(n, exclude)
    if spec.attribute_count > pool.size:
        raise ValueError(f"need {spec.attribute_count} nodes, only {pool.size} available")
    chosen = rng.choice(pool, size=spec.attribute_count, replace=False)
    out = np.array(X, dtype=np.float64, copy=True)
    sources = {}
    for i in chosen:
        cand = rng.choice(n - 1, size=spec.k_cand, replace=False)
        cand = cand + (cand >= i)  # skip i itself
        dist = np.linalg.norm(X[cand] - X[i], axis=1)
        j = int(cand[np.argmax(dist)])
        out[i] = X[j]
        sources[int(i)] = j
    labeled = np.sort(chosen)
    if return_sources:
        return out, labeled, sources
    return out, labeled


def inject(dataset: Dataset, total: int, spec: InjectionSpec | None = None,
           rng: np.random.Generator | None = None) -> Dataset:
    """Half structural, half attribute anomalies on disjoint node sets."""
    spec = spec or InjectionSpec()
    m = spec.clique_size
    if total <= 0 or total % (2 * m):
        raise ValueError(f"total={total} must be a positive multiple of 2*clique_size={2 * m} "
                         f"(e.g. {max(1, round(total / (2 * m))) * 2 * m})")
    if total > dataset.n:
        raise ValueError(f"cannot inject {total} anomalies into {dataset.n} nodes")
    rng = rng if rng is not None else np.random.default_rng(spec.seed)
    spec = replace(spec, clique_count=total // (2 * m), attribute_count=total // 2)
    g, structural = inject_structural(dataset.graph, spec, rng)
    X, attribute = inject_attribute(dataset.features, g, spec, rng, exclude=structural)
    kinds = np.zeros(dataset.n, dtype=np.int64)
    kinds[structural] = 1
    kinds[attribute] = 2
    return Dataset(g, X, (kinds > 0).astype(np.int64), kinds, dataset.name)


def random_graph(n: int = 500, p: float = 0.02, d: int = 32, seed: int = 0,
                 smoothing: int = 2, noise: float = 0.5, name: str = "synthetic") -> Dataset:
    """Erdos-Renyi graph with Gaussian node features correlated along edges.

    Features start as i.i.d. standard normal draws, are averaged over
    ``smoothing`` rounds of (self-looped) neighborhood propagation, mixed with
    fresh noise of relative scale ``noise`` and standardized per column.  The
    result is still jointly Gaussian, but neighbors look alike.
    """
    from .graph import sym_normalize

    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    g = SparseGraph.from_edges(n, np.stack([iu[keep], ju[keep]], axis=1))
    z = rng.normal(size=(n, d))
    a = sym_normalize(g, add_self_loops=True, dense=False)
    for _ in range(smoothing):
        z = a @ z
    z = (z - z.mean(0)) / z.std(0)
    x = z + noise * rng.normal(size=(n, d))
    x = (x - x.mean(0)) / x.std(0)
    return Dataset(g, x, None, None, name)


def synthetic_benchmark(seed: int = 0, n: int = 500, p: float = 0.02, d: int = 32,
                        clique_size: int = 5, total: int = 50, **graph_kw) -> Dataset:
    """Desk-scale benchmark: random graph plus ``total`` injected anomalies."""
    base = random_graph(n, p, d, seed=seed, **graph_kw)
    spec = InjectionSpec(clique_size=clique_size, k_cand=50, seed=seed)
    return inject(base, total, spec, np.random.default_rng([seed, 1]))
