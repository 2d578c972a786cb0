"""Undirected graphs in CSR form and the propagation operators built on them."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

# operators on graphs up to this many nodes are materialized as dense arrays
DENSE_THRESHOLD = 5000


@dataclass(frozen=True, eq=False)
class SparseGraph:
    """Unweighted, undirected, self-loop-free graph.

    Every edge is stored in both directions, so ``row_ptr[n] == 2 * num_edges``.
    Neighbor lists are sorted.
    """

    n: int
    row_ptr: np.ndarray
    col_idx: np.ndarray

    def __post_init__(self):
        self.row_ptr.setflags(write=False)
        self.col_idx.setflags(write=False)

    @classmethod
    def from_edges(cls, n: int, edges) -> "SparseGraph":
        """Build from an iterable / (E, 2) array of node pairs.

        Edges are symmetrized and deduplicated; self-loops are dropped.
        """
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= n):
            raise ValueError(f"edge endpoint out of range [0, {n})")
        e = e[e[:, 0] != e[:, 1]]
        both = np.concatenate([e, e[:, ::-1]])
        both = np.unique(both, axis=0) if both.size else both.reshape(0, 2)
        counts = np.bincount(both[:, 0], minlength=n)
        row_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=row_ptr[1:])
        return cls(int(n), row_ptr, both[:, 1].copy())

    @classmethod
    def empty(cls, n: int) -> "SparseGraph":
        return cls.from_edges(n, np.zeros((0, 2), dtype=np.int64))

    @property
    def num_edges(self) -> int:
        return int(self.row_ptr[-1]) // 2

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.row_ptr)

    def neighbors(self, u: int) -> np.ndarray:
        return self.col_idx[self.row_ptr[u]:self.row_ptr[u + 1]]

    def edge_list(self) -> np.ndarray:
        """(E, 2) array with u < v, each undirected edge once."""
        rows = np.repeat(np.arange(self.n), self.degrees)
        keep = rows < self.col_idx
        return np.stack([rows[keep], self.col_idx[keep]], axis=1)

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < nb.size and nb[i] == v)

    def adjacency(self) -> sp.csr_array:
        data = np.ones(self.col_idx.size, dtype=np.float64)
        return sp.csr_array((data, self.col_idx, self.row_ptr), shape=(self.n, self.n))

    def validate(self) -> None:
        """Raise ValueError if any storage invariant is violated."""
        rp, ci = self.row_ptr, self.col_idx
        if rp.shape != (self.n + 1,) or rp[0] != 0 or np.any(np.diff(rp) < 0):
            raise ValueError("row_ptr must be nondecreasing, length n+1, starting at 0")
        if rp[-1] != ci.size or ci.size % 2:
            raise ValueError("row_ptr[n] must equal the (even) number of stored arcs")
        if ci.size and (ci.min() < 0 or ci.max() >= self.n):
            raise ValueError("column index out of range")
        rows = np.repeat(np.arange(self.n), np.diff(rp))
        if np.any(rows == ci):
            raise ValueError("self-loops are not stored")
        for u in range(self.n):
            if np.any(np.diff(self.neighbors(u)) <= 0):
                raise ValueError(f"neighbors of {u} unsorted or duplicated")
        fwd = set(zip(rows.tolist(), ci.tolist()))
        if any((v, u) not in fwd for u, v in fwd):
            raise ValueError("adjacency is not symmetric")


def as_nodeset(ids, n: int | None = None) -> np.ndarray:
    """Sorted unique int64 array of node ids, range-checked against ``n``."""
    out = np.unique(np.asarray(ids, dtype=np.int64).ravel())
    if n is not None and out.size and (out[0] < 0 or out[-1] >= n):
        raise ValueError(f"node id out of range [0, {n})")
    return out


def _use_dense(g: SparseGraph, dense: bool | None) -> bool:
    return g.n <= DENSE_THRESHOLD if dense is None else dense


def _dense_adjacency(g: SparseGraph) -> np.ndarray:
    a = np.zeros((g.n, g.n))
    a[np.repeat(np.arange(g.n), g.degrees), g.col_idx] = 1.0
    return a


def sym_normalize(g: SparseGraph, add_self_loops: bool = True, dense: bool | None = None):
    """D^-1/2 A D^-1/2, with A replaced by A + I when ``add_self_loops``.

    Rows of isolated nodes are zero (only reachable without self-loops).
    Returns an ndarray when dense, else a CSR array.
    """
    deg = g.degrees.astype(np.float64) + (1.0 if add_self_loops else 0.0)
    with np.errstate(divide="ignore"):
        inv_sqrt = np.where(deg > 0, 1.0 / np.sqrt(deg), 0.0)
    if _use_dense(g, dense):
        a = _dense_adjacency(g)
        if add_self_loops:
            a[np.diag_indices(g.n)] += 1.0
        return inv_sqrt[:, None] * a * inv_sqrt[None, :]
    a = g.adjacency()
    if add_self_loops:
        a = a + sp.eye_array(g.n, format="csr")
    d = sp.diags_array(inv_sqrt)
    return sp.csr_array(d @ a @ d)


def high_pass_filter(g: SparseGraph, epsilon: float, dense: bool | None = None):
    """eps * I - D^-1/2 A D^-1/2 (no self-loops), i.e. (eps - 1) I + L."""
    norm = sym_normalize(g, add_self_loops=False, dense=dense)
    if isinstance(norm, np.ndarray):
        return epsilon * np.eye(g.n) - norm
    return sp.csr_array(epsilon * sp.eye_array(g.n, format="csr") - norm)


def laplacian(g: SparseGraph, dense: bool | None = None):
    """Symmetric normalized Laplacian I - D^-1/2 A D^-1/2.

    Isolated nodes get identity rows.
    """
    return high_pass_filter(g, 1.0, dense=dense)


def k_hop_neighborhood(g: SparseGraph, seeds, order: int) -> np.ndarray:
    """All nodes within ``order`` hops of any seed (seeds included), sorted."""
    seeds = as_nodeset(seeds, g.n)
    if seeds.size == 0:
        raise ValueError("k_hop_neighborhood needs at least one seed node")
    if order < 0:
        raise ValueError("order must be >= 0")
    visited = np.zeros(g.n, dtype=bool)
    visited[seeds] = True
    frontier = seeds
    for _ in range(order):
        if frontier.size == 0:
            break
        starts, ends = g.row_ptr[frontier], g.row_ptr[frontier + 1]
        nbrs = np.concatenate([g.col_idx[s:e] for s, e in zip(starts, ends)])
        frontier = np.unique(nbrs[~visited[nbrs]])
        visited[frontier] = True
    return np.flatnonzero(visited)


def induced_subgraph(g: SparseGraph, nodes) -> tuple[SparseGraph, np.ndarray]:
    """Subgraph on ``nodes`` keeping every edge with both endpoints inside.

    The order of ``nodes`` is preserved: local index i is global node
    ``mapping[i]``. Duplicates are rejected.
    """
    mapping = np.asarray(nodes, dtype=np.int64).ravel()
    if mapping.size and (mapping.min() < 0 or mapping.max() >= g.n):
        raise ValueError(f"node id out of range [0, {g.n})")
    local = {v: i for i, v in enumerate(mapping.tolist())}
    if len(local) != mapping.size:
        raise ValueError("duplicate node ids")
    rows = []
    for v in mapping.tolist():
        rows.append(sorted(local[w] for w in g.neighbors(v).tolist() if w in local))
    row_ptr = np.zeros(mapping.size + 1, dtype=np.int64)
    np.cumsum([len(r) for r in rows], out=row_ptr[1:])
    col_idx = np.fromiter((j for r in rows for j in r), dtype=np.int64, count=int(row_ptr[-1]))
    return SparseGraph(int(mapping.size), row_ptr, col_idx), mapping
