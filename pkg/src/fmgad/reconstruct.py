"""Attribute reconstruction from a low-pass view of the whole graph and a deep
high-pass view of the neighborhood around the labeled anomalies."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .graph import SparseGraph, high_pass_filter, induced_subgraph, k_hop_neighborhood


@dataclass(frozen=True)
class ReconConfig:
    M: int = 5
    epsilon: float = 0.1
    low_depth: int = 2
    high_depth: int = 5
    lowpass_self_loops: bool = True

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be >= 1")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.low_depth < 1 or self.high_depth < 1:
            raise ValueError("encoder depths must be >= 1")


@dataclass
class EnvSubgraph:
    graph: SparseGraph
    features: np.ndarray
    mapping: np.ndarray  # local -> global, sorted


def extract_env_subgraph(g: SparseGraph, X: np.ndarray, fewshot, M: int) -> EnvSubgraph:
    """Induced subgraph on everything within M hops of the labeled anomalies."""
    fewshot = np.asarray(fewshot, dtype=np.int64).ravel()
    if fewshot.size == 0:
        raise ValueError("the environment subgraph needs at least one labeled anomaly")
    nodes = k_hop_neighborhood(g, fewshot, M)
    sub, mapping = induced_subgraph(g, nodes)
    return EnvSubgraph(sub, np.asarray(X, dtype=np.float64)[mapping], mapping)


def _stack(op, x, weights: list[Tensor], trace: list | None = None) -> Tensor:
    h = x
    for w in weights:
        # constant inputs (possibly sparse) go through spmm
        hw = ad.matmul(h, w) if isinstance(h, Tensor) else ad.spmm(h, w)
        h = ad.relu(ad.spmm(op, hw))
        if trace is not None:
            trace.append(float(h.value.var(axis=0).mean()))
    return h


def lowpass_encode(a_norm, X, weights: list[Tensor]) -> Tensor:
    """H <- relu(A_norm H W_r) per layer, over the whole graph."""
    return _stack(a_norm, X, weights)


def highpass_encode(f_h, X_sub, weights: list[Tensor], trace: list | None = None) -> Tensor:
    """H <- relu(F_H H W_f) per layer.

    If ``trace`` is a list, the mean per-column variance of each layer's
    output across nodes is appended to it; a value collapsing toward zero
    with depth indicates over-smoothing.
    """
    return _stack(f_h, X_sub, weights, trace)


def fuse(h_r: Tensor, h_f: Tensor, mapping) -> Tensor:
    """[H_r | H_f], with zero H_f rows for nodes outside the environment subgraph."""
    return ad.concat(h_r, ad.scatter_rows(h_f, mapping, h_r.shape[0]), axis=1)


def reconstruct_features(h: Tensor, w: Tensor, b: Tensor) -> Tensor:
    return ad.add(ad.matmul(h, w), b)


def recon_loss(x_hat: Tensor, X) -> Tensor:
    """Mean over nodes of the squared row error."""
    x_hat = ad.const(x_hat)
    X = np.asarray(X, dtype=np.float64)
    if x_hat.shape != X.shape:
        raise ValueError(f"shape mismatch {x_hat.shape} vs {X.shape}")
    return ad.scale(ad.sum(ad.square(ad.sub(x_hat, X))), 1.0 / X.shape[0])


def row_errors(x_hat: np.ndarray, X: np.ndarray) -> np.ndarray:
    return ((x_hat - X) ** 2).sum(axis=1)


@dataclass
class ReconContext:
    """Constant operators the reconstruction branch needs at every step."""

    a_norm: object       # self-loop normalized adjacency of the full graph
    features: object     # X for products (possibly sparse)
    target: np.ndarray   # dense X, the reconstruction target
    f_h: object          # high-pass filter on the environment subgraph
    env: EnvSubgraph
    env_features: object


def recon_forward(ctx: ReconContext, low: list[Tensor], high: list[Tensor],
                  w_mlp: Tensor, b_mlp: Tensor, trace: list | None = None) -> Tensor:
    h_r = lowpass_encode(ctx.a_norm, ctx.features, low)
    h_f = highpass_encode(ctx.f_h, ctx.env_features, high, trace)
    return reconstruct_features(fuse(h_r, h_f, ctx.env.mapping), w_mlp, b_mlp)


def build_context(g: SparseGraph, X: np.ndarray, fewshot, cfg: ReconConfig,
                  a_norm, features=None) -> ReconContext:
    env = extract_env_subgraph(g, X, fewshot, cfg.M)
    f_h = high_pass_filter(env.graph, cfg.epsilon, dense=False)
    feats = X if features is None else features
    env_feats = feats[env.mapping] if hasattr(feats, "tocsr") else env.features
    return ReconContext(a_norm, feats, np.asarray(X, dtype=np.float64), f_h, env, env_feats)
