"""Node-subgraph and subgraph-subgraph contrast over RWR views.

All functions accept ``Tensor`` inputs (or plain arrays for constants) so the
same code serves training, scoring and the finite-difference checks.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import autodiff as ad
from .autodiff import Tensor
from .sampler import SubgraphSample


@dataclass
class ViewBatch:
    """Several samples of one view packed into block-diagonal form."""

    adj: sp.csr_array        # block-diagonal normalized adjacency
    features: object         # stacked masked features (ndarray or CSR)
    pool: sp.csr_array       # (B, total_rows) row-mean operator
    targets: np.ndarray      # global target ids, one per sample
    sizes: np.ndarray

    def __len__(self):
        return self.targets.size


def collate(samples: list[SubgraphSample], sparse_features: bool = False) -> ViewBatch:
    sizes = np.array([s.nodes.size for s in samples], dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    total = int(offsets[-1])
    rows, cols, vals = [], [], []
    for s, off in zip(samples, offsets[:-1]):
        r, c = np.nonzero(s.adj_norm)
        rows.append(r + off)
        cols.append(c + off)
        vals.append(s.adj_norm[r, c])
    adj = sp.csr_array((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                       shape=(total, total))
    seg = np.repeat(np.arange(len(samples)), sizes)
    pool = sp.csr_array((1.0 / sizes[seg], (seg, np.arange(total))), shape=(len(samples), total))
    feats = np.vstack([s.features for s in samples])
    if sparse_features:
        feats = sp.csr_array(feats)
    targets = np.array([s.target for s in samples], dtype=np.int64)
    return ViewBatch(adj, feats, pool, targets, sizes)


def _first_layer(x, w: Tensor) -> Tensor:
    # constant input features may be sparse
    if isinstance(x, Tensor):
        return ad.matmul(x, w)
    return ad.spmm(x, w)


def encode_subgraph(adj, features, weights: list[Tensor]) -> Tensor:
    """GCN stack H <- relu(A H W) over a (batched) subgraph."""
    h = ad.relu(ad.spmm(adj, _first_layer(features, weights[0])))
    for w in weights[1:]:
        h = ad.relu(ad.spmm(adj, ad.matmul(h, w)))
    return h


def readout(h: Tensor, pool=None) -> Tensor:
    """Mean of node embeddings; ``pool`` gives one mean per packed sample."""
    if pool is None:
        return ad.mean_rows(h)
    if h.shape[0] == 0:
        raise ValueError("cannot read out an empty subgraph")
    return ad.spmm(pool, h)


def project_target(x, weights: list[Tensor]) -> Tensor:
    """Target features through the encoder weights, without propagation."""
    h = ad.relu(_first_layer(x, weights[0]))
    for w in weights[1:]:
        h = ad.relu(ad.matmul(h, w))
    return h


def bilinear_logits(e: Tensor, h: Tensor, w_s: Tensor) -> Tensor:
    """e W_s h^T per row, before the sigmoid."""
    e, h = ad.const(e), ad.const(h)
    if e.value.ndim == 1:
        e, h = ad.reshape(e, (1, -1)), ad.reshape(h, (1, -1))
    return ad.rowdot(ad.matmul(e, w_s), h)


def bilinear_score(e, h, w_s) -> Tensor:
    return ad.sigmoid(bilinear_logits(e, h, w_s))


def bce_sum(logits: Tensor, labels) -> Tensor:
    """Summed binary cross-entropy on logits (stable form)."""
    y = np.asarray(labels, dtype=np.float64)
    pos = ad.mul(ad.log_sigmoid(logits), ad.const(y))
    neg = ad.mul(ad.log_sigmoid(-logits), ad.const(1.0 - y))
    return -ad.sum(pos + neg)


def node_subgraph_loss(logits_view1: Tensor, logits_view2: Tensor, labels, alpha: float) -> Tensor:
    """alpha * BCE(view 1) + (1 - alpha) * BCE(view 2)."""
    return alpha * bce_sum(logits_view1, labels) + (1.0 - alpha) * bce_sum(logits_view2, labels)


def subgraph_subgraph_loss(e1: Tensor, e2: Tensor, neg, normalize: bool = False) -> Tensor:
    """Cross-view loss: sum_i [log(exp(e1i.e1j) + exp(e1i.e2j)) - e1i.e2i], j = neg[i].

    The positive pair is deliberately absent from the denominator, so the
    loss is unbounded below.
    """
    neg = np.asarray(neg)
    if e1.shape[0] < 2:
        raise ValueError("subgraph-subgraph contrast needs a batch of at least two")
    if normalize:
        e1, e2 = _unit_rows(e1), _unit_rows(e2)
    pos = ad.rowdot(e1, e2)
    n11 = ad.rowdot(e1, ad.take_rows(e1, neg))
    n12 = ad.rowdot(e1, ad.take_rows(e2, neg))
    return ad.sum(ad.logaddexp(n11, n12) - pos)


def _unit_rows(e: Tensor) -> Tensor:
    sq = ad.add(ad.sum(ad.square(e), axis=1), 1e-12)
    inv = ad.exp(ad.scale(ad.log(sq), -0.5))
    return ad.mul(e, ad.reshape(inv, (-1, 1)))


def contrast_loss(l_ns, l_ss, gamma: float):
    return gamma * l_ns + (1.0 - gamma) * l_ss


@dataclass
class ContrastOutput:
    loss: Tensor
    l_ns: Tensor
    l_ss: Tensor
    pos_logits: tuple   # per view, (B,) arrays
    neg_logits: tuple


def contrast_forward(enc: list[Tensor], w_s: Tensor, view1: ViewBatch, view2: ViewBatch,
                     target_features, neg, alpha: float, gamma: float,
                     normalize: bool = False) -> ContrastOutput:
    """Both contrast losses for one batch of targets.

    ``target_features`` holds the unmasked feature rows of the targets, in
    batch order; ``neg[i]`` is the sample paired with target i as a negative.
    """
    h = project_target(target_features, enc)
    embeds, logits = [], []
    for view in (view1, view2):
        e = readout(encode_subgraph(view.adj, view.features, enc), view.pool)
        pos = bilinear_logits(e, h, w_s)
        negl = bilinear_logits(ad.take_rows(e, neg), h, w_s)
        embeds.append(e)
        logits.append((pos, negl))
    b = len(view1)
    labels = np.concatenate([np.ones(b), np.zeros(b)])
    z1 = ad.concat(*logits[0], axis=0)
    z2 = ad.concat(*logits[1], axis=0)
    l_ns = node_subgraph_loss(z1, z2, labels, alpha)
    l_ss = subgraph_subgraph_loss(embeds[0], embeds[1], neg, normalize=normalize)
    return ContrastOutput(contrast_loss(l_ns, l_ss, gamma), l_ns, l_ss,
                          (logits[0][0].value, logits[1][0].value),
                          (logits[0][1].value, logits[1][1].value))

