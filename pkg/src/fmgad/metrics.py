"""Ranking metrics and k-shot splits."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata


@dataclass
class EvalResult:
    auc_roc: float
    auc_pr: float
    n_nodes: int
    n_positive: int
    evaluated: str  # "unlabeled" or "all"

    def as_dict(self) -> dict:
        return {"auc_roc": self.auc_roc, "auc_pr": self.auc_pr, "n_nodes": self.n_nodes,
                "n_positive": self.n_positive, "evaluated": self.evaluated}


def _check(scores, labels):
    s = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(labels).ravel().astype(bool)
    if s.shape != y.shape:
        raise ValueError("scores and labels differ in length")
    return s, y


def auc_roc(scores, labels) -> float:
    """Mann-Whitney AUC: (concordant pairs + 0.5 ties) / (P * N)."""
    s, y = _check(scores, labels)
    p = int(y.sum())
    n = y.size - p
    if p == 0 or n == 0:
        raise ValueError("AUC-ROC needs both positive and negative labels")
    ranks = rankdata(s)  # average ranks, so ties count one half
    u = ranks[y].sum() - p * (p + 1) / 2.0
    return float(u / (p * n))


def auc_pr(scores, labels) -> float:
    """Average precision: mean precision at the rank of each positive.

    Nodes are ranked by descending score; ties keep input order.
    """
    s, y = _check(scores, labels)
    p = int(y.sum())
    if p == 0:
        raise ValueError("AUC-PR needs at least one positive label")
    order = np.argsort(-s, kind="stable")
    hits = y[order]
    ranks = np.flatnonzero(hits) + 1
    precisions = np.arange(1, p + 1) / ranks
    return math.fsum(precisions.tolist()) / p


def evaluate_scores(scores, labels, fewshot=(), include_labeled: bool = False) -> EvalResult:
    """Both metrics, by default over the nodes outside the labeled few-shot set."""
    s, y = _check(scores, labels)
    keep = np.ones(s.size, dtype=bool)
    if not include_labeled:
        keep[np.asarray(fewshot, dtype=np.int64)] = False
    s, y = s[keep], y[keep]
    return EvalResult(auc_roc(s, y), auc_pr(s, y), int(s.size), int(y.sum()),
                      "all" if include_labeled else "unlabeled")


def make_few_shot_split(labels, k: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """k anomalies drawn uniformly as the labeled set; everything else unlabeled."""
    y = np.asarray(labels).ravel().astype(bool)
    anomalies = np.flatnonzero(y)
    if k < 1 or k > anomalies.size:
        raise ValueError(f"k={k} must be between 1 and the anomaly count {anomalies.size}")
    rng = np.random.default_rng(seed)
    labeled = np.sort(rng.choice(anomalies, size=k, replace=False))
    mask = np.ones(y.size, dtype=bool)
    mask[labeled] = False
    return labeled, np.flatnonzero(mask)
