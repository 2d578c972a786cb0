"""Random walk with restart views around target nodes."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import SparseGraph, induced_subgraph, sym_normalize


@dataclass(frozen=True)
class SamplerConfig:
    K: int = 8
    restart_p: float = 0.5
    max_steps: int | None = None  # None -> 400 * K
    seed: int = 0

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if not 0.0 < self.restart_p <= 1.0:
            raise ValueError("restart_p must lie in (0, 1]")
        if self.max_steps is not None and self.max_steps < self.K:
            raise ValueError("max_steps must be >= K")

    @property
    def step_cap(self) -> int:
        return 400 * self.K if self.max_steps is None else self.max_steps


@dataclass
class SubgraphSample:
    target: int
    nodes: np.ndarray      # global ids, target at position 0
    adj_norm: np.ndarray   # dense, self-loop normalized
    features: np.ndarray   # row 0 zeroed
    view_id: int


def view_rng(seed: int, epoch: int, target: int, view_id: int, phase: int = 0) -> np.random.Generator:
    """Independent stream per (seed, phase, epoch, target, view).

    Samples never depend on the order in which targets are processed.
    ``phase`` separates training draws (0) from scoring rounds (1).
    """
    return np.random.default_rng([seed, phase, epoch, target, view_id])


def rwr_sample(g: SparseGraph, target: int, cfg: SamplerConfig, rng: np.random.Generator) -> np.ndarray:
    """Distinct nodes visited by a restarting walk from ``target``, in visit order.

    Each step jumps back to ``target`` with probability ``restart_p``, otherwise
    moves to a uniform neighbor of the current node.  Stops at K distinct nodes
    or after ``cfg.step_cap`` steps.
    """
    if not 0 <= target < g.n:
        raise ValueError(f"target {target} out of range")
    found = [int(target)]
    if cfg.K == 1 or cfg.restart_p >= 1.0 or g.row_ptr[target] == g.row_ptr[target + 1]:
        return np.array(found, dtype=np.int64)
    seen = {int(target)}
    rp, ci = g.row_ptr, g.col_idx
    cur = int(target)
    steps, cap, chunk = 0, cfg.step_cap, 32
    while len(found) < cfg.K and steps < cap:
        restart = rng.random(chunk) < cfg.restart_p
        pick = rng.random(chunk)
        for r, u in zip(restart, pick):
            steps += 1
            if r:
                cur = int(target)
            else:
                lo, hi = rp[cur], rp[cur + 1]
                cur = int(ci[lo + int(u * (hi - lo))])
                if cur not in seen:
                    seen.add(cur)
                    found.append(cur)
                    if len(found) == cfg.K:
                        break
            if steps >= cap:
                break
    return np.array(found, dtype=np.int64)


def make_view(g: SparseGraph, X: np.ndarray, target: int, cfg: SamplerConfig,
              rng: np.random.Generator, view_id: int) -> SubgraphSample:
    nodes = rwr_sample(g, target, cfg, rng)
    sub, nodes = induced_subgraph(g, nodes)
    feats = X[nodes].astype(np.float64, copy=True)
    feats[0] = 0.0
    return SubgraphSample(int(target), nodes, sym_normalize(sub, True, dense=True), feats, view_id)


def pair_negatives(batch) -> np.ndarray:
    """Negative partner for each position: cyclic shift by one.

    ``batch`` is a sequence of samples or a batch size.
    """
    size = batch if isinstance(batch, (int, np.integer)) else len(batch)
    if size < 2:
        raise ValueError("need at least two samples to pair negatives")
    return np.roll(np.arange(size), -1)
