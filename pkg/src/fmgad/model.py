"""Joint training of the contrast and reconstruction branches, and node scoring."""
from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field, fields

import numpy as np
import scipy.sparse as sp

from . import autodiff as ad
from .contrast import collate, contrast_forward
from .graph import sym_normalize
from .inject import Dataset
from .reconstruct import ReconConfig, build_context, recon_forward, recon_loss, row_errors
from .sampler import SamplerConfig, make_view, pair_negatives, view_rng

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    alpha: float = 0.7
    gamma: float = 0.6
    psi: float = 0.5
    epochs: int = 100
    batch_size: int = 128
    hidden: int = 128
    enc_depth: int = 2
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    recon: ReconConfig = field(default_factory=ReconConfig)
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    score_rounds: int = 16
    score_mix: float = 0.5
    normalize_embeddings: bool = True
    dense_threshold: int = 1000
    seed: int = 0

    def __post_init__(self):
        for name in ("alpha", "score_mix"):
            if not 0.0 < getattr(self, name) < 1.0:
                raise ValueError(f"{name} must lie in (0, 1)")
        # gamma = 1 switches subgraph-subgraph contrast off (ablation)
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must lie in (0, 1]")
        if self.psi < 0:
            raise ValueError("psi must be >= 0")
        for name in ("epochs", "batch_size", "score_rounds", "hidden", "enc_depth"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.batch_size < 2:
            raise ValueError("batch_size must be >= 2 for negative pairing")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown training keys: {sorted(unknown)}")
        d = dict(d)
        if isinstance(d.get("sampler"), dict):
            d["sampler"] = SamplerConfig(**d["sampler"])
        if isinstance(d.get("recon"), dict):
            d["recon"] = ReconConfig(**d["recon"])
        return cls(**d)

    def fingerprint(self) -> str:
        return fingerprint(self.to_dict())


def fingerprint(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class ModelParams:
    """Named trainable matrices.

    ``enc*`` are shared by subgraph encoding and target projection, ``w_s``
    is the bilinear discriminator, ``low*``/``high*`` the two reconstruction
    encoders and ``mlp_*`` the output layer.
    """

    arrays: dict
    n_features: int

    def names(self, prefix: str) -> list[str]:
        return [k for k in self.arrays if k.startswith(prefix)]

    def copy(self) -> "ModelParams":
        return ModelParams({k: v.copy() for k, v in self.arrays.items()}, self.n_features)


def _glorot(rng, fan_in, fan_out):
    lim = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-lim, lim, size=(fan_in, fan_out))


def init_params(n_features: int, cfg: TrainConfig) -> ModelParams:
    rng = np.random.default_rng([cfg.seed, 7])
    d, h = n_features, cfg.hidden
    arrays = {}
    for i in range(cfg.enc_depth):
        arrays[f"enc{i}"] = _glorot(rng, d if i == 0 else h, h)
    arrays["w_s"] = _glorot(rng, h, h)
    for i in range(cfg.recon.low_depth):
        arrays[f"low{i}"] = _glorot(rng, d if i == 0 else h, h)
    for i in range(cfg.recon.high_depth):
        arrays[f"high{i}"] = _glorot(rng, d if i == 0 else h, h)
    arrays["mlp_w"] = _glorot(rng, 2 * h, d)
    arrays["mlp_b"] = np.zeros(d)
    return ModelParams(arrays, d)


class _Prepared:
    """Per-dataset constants shared by training and scoring."""

    def __init__(self, data: Dataset, fewshot, cfg: TrainConfig):
        fewshot = np.asarray(fewshot, dtype=np.int64).ravel()
        if fewshot.size == 0:
            raise ValueError("at least one labeled anomaly is required")
        g, X = data.graph, np.asarray(data.features, dtype=np.float64)
        self.g, self.X = g, X
        density = np.count_nonzero(X) / max(X.size, 1)
        self.sparse_x = X.shape[1] > 64 and density < 0.25
        self.x_ops = sp.csr_array(X) if self.sparse_x else X
        self.use_recon = cfg.psi > 0
        self.ctx = None
        if self.use_recon:
            a_norm = sym_normalize(g, add_self_loops=cfg.recon.lowpass_self_loops,
                                   dense=g.n <= cfg.dense_threshold)
            self.ctx = build_context(g, X, fewshot, cfg.recon, a_norm, self.x_ops)

    def views(self, targets, cfg: TrainConfig, epoch: int, phase: int):
        out = []
        for view_id in (1, 2):
            samples = [make_view(self.g, self.X, int(t), cfg.sampler,
                                 view_rng(cfg.seed, epoch, int(t), view_id, phase), view_id)
                       for t in targets]
            out.append(collate(samples, sparse_features=self.sparse_x))
        return out

    def target_features(self, targets):
        return self.x_ops[targets]


def _batches(order: np.ndarray, size: int) -> list[np.ndarray]:
    parts = [order[i:i + size] for i in range(0, order.size, size)]
    if len(parts) > 1 and parts[-1].size < 2:
        parts[-2] = np.concatenate([parts[-2], parts.pop()])
    return parts


def _tensors(params: ModelParams) -> dict:
    return {k: ad.param(v, name=k) for k, v in params.arrays.items()}


def _contrast(t: dict, prep: _Prepared, targets, cfg: TrainConfig, epoch: int, phase: int):
    v1, v2 = prep.views(targets, cfg, epoch, phase)
    enc = [t[f"enc{i}"] for i in range(cfg.enc_depth)]
    neg = pair_negatives(len(targets))
    return contrast_forward(enc, t["w_s"], v1, v2, prep.target_features(targets), neg,
                            cfg.alpha, cfg.gamma, cfg.normalize_embeddings)


def _reconstruct(t: dict, prep: _Prepared, cfg: TrainConfig, trace=None):
    low = [t[f"low{i}"] for i in range(cfg.recon.low_depth)]
    high = [t[f"high{i}"] for i in range(cfg.recon.high_depth)]
    return recon_forward(prep.ctx, low, high, t["mlp_w"], t["mlp_b"], trace)


def joint_loss(l_con, l_rec, psi: float):
    if psi < 0:
        raise ValueError("psi must be >= 0")
    return l_con + psi * l_rec


def train(data: Dataset, fewshot, cfg: TrainConfig | None = None,
          params: ModelParams | None = None):
    """Optimize the joint objective with Adam.

    Every node is a contrast target once per epoch, in shuffled batches; the
    reconstruction loss is evaluated on the full graph at every step.
    Returns the trained parameters and one history row per epoch (batch means).
    """
    cfg = cfg or TrainConfig()
    prep = _Prepared(data, fewshot, cfg)
    params = params.copy() if params is not None else init_params(prep.X.shape[1], cfg)
    if params.n_features != prep.X.shape[1]:
        raise ValueError(f"parameters expect {params.n_features} features, data has {prep.X.shape[1]}")
    names = list(params.arrays)
    state = ad.AdamState(lr=cfg.lr, beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.adam_eps)
    history = []
    for epoch in range(cfg.epochs):
        order = np.random.default_rng([cfg.seed, 2, epoch]).permutation(prep.g.n)
        rows = []
        for targets in _batches(order, cfg.batch_size):
            t = _tensors(params)
            out = _contrast(t, prep, targets, cfg, epoch, phase=0)
            if prep.use_recon:
                l_rec = recon_loss(_reconstruct(t, prep, cfg), prep.X)
                total = joint_loss(out.loss, l_rec, cfg.psi)
                rec_val = float(l_rec.value)
            else:
                total, rec_val = out.loss, 0.0
            grads = ad.gradient(total, [t[k] for k in names])
            new, state = ad.adam_step([params.arrays[k] for k in names], grads, state)
            params.arrays = dict(zip(names, new))
            rows.append((float(total.value), float(out.loss.value), float(out.l_ns.value),
                         float(out.l_ss.value), rec_val))
        m = np.mean(rows, axis=0)
        history.append({"epoch": epoch, "loss": m[0], "con": m[1], "ns": m[2], "ss": m[3], "rec": m[4]})
        if not np.isfinite(m[0]):
            raise FloatingPointError(f"loss diverged at epoch {epoch}")
        log.debug("epoch %d loss %.4f", epoch, m[0])
    return params, history


@dataclass
class ScoreReport:
    scores: np.ndarray
    contrast: np.ndarray
    recon: np.ndarray
    fingerprint: str


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _minmax(v):
    lo, hi = v.min(), v.max()
    if hi - lo <= 0:
        return np.zeros_like(v)
    return (v - lo) / (hi - lo)


def anomaly_scores(params: ModelParams, data: Dataset, fewshot, cfg: TrainConfig | None = None,
                   rounds: int | None = None, seed: int | None = None) -> ScoreReport:
    """Per-node anomaly score in [0, 1]; higher is more anomalous.

    The contrast part averages (s_neg - s_pos + 1) / 2 over ``rounds`` fresh
    view draws of both views; the reconstruction part is the squared row error,
    min-max scaled.  They are mixed with weight ``cfg.score_mix``.  With
    ``psi == 0`` the reconstruction branch is off and the contrast part is the
    whole score.
    """
    cfg = cfg or TrainConfig()
    rounds = cfg.score_rounds if rounds is None else rounds
    if rounds < 1:
        raise ValueError("need at least one scoring round")
    seed = cfg.seed if seed is None else seed
    run_cfg = cfg if seed == cfg.seed else _with_seed(cfg, seed)
    prep = _Prepared(data, fewshot, cfg)
    if params.n_features != prep.X.shape[1]:
        raise ValueError(f"parameters expect {params.n_features} features, data has {prep.X.shape[1]}")
    t = {k: ad.Tensor(v) for k, v in params.arrays.items()}
    n = prep.g.n
    c_sum = np.zeros(n)
    for r in range(rounds):
        order = np.random.default_rng([seed, 3, r]).permutation(n)
        for targets in _batches(order, cfg.batch_size):
            out = _contrast(t, prep, targets, run_cfg, r, phase=1)
            for pos, neg in zip(out.pos_logits, out.neg_logits):
                c_sum[targets] += (_sigmoid(neg) - _sigmoid(pos) + 1.0) / 2.0
    contrast = c_sum / (2 * rounds)
    if prep.use_recon:
        recon = _minmax(row_errors(_reconstruct(t, prep, cfg).value, prep.X))
        scores = cfg.score_mix * contrast + (1.0 - cfg.score_mix) * recon
    else:
        recon = np.zeros(n)
        scores = contrast
    return ScoreReport(scores, contrast, recon, cfg.fingerprint())


def _with_seed(cfg: TrainConfig, seed: int) -> TrainConfig:
    d = cfg.to_dict()
    d["seed"] = seed
    return TrainConfig.from_dict(d)


def highpass_trace(params: ModelParams, data: Dataset, fewshot, cfg: TrainConfig) -> list[float]:
    """Per-layer spread of the high-pass embeddings (over-smoothing probe)."""
    prep = _Prepared(data, fewshot, cfg)
    if not prep.use_recon:
        return []
    trace = []
    _reconstruct({k: ad.Tensor(v) for k, v in params.arrays.items()}, prep, cfg, trace)
    return trace
