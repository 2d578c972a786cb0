"""Stage orchestration: inject -> train -> score -> eval, and one-parameter sweeps."""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import io
from .inject import InjectionSpec, inject
from .metrics import evaluate_scores, make_few_shot_split
from .model import TrainConfig, anomaly_scores, fingerprint, train

log = logging.getLogger(__name__)

STAGES = ("inject", "train", "score", "eval")


class ConfigError(ValueError):
    pass


class StageError(RuntimeError):
    def __init__(self, stage: str, exc: BaseException):
        super().__init__(f"[{stage}] {exc}")
        self.stage = stage
        self.cause = exc


@dataclass
class RunConfig:
    edges: str | None = None
    features: str | None = None
    labels: str | None = None
    fewshot: str | None = None
    output_dir: str = "fmgad-out"
    seed: int = 0
    k_shot: int = 10
    inject_total: int = 0
    clique_size: int = 15
    k_cand: int = 50
    include_labeled: bool = False
    train: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        if self.k_shot < 1:
            raise ConfigError("k_shot must be >= 1")
        if self.inject_total < 0:
            raise ConfigError("inject_total must be >= 0")
        if self.inject_total and self.inject_total % (2 * self.clique_size):
            raise ConfigError(f"inject_total must be a multiple of 2*clique_size={2 * self.clique_size}")
        if self.clique_size < 2 or self.k_cand < 1:
            raise ConfigError("clique_size must be >= 2 and k_cand >= 1")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        d = dict(d)
        try:
            d["train"] = TrainConfig.from_dict(d.get("train", {}))
            return cls(**d)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None

    def fingerprint(self) -> str:
        d = self.to_dict()
        d.pop("output_dir")
        return fingerprint(d)


def load_config(path) -> RunConfig:
    try:
        return RunConfig.from_dict(json.loads(Path(path).read_text()))
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None


def _assign(d: dict, key: str, value) -> None:
    parts = key.split(".")
    if parts[0] in {f.name for f in fields(TrainConfig)} and parts[0] not in d:
        parts = ["train"] + parts
    node = d
    for p in parts[:-1]:
        if not isinstance(node.get(p), dict):
            raise ConfigError(f"unknown config key {key!r}")
        node = node[p]
    if parts[-1] not in node:
        raise ConfigError(f"unknown config key {key!r}")
    node[parts[-1]] = value


def set_keys(cfg: RunConfig, updates: dict) -> RunConfig:
    """Return a copy with dotted keys (e.g. ``train.sampler.K``) replaced.

    All updates are applied before validation, so interdependent keys can
    change together.
    """
    d = cfg.to_dict()
    for key, value in updates.items():
        _assign(d, key, value)
    return RunConfig.from_dict(d)


def set_key(cfg: RunConfig, key: str, value) -> RunConfig:
    return set_keys(cfg, {key: value})


class _Paths:
    def __init__(self, out: Path):
        self.out = out
        self.data = out / "data"
        self.fewshot = out / "fewshot.txt"
        self.checkpoint = out / "checkpoint.json"
        self.losses = out / "losses.csv"
        self.scores = out / "scores.csv"
        self.metrics = out / "metrics.json"


def _bundle(cfg: RunConfig, paths: _Paths) -> io.DatasetBundle:
    if (paths.data / "edges.tsv").exists():
        labels = paths.data / "labels.txt"
        bundle = io.DatasetBundle(str(paths.data / "edges.tsv"), str(paths.data / "features.csv"),
                                  str(labels) if labels.exists() else None)
    else:
        if cfg.edges is None or cfg.features is None:
            raise io.DataError("no dataset: set 'edges' and 'features' or run the inject stage")
        bundle = io.DatasetBundle(cfg.edges, cfg.features, cfg.labels)
    if paths.fewshot.exists():
        bundle.fewshot = str(paths.fewshot)
    elif cfg.fewshot is not None:
        bundle.fewshot = cfg.fewshot
    return bundle


def _load(cfg: RunConfig, paths: _Paths):
    data, fewshot = io.load_dataset(_bundle(cfg, paths))
    if fewshot is None:
        if data.labels is None:
            raise io.DataError("need labels or a few-shot file to choose labeled anomalies")
        fewshot, _ = make_few_shot_split(data.labels, cfg.k_shot, cfg.seed)
        io.write_fewshot(paths.fewshot, fewshot)
    return data, fewshot


def stage_inject(cfg: RunConfig, paths: _Paths) -> None:
    if cfg.edges is None or cfg.features is None:
        raise io.DataError("the inject stage needs 'edges' and 'features'")
    data, _ = io.load_dataset(io.DatasetBundle(cfg.edges, cfg.features, cfg.labels))
    if cfg.inject_total:
        spec = InjectionSpec(clique_size=cfg.clique_size, k_cand=cfg.k_cand, seed=cfg.seed)
        data = inject(data, cfg.inject_total, spec, np.random.default_rng([cfg.seed, 1]))
    elif data.labels is None:
        raise io.DataError("dataset has no labels and inject_total is 0")
    io.save_dataset(paths.data, data)
    fewshot, _ = make_few_shot_split(data.labels, cfg.k_shot, cfg.seed)
    io.write_fewshot(paths.fewshot, fewshot)


def stage_train(cfg: RunConfig, paths: _Paths) -> None:
    data, fewshot = _load(cfg, paths)
    params, history = train(data, fewshot, cfg.train)
    io.save_checkpoint(params, cfg.train, paths.checkpoint)
    with open(paths.losses, "w", newline="") as fh:
        w = csv.writer(fh)
        cols = ["epoch", "loss", "con", "ns", "ss", "rec"]
        w.writerow(cols)
        for row in history:
            w.writerow([row["epoch"]] + [repr(float(row[c])) for c in cols[1:]])


def stage_score(cfg: RunConfig, paths: _Paths) -> None:
    data, fewshot = _load(cfg, paths)
    params, tcfg = io.load_checkpoint(paths.checkpoint, data.features.shape[1])
    rep = anomaly_scores(params, data, fewshot, tcfg)
    with open(paths.scores, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node", "score", "contrast", "recon"])
        for i in range(data.n):
            w.writerow([i, repr(float(rep.scores[i])), repr(float(rep.contrast[i])),
                        repr(float(rep.recon[i]))])


def read_scores(path) -> np.ndarray:
    if not Path(path).exists():
        raise io.DataError(f"missing {path}; run the score stage first")
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    try:
        return np.array([float(r["score"]) for r in rows])
    except (KeyError, ValueError):
        raise io.DataError(f"{path}: expected columns node,score,contrast,recon") from None


def stage_eval(cfg: RunConfig, paths: _Paths) -> dict:
    scores = read_scores(paths.scores)
    data, fewshot = _load(cfg, paths)
    if data.labels is None:
        raise io.DataError("evaluation needs labels")
    if scores.size != data.n:
        raise io.DataError(f"{paths.scores}: {scores.size} scores for {data.n} nodes")
    res = evaluate_scores(scores, data.labels, fewshot, cfg.include_labeled)
    metrics = res.as_dict()
    metrics.update(k_shot=int(np.asarray(fewshot).size), seed=cfg.seed, fingerprint=cfg.fingerprint())
    paths.metrics.write_text(json.dumps(metrics, indent=2, sort_keys=True) + "\n")
    return metrics


_RUNNERS = {"inject": stage_inject, "train": stage_train, "score": stage_score, "eval": stage_eval}


def run_pipeline(cfg: RunConfig, stages=STAGES) -> dict | None:
    """Run the named stages in order; errors come back wrapped in StageError."""
    paths = _Paths(Path(cfg.output_dir))
    paths.out.mkdir(parents=True, exist_ok=True)
    (paths.out / "config.json").write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")
    result = None
    for stage in stages:
        log.info("stage %s", stage)
        try:
            result = _RUNNERS[stage](cfg, paths)
        except Exception as exc:  # noqa: BLE001 - tagged and re-raised
            raise StageError(stage, exc) from exc
    return result


def sweep(cfg: RunConfig, key: str, values) -> list[dict]:
    """Full pipeline once per value of ``key``; writes sweep.csv in the output dir."""
    out = Path(cfg.output_dir)
    rows = []
    for v in values:
        sub = replace(set_key(cfg, key, v), output_dir=str(out / f"{key}={v}"))
        m = run_pipeline(sub)
        rows.append({"param": key, "value": v, "auc_roc": m["auc_roc"], "auc_pr": m["auc_pr"],
                     "seed": m["seed"], "k_shot": m["k_shot"], "fingerprint": m["fingerprint"]})
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]) if rows else ["param"])
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    return rows
