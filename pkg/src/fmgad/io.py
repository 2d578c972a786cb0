"""On-disk formats: edge lists, feature matrices, labels, few-shot lists, checkpoints.

Edges      one ``u<TAB>v`` pair per line, 0-indexed; ``#`` starts a comment.
Features   CSV with one row of d decimals per node, or the binary container:
           b"FMAT", uint32 rows, uint32 cols (little endian), then rows*cols
           little-endian float32 values, row-major.
Labels     n lines of 0/1.
Few-shot   one node id per line.
Checkpoint JSON: format_version, fingerprint, config, n_features, params.
"""
from __future__ import annotations

import csv
import json
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import SparseGraph
from .inject import Dataset
from .model import ModelParams, TrainConfig

FORMAT_VERSION = 1
FMAT_MAGIC = b"FMAT"


class DataError(ValueError):
    """Malformed or inconsistent input files."""


class CheckpointError(DataError):
    pass


@dataclass
class DatasetBundle:
    edges: str
    features: str
    labels: str | None = None
    fewshot: str | None = None


def _lines(path):
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if line:
                yield lineno, line


def read_edges(path) -> np.ndarray:
    pairs = []
    for lineno, line in _lines(path):
        parts = line.split()
        try:
            if len(parts) != 2:
                raise ValueError
            u, v = int(parts[0]), int(parts[1])
            if u < 0 or v < 0:
                raise ValueError
        except ValueError:
            raise DataError(f"{path}:{lineno}: expected 'u<TAB>v' with two non-negative "
                            f"integer node ids, got {line!r}") from None
        pairs.append((u, v))
    return np.array(pairs, dtype=np.int64).reshape(-1, 2)


def write_edges(path, g: SparseGraph) -> None:
    with open(path, "w") as fh:
        for u, v in g.edge_list():
            fh.write(f"{u}\t{v}\n")


def read_features(path) -> np.ndarray:
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == FMAT_MAGIC:
        return _read_fmat(path)
    rows = []
    width = None
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or not "".join(row).strip():
                continue
            try:
                vals = [float(x) for x in row]
            except ValueError:
                raise DataError(f"{path}:{lineno}: expected comma-separated decimal values") from None
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise DataError(f"{path}:{lineno}: expected {width} values, got {len(vals)}")
            rows.append(vals)
    if not rows:
        raise DataError(f"{path}: no feature rows")
    x = np.array(rows, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise DataError(f"{path}: non-finite feature value")
    return x


def _read_fmat(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < 12:
        raise DataError(f"{path}: truncated FMAT header")
    rows, cols = struct.unpack("<II", data[4:12])
    need = 12 + 4 * rows * cols
    if len(data) != need:
        raise DataError(f"{path}: FMAT payload has {len(data) - 12} bytes, expected {need - 12}")
    return np.frombuffer(data, dtype="<f4", offset=12).reshape(rows, cols).astype(np.float64)


def write_features(path, X: np.ndarray, binary: bool = False) -> None:
    X = np.asarray(X)
    if binary:
        with open(path, "wb") as fh:
            fh.write(FMAT_MAGIC + struct.pack("<II", *X.shape))
            fh.write(np.ascontiguousarray(X, dtype="<f4").tobytes())
        return
    with open(path, "w") as fh:
        for row in X:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _read_ints(path, what: str) -> np.ndarray:
    out = []
    for lineno, line in _lines(path):
        try:
            out.append(int(line))
        except ValueError:
            raise DataError(f"{path}:{lineno}: expected one integer {what} per line, got {line!r}") from None
    return np.array(out, dtype=np.int64)


def read_labels(path) -> np.ndarray:
    y = _read_ints(path, "label (0/1)")
    bad = np.flatnonzero((y != 0) & (y != 1))
    if bad.size:
        raise DataError(f"{path}: labels must be 0 or 1 (entry {bad[0]} is {y[bad[0]]})")
    return y


def write_labels(path, labels) -> None:
    Path(path).write_text("".join(f"{int(v)}\n" for v in labels))


def read_fewshot(path) -> np.ndarray:
    return _read_ints(path, "node id")


def write_fewshot(path, nodes) -> None:
    Path(path).write_text("".join(f"{int(v)}\n" for v in nodes))


def load_dataset(bundle: DatasetBundle) -> tuple[Dataset, np.ndarray | None]:
    """Parse and cross-check a bundle; returns the dataset and few-shot ids (or None)."""
    for p in (bundle.edges, bundle.features, bundle.labels, bundle.fewshot):
        if p is not None and not os.path.exists(p):
            raise DataError(f"missing input file {p}")
    X = read_features(bundle.features)
    n = X.shape[0]
    edges = read_edges(bundle.edges)
    if edges.size and edges.max() >= n:
        raise DataError(f"{bundle.edges}: node id {edges.max()} but features define only {n} nodes")
    g = SparseGraph.from_edges(n, edges)
    labels = None
    if bundle.labels is not None:
        labels = read_labels(bundle.labels)
        if labels.size != n:
            raise DataError(f"{bundle.labels}: {labels.size} labels for {n} nodes")
    fewshot = None
    if bundle.fewshot is not None:
        fewshot = read_fewshot(bundle.fewshot)
        if fewshot.size and (fewshot.min() < 0 or fewshot.max() >= n):
            raise DataError(f"{bundle.fewshot}: node id out of range [0, {n})")
    return Dataset(g, X, labels, None, Path(bundle.features).stem), fewshot


def save_dataset(directory, data: Dataset, binary_features: bool = False) -> DatasetBundle:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    bundle = DatasetBundle(str(d / "edges.tsv"),
                           str(d / ("features.fmat" if binary_features else "features.csv")),
                           str(d / "labels.txt") if data.labels is not None else None)
    write_edges(bundle.edges, data.graph)
    write_features(bundle.features, data.features, binary=binary_features)
    if data.labels is not None:
        write_labels(bundle.labels, data.labels)
    return bundle


def read_linqs(content_path, cites_path) -> tuple[Dataset, int]:
    """Planetoid-era ``.content``/``.cites`` pair (e.g. Cora).

    Returns the dataset and the number of citation lines read, which is the
    edge count usually quoted for these graphs (before deduplication).
    """
    ids, feats = {}, []
    for lineno, line in _lines(content_path):
        parts = line.split()
        if len(parts) < 3:
            raise DataError(f"{content_path}:{lineno}: expected '<id> <features...> <class>'")
        ids[parts[0]] = len(feats)
        feats.append([float(v) for v in parts[1:-1]])
    pairs, raw = [], 0
    for lineno, line in _lines(cites_path):
        parts = line.split()
        if len(parts) != 2:
            raise DataError(f"{cites_path}:{lineno}: expected '<cited> <citing>'")
        raw += 1
        if parts[0] in ids and parts[1] in ids:
            pairs.append((ids[parts[0]], ids[parts[1]]))
    g = SparseGraph.from_edges(len(feats), pairs)
    return Dataset(g, np.array(feats), None, None, Path(content_path).stem), raw


def save_checkpoint(params: ModelParams, cfg: TrainConfig, path) -> None:
    doc = {
        "format_version": FORMAT_VERSION,
        "fingerprint": cfg.fingerprint(),
        "config": cfg.to_dict(),
        "n_features": params.n_features,
        "params": {k: v.tolist() for k, v in params.arrays.items()},
    }
    tmp = Path(str(path) + ".tmp")
    tmp.write_text(json.dumps(doc))
    os.replace(tmp, path)


def load_checkpoint(path, n_features: int | None = None) -> tuple[ModelParams, TrainConfig]:
    try:
        doc = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise CheckpointError(f"checkpoint {path} not found") from None
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CheckpointError(f"{path}: unreadable checkpoint ({exc})") from None
    if not isinstance(doc, dict) or "format_version" not in doc:
        raise CheckpointError(f"{path}: not a checkpoint file")
    if doc["format_version"] != FORMAT_VERSION:
        raise CheckpointError(f"{path}: format version {doc['format_version']}, "
                              f"this build reads version {FORMAT_VERSION}")
    try:
        cfg = TrainConfig.from_dict(doc["config"])
        arrays = {k: np.array(v, dtype=np.float64) for k, v in doc["params"].items()}
        params = ModelParams(arrays, int(doc["n_features"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"{path}: malformed checkpoint ({exc})") from None
    if cfg.fingerprint() != doc.get("fingerprint"):
        raise CheckpointError(f"{path}: config fingerprint does not match its config")
    if n_features is not None and n_features != params.n_features:
        raise CheckpointError(f"{path}: trained on {params.n_features} features, "
                              f"dataset has {n_features}")
    return params, cfg
