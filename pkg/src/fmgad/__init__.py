"""Few-shot graph anomaly detection: subgraph contrast plus feature
reconstruction through a deep high-pass encoder."""
from .graph import SparseGraph, high_pass_filter, induced_subgraph, k_hop_neighborhood, laplacian, sym_normalize
from .inject import Dataset, InjectionSpec, inject, random_graph, synthetic_benchmark
from .metrics import auc_pr, auc_roc, evaluate_scores, make_few_shot_split
from .model import ModelParams, ScoreReport, TrainConfig, anomaly_scores, train
from .reconstruct import ReconConfig
from .sampler import SamplerConfig

__version__ = "0.1.0"
