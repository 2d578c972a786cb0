"""Two random-walk-with-restart views around the same target node."""
import numpy as np

from fmgad.inject import random_graph
from fmgad.sampler import SamplerConfig, make_view, pair_negatives, view_rng

data = random_graph(n=200, p=0.03, d=4, seed=0)
cfg = SamplerConfig(K=6, restart_p=0.5)
target = 17
for view_id in (1, 2):
    s = make_view(data.graph, data.features, target, cfg, view_rng(0, 0, target, view_id), view_id)
    print(f"view {view_id}: nodes {s.nodes.tolist()}")
    print("  target row of the features (masked):", s.features[0])
    print("  normalized adjacency row sums:", np.round(s.adj_norm.sum(1), 3))

print("\nnegative partner per batch position (size 5):", pair_negatives(5).tolist())
