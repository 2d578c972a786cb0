"""Node-subgraph and subgraph-subgraph contrast on one batch of targets."""
import numpy as np

from fmgad import autodiff as ad
from fmgad.contrast import collate, contrast_forward
from fmgad.inject import random_graph
from fmgad.sampler import SamplerConfig, make_view, pair_negatives, view_rng

data = random_graph(n=300, p=0.02, d=8, seed=1)
targets = np.arange(64)
cfg = SamplerConfig(K=8)
views = [collate([make_view(data.graph, data.features, int(t), cfg, view_rng(0, 0, int(t), v), v)
                  for t in targets]) for v in (1, 2)]
neg = pair_negatives(len(targets))

rng = np.random.default_rng(0)
params = [rng.normal(size=(8, 32)) * 0.3, rng.normal(size=(32, 32)) * 0.2, rng.normal(size=(32, 32)) * 0.2]
state = ad.AdamState(lr=5e-3)
for step in range(101):
    t = [ad.param(p) for p in params]
    out = contrast_forward(t[:2], t[2], views[0], views[1], data.features[targets], neg,
                           alpha=0.7, gamma=0.6, normalize=True)
    params, state = ad.adam_step(params, ad.gradient(out.loss, t), state)
    if step % 25 == 0:
        gap = np.mean(out.pos_logits[0] - out.neg_logits[0])
        print(f"step {step:3d}  L_con {float(out.loss.value):8.3f}  L_NS {float(out.l_ns.value):8.3f}  "
              f"L_SS {float(out.l_ss.value):8.3f}  pos-neg logit gap {gap:6.3f}")
