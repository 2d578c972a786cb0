"""The reverse-mode engine: a logistic regression fit with Adam, checked
against a finite difference."""
import numpy as np

from fmgad import autodiff as ad

rng = np.random.default_rng(0)
X = rng.normal(size=(200, 3))
w_true = np.array([1.5, -2.0, 0.5])
y = (X @ w_true + 0.3 * rng.normal(size=200) > 0).astype(float)[:, None]


def loss(w):
    z = ad.matmul(ad.const(X), w)
    # summed binary cross-entropy on logits
    return -ad.sum(ad.mul(ad.log_sigmoid(z), y) + ad.mul(ad.log_sigmoid(-z), 1 - y))


w = np.zeros((3, 1))
t = ad.param(w)
(g,) = ad.gradient(loss(t), [t])
h = 1e-5
e0 = np.zeros((3, 1))
e0[0] = h
fd = (loss(ad.Tensor(w + e0)).value - loss(ad.Tensor(w - e0)).value) / (2 * h)
print(f"dL/dw0 reverse mode {g[0, 0]:.6f}, central difference {float(fd):.6f}")

state = ad.AdamState(lr=0.05)
for step in range(301):
    t = ad.param(w)
    out = loss(t)
    (w,), state = ad.adam_step([w], ad.gradient(out, [t]), state)
    if step % 100 == 0:
        print(f"step {step:3d} loss {float(out.value):8.3f}")
print("direction found:", np.round(w.ravel() / np.linalg.norm(w), 3),
      "true:", np.round(w_true / np.linalg.norm(w_true), 3))
