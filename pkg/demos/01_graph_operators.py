"""Graph storage and the propagation operators: self-looped normalized
adjacency (low-pass) against the high-pass filter eps*I - D^-1/2 A D^-1/2."""
import numpy as np

from fmgad.graph import SparseGraph, high_pass_filter, k_hop_neighborhood, laplacian, sym_normalize

# a 6-cycle with one chord; duplicate and reversed pairs collapse to one edge
g = SparseGraph.from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3), (3, 0), (1, 2)])
print("edges:", g.num_edges, "degrees:", g.degrees.tolist())
print("neighbors of 0:", g.neighbors(0).tolist())

a = sym_normalize(g)
print("\nspectrum of the normalized adjacency (self-loops):", np.round(np.linalg.eigvalsh(a), 3))
print("spectrum of the Laplacian:", np.round(np.linalg.eigvalsh(laplacian(g)), 3))

# a smooth signal survives low-pass filtering, an alternating one survives high-pass
smooth = np.ones(6)
rough = np.array([1, -1, 1, -1, 1, -1.0])
f_h = high_pass_filter(g, 0.1)
for name, x in [("smooth", smooth), ("alternating", rough)]:
    print(f"{name:12s} |A x| = {np.linalg.norm(a @ x):.3f}   |F_H x| = {np.linalg.norm(f_h @ x):.3f}")

print("\n2-hop ball around node 1:", k_hop_neighborhood(g, [1], 2).tolist())
