"""Pathwise bound for integrals against fractional Brownian motion, H = 0.75.

For H > 1/2 the integral of a smooth f against W^H is defined path by path.
Its size is at most Lambda_alpha(W^H) * I_alpha(f), where Lambda_alpha measures
the roughness of the path and I_alpha that of the integrand. We draw a few
paths and compare the Riemann sum with the bound.

    python demos/young_pathwise.py
"""

import numpy as np

from boundary_noise import TimeGrid, sample_fbm_paths, young_bound

H, alpha = 0.75, 0.3
grid = TimeGrid.uniform(1.0, 256)
s = np.concatenate([[0.0], grid.nodes])
f = lambda r: np.cos(3 * r) + r

print("path   |sum f dW|   Lambda    I_alpha   bound")
for k in range(8):
    W = np.concatenate([[0.0], sample_fbm_paths(H, grid, 1, [11, k])[0]])
    integral = abs(float(np.sum(f(s[:-1]) * np.diff(W))))
    bound, lam, I = young_bound(f, s, W, alpha, H=H)
    print(f"{k:4d}  {integral:10.4f}  {lam:8.4f}  {I:8.4f}  {bound:8.4f}")
