"""Dirichlet heat kernels and the maps built from them.

Part one runs the kernel self-test: image sums against sine series, symmetry,
the semigroup property, mass loss, and Gaussian upper bounds. Part two solves
the boundary value problem (lam - Laplacian) u = 0 with given boundary data on
the interval, the half line and the disk.

    python demos/kernel_tour.py
"""

import numpy as np

from boundary_noise import (
    BoundaryData,
    HalfLine,
    Interval,
    KernelConfig,
    UnitBall,
    dirichlet_map,
    kernel_selftest,
)

for r in kernel_selftest():
    print(f"{'ok  ' if r.passed else 'FAIL'} {r.name}: {r.value:.2e} (tol {r.tol:g})")

iv, hl, disk = Interval(0.0, 1.0), HalfLine(), UnitBall(2)
x = np.linspace(0.1, 0.9, 5)
print("\ninterval, lam=0, u(0)=1, u(1)=3:", dirichlet_map(iv, KernelConfig(0.0), BoundaryData.interval(iv, 1, 3), x))
print("interval, lam=4, same data:     ", dirichlet_map(iv, KernelConfig(4.0), BoundaryData.interval(iv, 1, 3), x))
print("half line, lam=1, u(0)=2:       ", dirichlet_map(hl, KernelConfig(1.0), BoundaryData.halfline(2.0), 3 * x))

g = BoundaryData.from_function(disk, lambda y: y[:, 0] ** 2 - y[:, 1] ** 2, n=256)
pts = np.array([[0.2, 0.1], [0.5, -0.5], [-0.9, 0.0]])
print("disk, harmonic data x^2 - y^2:  ", dirichlet_map(disk, KernelConfig(0.0), g, pts))
print("exact:                          ", pts[:, 0] ** 2 - pts[:, 1] ** 2)
