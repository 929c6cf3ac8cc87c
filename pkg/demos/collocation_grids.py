"""Tensor vs sparse collocation: sizes, weights, and shared realizations."""

import numpy as np

from sdmortar.collocation import build_sparse_grid, build_tensor_grid

print("grid sizes as random dimensions grow (tensor m=3 vs sparse level 1)")
print("dims     tensor 3^n   sparse 2n+1")
for n in (2, 4, 6, 8, 10, 14, 20):
    # beyond ~10 dims the tensor grid only fits on paper
    nt = build_tensor_grid([3] * n).n_real if n <= 10 else 3 ** n
    ns = build_sparse_grid(n, 1).n_real
    print(f"{n:4d}   {nt:12d}   {ns:11d}")

print("\nsparse grids use signed combination weights that still sum to one:")
g = build_sparse_grid(6, 2)
print(f"  level 2 in 6 dims: {g.n_real} points, "
      f"{np.sum(g.weights < 0)} negative weights, "
      f"sum = {np.sum(g.weights):.15f}")

print("\nboth rules integrate Gaussian polynomials they promise exactly:")
gt = build_tensor_grid([3] * 4)
val = gt.weights @ (gt.points[:, 0] ** 4)
print(f"  tensor m=3:    E[y^4] = {val:.12f}  (exact 3)")
val = g.weights @ (g.points[:, 1] ** 4 * g.points[:, 3] ** 0)
print(f"  sparse lvl 2:  E[y^4] = {val:.12f}  (exact 3)")
val = g.weights @ (g.points[:, 0] ** 2 * g.points[:, 2] ** 2)
print(f"  sparse lvl 2:  E[y0^2 y2^2] = {val:.12f}  (exact 1)")

print("\nwith two KL regions, many global points share a region's local "
      "coordinates;\nlocal solves can be built once and reused:")
gs = build_sparse_grid(10, 1, splits=(5, 5))
print(f"  10 dims split (5, 5): {gs.n_real} global realizations, "
      f"{int(gs.local_counts[0])} and {int(gs.local_counts[1])} "
      f"distinct per region")
print("  k -> (local index region 0, local index region 1):")
row = ", ".join(f"{k}->({int(gs.local_indices[0][k])},"
                f"{int(gs.local_indices[1][k])})"
                for k in range(gs.n_real))
print("  " + row)
