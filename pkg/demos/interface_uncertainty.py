"""Where permeability uncertainty shows up in a coupled flow's moments."""

import os

import numpy as np

from sdmortar.config import build_from_config, parse_config
from sdmortar.interface import run_method

CONFIG = os.path.join(os.path.dirname(__file__), os.pardir, "configs",
                      "case2_mini.json")

cfg = parse_config(CONFIG)
problem, grid, options = build_from_config(cfg)
layout = problem.layout

print(f"free flow over a layered porous bed: {grid.n_real} realizations "
      f"of {grid.n_dims} random\ndimensions, method {options['method']}")
result = run_method(problem, grid, method=options["method"])

darcy_sids = [s for s, b in enumerate(layout.blocks)
              if b.physics == "darcy"]
iface_y = max(layout.blocks[s].rect[3] for s in darcy_sids)

depth, var = [], []
for sid in darcy_sids:
    c = problem.cell_centers(sid)
    depth.append(iface_y - c[:, 1])
    var.append(result.moments[f"{sid}:cp"][1])
depth = np.concatenate(depth)
var = np.concatenate(var)

print("\npressure variance in the bed, averaged over each row of cells:")
print("depth below coupling line   mean variance   relative to top row")
top = None
for d in np.unique(np.round(depth, 12)):
    row = var[np.isclose(depth, d)].mean()
    top = row if top is None else top
    bar = "#" * int(round(44 * row / top))
    print(f"{d:25.4f}   {row:13.2e}   {bar}")

k = int(np.argmax(var))
print(f"\nvariance peaks {depth[k]:.4f} below the coupling line "
      f"(half a cell: the top row)")

stokes_var = [float(result.moments[f"{s}:u"][1].max())
              for s, b in enumerate(layout.blocks) if b.physics == "stokes"]
print(f"largest Stokes velocity dof variance {max(stokes_var):.2e}: the "
      f"randomness below\nleaks into the free flow through the "
      f"interface conditions")
