"""Vanishing viscosities: the Brinkman solution degenerates to Darcy flow.

The momentum balance interpolates between viscous (Stokes-like) stresses and
pure friction; scaling (eta, lambda) down by s makes the velocity and
pressure converge to the Darcy solve on the same frozen (phi, mu, sigma)
data, while the shear part of the viscous energy, 2*s*eta*|Dv|^2 integrated,
dies out.

Run:  python demos/brinkman_to_darcy_limit.py
"""

import numpy as np

import chbrinkman as chb
from chbrinkman.model import ModelParams, SourceSpec, smooth_blend

grid = chb.Grid2D(64, 64)
x, y = grid.cell_centers()
phi = np.tanh((0.25 - np.sqrt((x - 0.5) ** 2 + (y - 0.5) ** 2)) / 0.1)
mu = np.sin(np.pi * x) * np.cos(np.pi * y)
sigma = 0.5 + 0.25 * np.cos(np.pi * x)

spec = chb.ModelSpec(
    params=ModelParams(nu=1.0, chi=0.5),
    viscosity=chb.constant_viscosity(0.02, 0.01),
    sources=SourceSpec(
        b_v=smooth_blend(0.0, 0.2), f_v=smooth_blend(-0.05, 0.05),
        b_phi=smooth_blend(0.0, 0.1), f_phi=smooth_blend(0.0, 0.0),
        h=smooth_blend(0.5, 1.0)),
)

result = chb.viscosity_limit_study(grid, phi, mu, sigma, spec,
                                   [1.0, 0.1, 0.01, 0.001])

print(f"{'scale':>8}  {'|v_s - v_darcy|':>16}  {'|p_s - p_darcy|':>16}  "
      f"{'shear energy':>13}")
for s, vg, pg, en in zip(result.values,
                         result.norms["velocity_gap_l2"],
                         result.norms["pressure_gap_l2"],
                         result.norms["viscous_energy"]):
    print(f"{s:8.3f}  {vg:16.4e}  {pg:16.4e}  {en:13.4e}")

ratio = result.norms["viscous_energy"][-1] / result.norms["viscous_energy"][0]
print(f"\nshear energy at s=1e-3 is {ratio:.2e} of its s=1 value")
for name, ok in result.checks.items():
    print(f"  {name}: {ok}")
