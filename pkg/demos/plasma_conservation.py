"""Run the cold magnetized Euler-Poisson system and watch its invariants.

A right-moving Gaussian pulse is launched with v_x = n. The energy is
conserved for any field strength; with the field switched off the impulse
is conserved too (the rotation term breaks its transverse components).
"""

import numpy as np

from zklab.experiments import gaussian_profile
from zklab.grid import make_grid
from zklab.plasma import PlasmaParams, make_state, simulate

grid = make_grid(2, [64, 64], [40.0, 40.0])
n0 = gaussian_profile(grid, 0.5, 2.0)
v0 = np.zeros((3,) + grid.shape)
v0[0] = n0

for a in (1.0, 0.0):
    params = PlasmaParams(eps=0.1, a=a)
    result = simulate(make_state(grid, n0, v0, params), params, horizon=5.0, dt=0.1)
    H = result.log.column("H")
    Px = result.log.column("Px")
    print(f"a={a}: completed={result.completed}  "
          f"H drift {np.ptp(H) / abs(H[0]):.2e}  Px drift {np.ptp(Px):.2e}")
