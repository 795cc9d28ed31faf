"""Linear frequencies of the magnetized plasma.

For oblique waves the time-stepped system has an acoustic branch below
min(a, k1) and a cyclotron branch above a. The literal quartic with +a^2
in the resonant factor differs from these except when k is along the field
or a = 0.
"""

import numpy as np

from zklab.dispersion import dispersion_roots, linear_frequencies

a = 1.0
for k1 in np.linspace(0.25, 2.0, 8):
    k = (k1, 0.5, 0.0)
    lo, hi = linear_frequencies(k, a)
    printed = dispersion_roots(k, a).omega_sq[1]
    print(f"k1={k1:.2f}  acoustic w^2={lo:.4f}  cyclotron w^2={hi:.4f}  quartic root={printed:.4f}")
