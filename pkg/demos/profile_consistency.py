"""Build the ansatz profiles from a ZK solution and measure their residuals.

Halving eps divides the density and longitudinal residuals by about 4 and
the potential residual by about 8. The transverse residual shrinks only
like eps^{3/2}, the price of the fast magnetic rotation.
"""

from zklab.experiments import config_from_dict, run_consistency

cfg = config_from_dict({"dim": 2, "points": [64], "lengths": [40.0], "T1": 0.5})
res = run_consistency(cfg)
print("eps      res_n     res_vx    res_vy    res_vz    res_phi")
for row in res.rows:
    print("  ".join(f"{x:.2e}" for x in row))
for key, slope in res.slopes.items():
    print(f"fitted order {key}: {slope:.2f}")
