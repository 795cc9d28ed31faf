"""Compare the full system with the ZK ansatz as eps shrinks.

Errors at t = 1 are fitted against eps. A coarse grid keeps this quick;
the acceptance suite runs the same study at full resolution.
"""

from zklab.experiments import config_from_dict, run_convergence

cfg = config_from_dict(
    {"dim": 2, "points": [64], "lengths": [40.0], "t_star": [0.5, 1.0, 2.0], "dt": 0.1}
)
rep = run_convergence(cfg)
for eps, t, e0, es, rel in rep.rows:
    print(f"eps={eps:<5} t={t:<4} error(s=0)={e0:.3e}  error(s={cfg.s:g})={es:.3e}")
print(f"fitted exponent s=0: {rep.p_s0:.2f}  s={cfg.s:g}: {rep.p_s:.2f}")
print("growth exponents in t:", ", ".join(f"{q:.2f}" for q in rep.growth.values()))
