"""Desk-scale shadows of the limit theorems.

Three quick experiments: the future minimum's growth window, the
recurrence/transience contrast in visit windows, and the exponential
confinement tail.  Full-scale versions with gates run via the CLI
(`cond-walk exp ...`) or the acceptance test suite.

Run:  python3 demos/transience_experiments.py   (about a minute)
"""

from condwalk import (
    EncounterWindows,
    EstimatorConfig,
    exp_confinement_tail,
    exp_minimum,
    exp_srw_recurrence,
)

cfg = EstimatorConfig(trials=4000, master_seed=1)

print("future minimum M_n = min_{t >= n} |walk_t| from (1, 0):")
rep = exp_minimum(0.25, [10**3, 10**4, 10**5], cfg)
for row in rep.rows:
    d = dict(zip(rep.columns, row))
    print(f"  n = {d['n']:>6}:  median M_n = {d['q50']:8.1f}  "
          f"P[M_n >= m(n)] = {d['p_above_m']:.4f}  "
          f"target 2d lnln n/ln n = {d['target_rate']:.4f}  "
          f"ratio {d['rate_ratio']:.2f}")
print("  M_n grows like sqrt(n) times slowly varying corrections;")
print("  the avoidance rate sits within a factor 2 of its predicted decay.")
print()

print("visit windows [b_k, b_{k+1}): plain walk vs conditioned walk:")
win = EncounterWindows(growth="scaled", b0=1, g=4, k_max=3)
rep = exp_srw_recurrence(win, cfg)
for row in rep.rows:
    d = dict(zip(rep.columns, row))
    print(f"  window [{d['lo']:>3}, {d['hi']:>3}):  SRW visits origin in "
          f"{d['srw_fraction']:.3f} of runs;  conditioned revisits its start "
          f"in {d['cond_fraction']:.3f}")
print("  recurrence keeps the left column flat; transience drains the right one.")
print()

print("confinement in B(20): survival of the conditioned walk")
rep = exp_confinement_tail(20, [400 * k for k in (1, 2, 3)],
                           EstimatorConfig(trials=30_000, master_seed=1))
for row in rep.rows:
    d = dict(zip(rep.columns, row))
    print(f"  t = {d['t']:>5} ({d['t_over_r2']:.0f} r^2):  "
          f"P[still inside] = {d['p_hat']:.5f}")
print(f"  log-linear fit: slope {rep.config['slope']:.2f} per r^2 of time, "
      f"R^2 = {rep.config['r_squared']:.4f}")
print("  the tail decays exponentially on the r^2 clock, radius-free.")
