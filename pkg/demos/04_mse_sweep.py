"""
Recovery MSE versus sparsity
============================

Fix 500 frequencies in 20 dimensions, then for every (M, D) draw fresh
coefficients and inputs, solve, and average the square error.  By default
this runs 5 trials per point (about three minutes on one core).  Pass --full
for 50 trials per point, which takes far longer because failed recoveries
are slow to certify.
"""

import sys

from nffrecovery import ExperimentConfig, run_mse_sweep

if "--full" in sys.argv:
    config = ExperimentConfig()
else:
    config = ExperimentConfig(d_sweep=(20, 40, 60, 80, 100, 120), trials=5)

rows = run_mse_sweep(config)
print("   M    D          MSE  success")
for r in rows:
    print(f"{r.m:4d} {r.sparsity_d:4d} {r.mean_sq_error:12.3e}  {r.successes}/{r.trials}"
          + (f"  ({r.nonconverged} not converged)" if r.nonconverged else ""))
