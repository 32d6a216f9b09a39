"""
Recovering a sparse NFF expansion
=================================

Draw a sparse coefficient vector, observe it through M random Fourier
features and recover it by basis pursuit.
"""

import numpy as np

from nffrecovery import (
    InputDistribution,
    basis_pursuit,
    generate_frequencies,
    make_nff_trial,
    recovery_verdict,
)

freqs = generate_frequencies(500, 20, rng_seed=0)
dist = InputDistribution.gaussian(1.0, 20)

trial = make_nff_trial(freqs, dist, m=100, sparsity_d=20, sign_model="steinhaus", rng_seed=1)
res = basis_pursuit(trial.z, trial.y)
v = recovery_verdict(res, trial.truth)
print(f"complex coefficients, M=100, D=20: converged={res.converged} in {res.iterations} iterations,"
      f" relative error {v.rel_error:.2e}")

# the dual certificate that proves optimality
sub = trial.z.entries.conj().T @ res.multiplier
print("max |Z^H v| =", np.max(np.abs(sub)), " l1 norm =", res.objective,
      " <Z^H v, theta> =", np.real(np.vdot(sub, res.theta_hat)))

# too few measurements: the l1 minimizer is no longer the truth
trial = make_nff_trial(freqs, dist, m=100, sparsity_d=60, sign_model="steinhaus", rng_seed=2)
res = basis_pursuit(trial.z, trial.y)
v = recovery_verdict(res, trial.truth)
print(f"complex coefficients, M=100, D=60: relative error {v.rel_error:.2e},"
      f" l1 {res.objective:.3f} vs truth {np.abs(trial.truth.theta_bar).sum():.3f}")

# real coefficients can be recovered from the same data with a real program
trial = make_nff_trial(freqs, dist, m=100, sparsity_d=60, sign_model="uniform_positive", rng_seed=3)
for domain in ("complex", "real"):
    res = basis_pursuit(trial.z, trial.y, domain=domain)
    print(f"U[0,1] coefficients, M=100, D=60, {domain:7s} program: relative error"
          f" {recovery_verdict(res, trial.truth).rel_error:.2e}")
