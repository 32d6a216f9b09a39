"""
Kernel matrices and their spectra
=================================

A frequency set and an input distribution fix the kernel matrix K.  How far
K is from the identity decides whether the sample-count bound is usable.
"""

import numpy as np

from nffrecovery import InputDistribution, build_kernel_matrix, empirical_kernel_check, generate_frequencies

# same 200 standard-normal frequencies, projected to growing dimension
for d in (2, 5, 10, 20, 40, 80):
    freqs = generate_frequencies(200, d, rng_seed=d)
    try:
        stats = build_kernel_matrix(InputDistribution.gaussian(1.0, d), freqs)
    except ValueError as err:
        print(f"d={d:3d}  degenerate: {err}")
        continue
    print(f"d={d:3d}  lambda_min={stats.lambda_min:.4f}  lambda_max={stats.lambda_max:8.4f}"
          f"  beta={stats.beta:10.3f}  k_max={stats.k_max:.2e}")

# the kernel is the characteristic function of the inputs, so a plain
# Monte Carlo average of exp(-j x^T dw) must land on it
dist = InputDistribution.gaussian(1.0, 3)
dw = np.array([0.7, -0.2, 0.4])
chk = empirical_kernel_check(dist, dw, 1_000_000, rng_seed=0)
print("\nMonte Carlo", np.round(chk.estimate, 5), "closed form", round(float(np.exp(-0.5 * dw @ dw)), 5),
      f"({chk.abs_error / chk.std_error:.2f} standard errors apart)")

# heavier-tailed inputs give the other two kernels
for dist in (InputDistribution.laplace(1.0, 3), InputDistribution.cauchy(1.0, 3)):
    chk = empirical_kernel_check(dist, dw, 1_000_000, rng_seed=1)
    print(f"{dist.kind:8s} inputs: MC {chk.estimate.real:.5f}  error {chk.abs_error:.1e}")
