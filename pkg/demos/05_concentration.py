"""
Concentration of the NFF Gram matrix
====================================

The recovery guarantee rests on three tail bounds: the smallest eigenvalue
of Z_D^H Z_D, the norm of Z_D^+ z_l off the support and the inner product of
two feature columns.  Here each is sampled and compared with its closed-form
failure probability.
"""

import math

from nffrecovery import (
    ConcentrationProbe,
    InputDistribution,
    build_kernel_matrix,
    generate_frequencies,
    verify_eigenvalue_bound,
    verify_inner_product_bound,
    verify_pinv_norm_bound,
)

dist = InputDistribution.gaussian(1.0, 20)
freqs = generate_frequencies(50, 20, rng_seed=0)
stats = build_kernel_matrix(dist, freqs)
support = [0, 1, 2]

for m in (100, 500, 2000):
    probe = ConcentrationProbe(t_i=stats.lambda_min / 2, t_p=0.5, trials=300)
    eig = verify_eigenvalue_bound(dist, freqs, support, m, probe, rng_seed=1)
    pin = verify_pinv_norm_bound(dist, freqs, support, m, probe, rng_seed=2)
    print(f"M={m:5d}  eigenvalue event: failures {eig.failure_rate:.3f}, bound {eig.epsilon:.2e}"
          f"{' (vacuous)' if eig.vacuous else ''}")
    print(f"         pinv-norm event:  failures {pin.failure_rate:.3f}, bound {pin.epsilon:.2e}"
          f"{' (vacuous)' if pin.vacuous else ''}, eta = {pin.threshold:.3f}")

pair = generate_frequencies(2, 10, rng_seed=3).freqs
for t_s in (0.0, math.sqrt(500), 3 * math.sqrt(500), 1000.0):
    res = verify_inner_product_bound(InputDistribution.gaussian(1.0, 10), pair, n=500, m=500, t_s=t_s,
                                     trials=2000, rng_seed=4)
    print(f"t_s={t_s:7.2f}  inner-product failures {res.failure_rate:.4f}, bound {res.epsilon:.3e}")
