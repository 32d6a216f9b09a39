"""
NFF sample count versus the partial-DFT baseline
================================================

M_k is the sample count that guarantees exact recovery from random NFF
data, M_f the corresponding count for randomly sampled DFT rows.  As the
input dimension grows, K tends to the identity and M_k / M_f settles on a
constant that only depends on N and delta.
"""

import math

from nffrecovery import KernelStats, compute_mf, compute_mk, compute_mk_gaussian_limit, ratio_curve

N, delta = 1000, 0.1

rows = ratio_curve(dims=(10, 20, 40, 60, 80, 100), sparsities=(1, 5, 10, 20), n=N, delta=delta, rng_seed=0)
print(" d   D        M_k        M_f   ratio")
for r in rows:
    mk = f"{r.m_k:10.1f}" if r.feasible else "infeasible"
    ratio = f"{r.ratio:.4f}" if r.feasible else "-"
    print(f"{r.d:3d} {r.D:3d} {mk:>10s} {r.m_f:10.1f}   {ratio}")

# the identity-kernel limit in closed form
m_g, c_g = compute_mk_gaussian_limit(N, 10, delta)
print(f"\nidentity limit: C_g = {c_g:.4f}, M_k = {m_g:.1f}, ratio = {m_g / compute_mf(N, 10, delta):.6f}")

# and it is exactly what the general formula gives for K = I
rep = compute_mk(KernelStats.identity(N), N, 10, delta)
print("general formula with K = I:", rep.m_k, "ceil", rep.m_k_ceil)

# C' = 30 instead of 35 in the baseline
print("ratio with C'=30:", m_g / compute_mf(N, 10, delta, c_prime=30.0))
print("ln(3N/delta) =", math.log(3 * N / delta))
