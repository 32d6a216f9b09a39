"""Sufficient sample counts for exact sparse recovery.

``compute_mk`` evaluates the kernel-dependent sample count for the NFF model,
``compute_mf`` the partial-DFT baseline and ``compute_mk_gaussian_limit`` the
closed form obtained when the kernel matrix is the identity.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass

from ._seeding import child_seed
from .exceptions import DegenerateKernelError, ParameterError
from .kernelspace import InputDistribution, KernelStats, build_kernel_matrix, generate_frequencies

__all__ = [
    "Feasibility",
    "BoundReport",
    "RatioRow",
    "compute_mk",
    "compute_mf",
    "compute_mk_gaussian_limit",
    "ratio_curve",
    "ratio_rows_to_csv",
    "RATIO_CSV_HEADER",
    "DEFAULT_C_PRIME",
]

DEFAULT_C_PRIME = 35.0
RATIO_CSV_HEADER = ("d", "D", "M_k", "M_f", "ratio", "feasible")


def _check_common(n, sparsity_d, delta):
    if int(n) != n or n < 1:
        raise ParameterError(f"n must be a positive integer, got {n}")
    if int(sparsity_d) != sparsity_d or sparsity_d < 1:
        raise ParameterError(f"sparsity must be a positive integer, got {sparsity_d}")
    if not (0.0 < delta < 1.0):
        raise ParameterError(f"delta must lie in (0, 1), got {delta}")


def _q(n, delta):
    return math.sqrt(2.0 * math.log(6.0 * n / delta))


@dataclass(frozen=True)
class Feasibility:
    two_d_le_n: bool
    lambda_min_gt_q_sqrtD_kmax: bool
    c_eta_ratio_le_2sqrtD: bool

    def __bool__(self):
        return self.two_d_le_n and self.lambda_min_gt_q_sqrtD_kmax and self.c_eta_ratio_le_2sqrtD


@dataclass(frozen=True)
class BoundReport:
    """Every intermediate of the sample-count bounds for one (K, N, D, delta).

    ``m_k`` is NaN whenever any of the three side conditions fails.
    """

    m_k: float
    m_f: float
    m_k_gaussian_limit: float
    q: float
    c_eta: float
    c_beta: float
    c_q: float
    c: float
    delta: float
    sparsity_d: int
    n: int
    feasibility: Feasibility
    lambda_min: float
    lambda_max: float
    beta: float
    k_max: float
    c_prime: float = DEFAULT_C_PRIME

    @property
    def feasible(self) -> bool:
        return bool(self.feasibility)

    @property
    def m_k_ceil(self):
        return math.ceil(self.m_k) if self.feasible else None

    @property
    def m_f_ceil(self) -> int:
        return math.ceil(self.m_f)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["feasible"] = self.feasible
        out["m_k_ceil"] = self.m_k_ceil
        out["m_f_ceil"] = self.m_f_ceil
        # JSON has no NaN
        return {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in out.items()}


def compute_mk(stats: KernelStats, n: int, sparsity_d: int, delta: float,
               c_prime: float = DEFAULT_C_PRIME) -> BoundReport:
    """Kernel-dependent sufficient sample count and its feasibility conditions.

    Infeasibility is reported through ``BoundReport.feasibility`` and a NaN
    ``m_k``; it is not an error.
    """
    _check_common(n, sparsity_d, delta)
    if stats.n != n:
        raise ParameterError(f"kernel matrix is {stats.n}x{stats.n} but n={n}")
    D = int(sparsity_d)
    lam_min, k_max = stats.lambda_min, stats.k_max
    q = _q(n, delta)
    c_beta = 2.0 * (stats.beta + 2.0 / 3.0) * lam_min
    c_eta = math.sqrt((28.0 / 3.0) / c_beta)
    margin = lam_min - q * math.sqrt(D) * k_max
    if margin > 0:
        c_q = ((1.0 + q * c_eta) / margin) ** 2
        c = c_q * c_beta
        ratio_ok = c_eta / math.sqrt(c_q) <= 2.0 * math.sqrt(D)
    else:
        c_q = c = math.nan
        ratio_ok = False
    feas = Feasibility(2 * D <= n, margin > 0, ratio_ok)
    m_k = c * D * math.log(3.0 * n / delta) if feas else math.nan
    m_k_g, _ = compute_mk_gaussian_limit(n, D, delta)
    return BoundReport(
        m_k=m_k,
        m_f=compute_mf(n, D, delta, c_prime),
        m_k_gaussian_limit=m_k_g,
        q=q,
        c_eta=c_eta,
        c_beta=c_beta,
        c_q=c_q,
        c=c,
        delta=float(delta),
        sparsity_d=D,
        n=int(n),
        feasibility=feas,
        lambda_min=lam_min,
        lambda_max=stats.lambda_max,
        beta=stats.beta,
        k_max=k_max,
        c_prime=float(c_prime),
    )


def compute_mf(n: int, sparsity_d: int, delta: float, c_prime: float = DEFAULT_C_PRIME) -> float:
    """Partial-DFT sample count ``C' * D * ln^2(6N / delta)``."""
    _check_common(n, sparsity_d, delta)
    return c_prime * sparsity_d * math.log(6.0 * n / delta) ** 2


def compute_mk_gaussian_limit(n: int, sparsity_d: int, delta: float) -> tuple[float, float]:
    """Sample count for ``K = I``; returns ``(m_k_g, c_g)``."""
    _check_common(n, sparsity_d, delta)
    c_g = (10.0 / 3.0) * (1.0 + math.sqrt(14.0 / 5.0) * _q(n, delta)) ** 2
    return c_g * sparsity_d * math.log(3.0 * n / delta), c_g


@dataclass(frozen=True)
class RatioRow:
    d: int
    D: int
    m_k: float
    m_f: float
    ratio: float
    feasible: bool


def ratio_curve(dims, sparsities, n: int = 1000, sigma2: float = 1.0, delta: float = 0.1,
                rng_seed: int = 0, component_variance: float = 1.0,
                c_prime: float = DEFAULT_C_PRIME) -> list[RatioRow]:
    """Tabulate ``M_k / M_f`` over input dimensions and sparsity levels.

    Each dimension gets its own frequency set, seeded by ``(rng_seed, d)``.
    Rows whose kernel is degenerate or whose bound is infeasible carry
    ``feasible=False`` and NaN in ``m_k`` and ``ratio``.
    """
    dims = [int(d) for d in dims]
    sparsities = [int(D) for D in sparsities]
    if not dims or not sparsities:
        raise ParameterError("dims and sparsities must be nonempty")
    for D in sparsities:
        _check_common(n, D, delta)
    rows = []
    for d in sorted(dims):
        freqs = generate_frequencies(n, d, component_variance, child_seed(rng_seed, d))
        try:
            stats = build_kernel_matrix(InputDistribution.gaussian(sigma2, d), freqs)
        except DegenerateKernelError:
            stats = None
        for D in sorted(sparsities):
            m_f = compute_mf(n, D, delta, c_prime)
            if stats is None:
                rows.append(RatioRow(d, D, math.nan, m_f, math.nan, False))
                continue
            rep = compute_mk(stats, n, D, delta, c_prime)
            ratio = rep.m_k / m_f if rep.feasible else math.nan
            rows.append(RatioRow(d, D, rep.m_k, m_f, ratio, rep.feasible))
    return rows


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


def ratio_rows_to_csv(rows) -> str:
    """Render rows under the header ``d,D,M_k,M_f,ratio,feasible``."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RATIO_CSV_HEADER)
    for r in rows:
        writer.writerow([_fmt(r.d), _fmt(r.D), _fmt(r.m_k), _fmt(r.m_f), _fmt(r.ratio), _fmt(r.feasible)])
    return buf.getvalue()
