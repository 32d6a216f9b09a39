"""Monte Carlo harnesses.

* :func:`run_mse_sweep` -- recovery MSE versus sparsity for NFF data with a
  frequency set held fixed across all trials;
* :func:`run_ratio_figure` -- the ``M_k / M_f`` table over input dimension,
  written as CSV plus a JSON run manifest;
* :func:`verify_eigenvalue_bound`, :func:`verify_pinv_norm_bound`,
  :func:`verify_inner_product_bound` -- empirical failure rates of the three
  concentration events next to their closed-form failure probabilities.

Every random draw comes from a child stream keyed by ``(master_seed, ...)``
so results are reproducible and independent of execution order.
"""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import math
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from ._seeding import child_seed
from .bounds import DEFAULT_C_PRIME, ratio_curve, ratio_rows_to_csv
from .bpsolver import SolverConfig, basis_pursuit, recovery_verdict
from .exceptions import ParameterError
from .kernelspace import FrequencySet, InputDistribution, build_kernel_matrix, generate_frequencies, kernel_value
from .sensing import SIGN_MODELS, build_nff_matrix, make_nff_trial, sample_inputs

__all__ = [
    "ExperimentConfig",
    "SweepRow",
    "TrialRecord",
    "ConcentrationProbe",
    "VerificationResult",
    "run_mse_sweep",
    "sweep_rows_to_csv",
    "run_ratio_figure",
    "eps_eigenvalue",
    "eps_pinv_norm",
    "eps_inner_product",
    "binomial_slack",
    "pinv_column_norms",
    "verify_eigenvalue_bound",
    "verify_pinv_norm_bound",
    "verify_inner_product_bound",
    "SWEEP_CSV_HEADER",
]

SWEEP_CSV_HEADER = ("M", "D", "mse", "success_rate", "successes", "failures", "nonconverged", "trials")

# stream tags under the master seed
_FREQ_STREAM = 0
_TRIAL_STREAM = 1


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of an MSE sweep.

    Defaults reproduce the published setting: N=500 frequencies in d=20,
    unit-variance Gaussian inputs and frequencies, U[0, 1] coefficients,
    50 trials, M in {100, 200} and D = 10, 20, ..., 120.  ``domain`` selects
    the coefficient field of the basis-pursuit program.
    """

    n: int = 500
    dim: int = 20
    sigma2: float = 1.0
    component_variance: float = 1.0
    m_values: tuple = (100, 200)
    d_sweep: tuple = tuple(range(10, 121, 10))
    trials: int = 50
    delta: float = 0.1
    sign_model: str = "uniform_positive"
    rel_tol: float = 1e-5
    master_seed: int = 0
    output_path: str | None = None
    domain: str = "real"
    workers: int = 1
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        object.__setattr__(self, "m_values", tuple(int(m) for m in self.m_values))
        object.__setattr__(self, "d_sweep", tuple(int(D) for D in self.d_sweep))
        if not self.m_values or not self.d_sweep:
            raise ParameterError("m_values and d_sweep must be nonempty")
        if min(self.m_values) < 1:
            raise ParameterError("every M must be at least 1")
        if min(self.d_sweep) < 1 or max(self.d_sweep) > self.n:
            raise ParameterError(f"every D must lie in [1, {self.n}]")
        if self.trials < 1 or self.workers < 1:
            raise ParameterError("trials and workers must be at least 1")
        if self.sign_model not in SIGN_MODELS:
            raise ParameterError(f"unknown sign model {self.sign_model!r}")
        if self.domain not in ("real", "complex"):
            raise ParameterError(f"unknown domain {self.domain!r}")
        if self.domain == "real" and self.sign_model == "steinhaus":
            raise ParameterError("Steinhaus coefficients cannot be recovered in the real domain")
        if not (0 < self.delta < 1) or self.rel_tol <= 0 or self.sigma2 <= 0 or self.component_variance <= 0:
            raise ParameterError("delta must lie in (0, 1); rel_tol, sigma2 and component_variance must be positive")
        if isinstance(self.solver, dict):
            object.__setattr__(self, "solver", SolverConfig(**self.solver))

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(**obj)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["m_values"] = list(self.m_values)
        out["d_sweep"] = list(self.d_sweep)
        return out

    def frequencies(self) -> FrequencySet:
        return generate_frequencies(self.n, self.dim, self.component_variance,
                                    child_seed(self.master_seed, _FREQ_STREAM))


@dataclass(frozen=True)
class TrialRecord:
    m: int
    sparsity_d: int
    trial: int
    sq_error: float
    rel_error: float
    converged: bool
    success: bool
    iterations: int


@dataclass(frozen=True)
class SweepRow:
    m: int
    sparsity_d: int
    mean_sq_error: float
    success_rate: float
    successes: int
    failures: int
    nonconverged: int
    trials: int


def _run_trial(args) -> TrialRecord:
    config, freqs_array, m, D, t = args
    freqs = FrequencySet(freqs_array)
    dist = InputDistribution.gaussian(config.sigma2, config.dim)
    trial = make_nff_trial(freqs, dist, m, D, config.sign_model,
                           rng_seed=child_seed(config.master_seed, _TRIAL_STREAM, m, D, t))
    result = basis_pursuit(trial.z, trial.y, config.solver, domain=config.domain)
    verdict = recovery_verdict(result, trial.truth, config.rel_tol)
    return TrialRecord(m, D, t, verdict.sq_error, verdict.rel_error, result.converged,
                       bool(result.converged and verdict.success), result.iterations)


def run_mse_sweep(config: ExperimentConfig, return_records: bool = False):
    """Mean squared error and success rate for every (M, D) cell.

    Non-converged solves count neither as success nor as failure but are kept
    in the MSE average.  Rows come back ordered by (M, D).
    """
    freqs = config.frequencies()
    tasks = [(config, freqs.freqs, m, D, t)
             for m in sorted(config.m_values) for D in sorted(config.d_sweep) for t in range(config.trials)]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            records = list(pool.map(_run_trial, tasks, chunksize=max(1, config.trials // 4)))
    else:
        records = [_run_trial(task) for task in tasks]

    rows = []
    for i in range(0, len(records), config.trials):
        cell = records[i:i + config.trials]
        successes = sum(r.success for r in cell)
        nonconv = sum(not r.converged for r in cell)
        rows.append(SweepRow(
            m=cell[0].m,
            sparsity_d=cell[0].sparsity_d,
            mean_sq_error=float(np.mean([r.sq_error for r in cell])),
            success_rate=successes / len(cell),
            successes=successes,
            failures=len(cell) - successes - nonconv,
            nonconverged=nonconv,
            trials=len(cell),
        ))
    if config.output_path:
        Path(config.output_path).write_text(sweep_rows_to_csv(rows))
    return (rows, records) if return_records else rows


def sweep_rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_CSV_HEADER)
    for r in rows:
        writer.writerow([r.m, r.sparsity_d, repr(r.mean_sq_error), repr(r.success_rate),
                         r.successes, r.failures, r.nonconverged, r.trials])
    return buf.getvalue()


def run_ratio_figure(dims=(10, 20, 40, 60, 80, 100), sparsities=(1, 5, 10, 20), n: int = 1000,
                     sigma2: float = 1.0, delta: float = 0.1, master_seed: int = 0,
                     component_variance: float = 1.0, c_prime: float = DEFAULT_C_PRIME,
                     output_path=None):
    """Compute the ratio table and optionally write ``<output_path>`` and a
    ``.manifest.json`` next to it.  Returns the rows."""
    rows = ratio_curve(dims, sparsities, n=n, sigma2=sigma2, delta=delta, rng_seed=master_seed,
                       component_variance=component_variance, c_prime=c_prime)
    if output_path is not None:
        path = Path(output_path)
        path.write_text(ratio_rows_to_csv(rows))
        manifest = {
            "command": "ratio-curve",
            "parameters": {
                "dims": [int(d) for d in dims], "sparsities": [int(D) for D in sparsities], "n": n,
                "sigma2": sigma2, "delta": delta, "component_variance": component_variance, "c_prime": c_prime,
            },
            "master_seed": master_seed,
            "child_seeds": {str(d): {"entropy": str(master_seed), "spawn_key": [int(d)]} for d in dims},
            "rows": len(rows),
            "feasible_rows": sum(r.feasible for r in rows),
            "created": _dt.datetime.now(_dt.timezone.utc).isoformat(),
            "nffrecovery_version": __version__,
            "numpy_version": np.__version__,
            "python_version": platform.python_version(),
        }
        path.with_suffix(path.suffix + ".manifest.json").write_text(json.dumps(manifest, indent=2))
    return rows


# -- concentration verifiers ------------------------------------------------


@dataclass(frozen=True)
class ConcentrationProbe:
    """Deviation parameters for the three concentration events."""

    t_i: float = 0.5
    t_p: float = 0.5
    t_s: float = 0.0
    trials: int = 500

    def __post_init__(self):
        if not self.t_i > 0:
            raise ParameterError(f"t_i must be positive, got {self.t_i}")
        if not 0 < self.t_p <= 2:
            raise ParameterError(f"t_p must lie in (0, 2], got {self.t_p}")
        if not self.t_s >= 0:
            raise ParameterError(f"t_s must be non-negative, got {self.t_s}")
        if int(self.trials) != self.trials or self.trials < 1:
            raise ParameterError(f"trials must be a positive integer, got {self.trials}")


@dataclass(frozen=True)
class VerificationResult:
    """Empirical frequency of a concentration event against its bound.

    ``bound_holds`` is the one-sided check
    ``failure_rate <= epsilon + 3 * sqrt(epsilon (1 - epsilon) / trials)``.
    """

    empirical_rate: float
    failure_rate: float
    epsilon: float
    trials: int
    slack: float
    bound_holds: bool
    vacuous: bool
    threshold: float = math.nan
    attempted: int = 0


def binomial_slack(epsilon: float, trials: int) -> float:
    """Three binomial standard deviations at failure probability ``epsilon``."""
    p = min(max(epsilon, 0.0), 1.0)
    return 3.0 * math.sqrt(p * (1.0 - p) / trials)


def _result(events, epsilon, threshold=math.nan, attempted=None):
    events = np.asarray(events, dtype=bool)
    trials = int(events.size)
    if trials == 0:
        raise ParameterError("no trials satisfied the conditioning event")
    rate = float(events.mean())
    slack = binomial_slack(epsilon, trials)
    return VerificationResult(
        empirical_rate=rate,
        failure_rate=1.0 - rate,
        epsilon=float(epsilon),
        trials=trials,
        slack=slack,
        bound_holds=bool(1.0 - rate <= epsilon + slack),
        vacuous=bool(epsilon >= 1.0),
        threshold=float(threshold),
        attempted=trials if attempted is None else int(attempted),
    )


def eps_eigenvalue(t_i: float, m: int, sparsity_d: int, lambda_min: float, beta: float) -> float:
    """Failure probability of ``lambda_min(Z_D^H Z_D) >= (M/N)(lambda_min(K) - t_i)``."""
    return 2.0 * sparsity_d * math.exp(-t_i**2 * m / (2.0 * sparsity_d * lambda_min * (beta + 2.0 / 3.0)))


def eps_pinv_norm(t_p: float, m: int, n: int) -> float:
    """Failure probability of the pseudo-inverse column-norm bound."""
    return n**2 * math.exp(-t_p**2 * m / (14.0 / 3.0))


def eps_inner_product(t_s: float, m: int) -> float:
    """Failure probability of ``|z_k^H z_l| <= (M k + t_s) / N``."""
    return 2.0 * math.exp(-t_s**2 / (2.0 * m + 4.0 * t_s / 3.0))


def pinv_column_norms(z_d: np.ndarray, z_rest: np.ndarray) -> np.ndarray:
    """``||Z_D^+ z_l||_2`` for every column ``z_l`` of ``z_rest``.

    Uses ``Z_D^+ = (Z_D^H Z_D)^{-1} Z_D^H``, valid when ``Z_D`` is injective.
    """
    gram = z_d.conj().T @ z_d
    coef = np.linalg.solve(gram, z_d.conj().T @ z_rest)
    return np.linalg.norm(coef, axis=0)


def _check_support(freqs, support):
    support = np.unique(np.asarray(list(support), dtype=int))
    if support.size < 1 or support[0] < 0 or support[-1] >= freqs.n:
        raise ParameterError("support must be a nonempty set of valid frequency indices")
    return support


def _nff(x, w, n):
    return np.exp(-1j * (x @ w.T)) / np.sqrt(n)


def verify_eigenvalue_bound(dist: InputDistribution, freqs: FrequencySet, support, m: int,
                            probe: ConcentrationProbe, rng_seed=0) -> VerificationResult:
    """Empirical rate of ``lambda_min(Z_D^H Z_D) >= (M/N)(lambda_min(K) - t_i)``."""
    support = _check_support(freqs, support)
    stats = build_kernel_matrix(dist, freqs)
    if not probe.t_i < stats.lambda_min:
        raise ParameterError(f"t_i must lie in (0, lambda_min(K)={stats.lambda_min:.6g})")
    n, D = freqs.n, support.size
    w_d = freqs.freqs[support]
    threshold = (m / n) * (stats.lambda_min - probe.t_i)
    events = []
    for t in range(probe.trials):
        x = sample_inputs(m, dist, child_seed(rng_seed, t))
        z_d = _nff(x, w_d, n)
        events.append(np.linalg.eigvalsh(z_d.conj().T @ z_d)[0] >= threshold)
    eps = eps_eigenvalue(probe.t_i, m, D, stats.lambda_min, stats.beta)
    return _result(events, eps, threshold)


def verify_pinv_norm_bound(dist: InputDistribution, freqs: FrequencySet, support, m: int,
                           probe: ConcentrationProbe, rng_seed=0) -> VerificationResult:
    """Empirical rate of ``max_{l not in D} ||Z_D^+ z_l|| <= eta``.

    ``eta = sqrt(D) (t_p + k_max) / (lambda_min(K) - t_i)``.  Only trials in
    which the eigenvalue event holds are scored; ``attempted`` counts all.
    """
    support = _check_support(freqs, support)
    stats = build_kernel_matrix(dist, freqs)
    if not probe.t_i < stats.lambda_min:
        raise ParameterError(f"t_i must lie in (0, lambda_min(K)={stats.lambda_min:.6g})")
    n, D = freqs.n, support.size
    rest = np.setdiff1d(np.arange(n), support)
    if rest.size == 0:
        raise ParameterError("support must leave at least one column outside it")
    eta = math.sqrt(D) * (probe.t_p + stats.k_max) / (stats.lambda_min - probe.t_i)
    eig_threshold = (m / n) * (stats.lambda_min - probe.t_i)
    events = []
    for t in range(probe.trials):
        x = sample_inputs(m, dist, child_seed(rng_seed, t))
        z = _nff(x, freqs.freqs, n)
        z_d = z[:, support]
        lam = np.linalg.eigvalsh(z_d.conj().T @ z_d)[0]
        if not (lam >= eig_threshold and lam > 0):
            continue
        events.append(np.max(pinv_column_norms(z_d, z[:, rest])) <= eta)
    return _result(events, eps_pinv_norm(probe.t_p, m, n), eta, attempted=probe.trials)


def verify_inner_product_bound(dist: InputDistribution, freq_pair, n: int, m: int, t_s: float,
                               trials: int, rng_seed=0, k_bound: float | None = None) -> VerificationResult:
    """Empirical rate of ``|z_k^H z_l| <= (M k_bound + t_s) / N`` for one frequency pair.

    ``k_bound`` defaults to ``|k(w_k - w_l)|``; pass ``k_max`` of the ambient
    frequency set to check the uniform version.
    """
    w_k, w_l = (np.atleast_1d(np.asarray(w, dtype=float)) for w in freq_pair)
    if np.array_equal(w_k, w_l):
        raise ParameterError("the two frequencies must differ")
    if t_s < 0:
        raise ParameterError(f"t_s must be non-negative, got {t_s}")
    if int(trials) != trials or trials < 1:
        raise ParameterError(f"trials must be a positive integer, got {trials}")
    if k_bound is None:
        k_bound = abs(kernel_value(dist, w_k - w_l))
    threshold = (m * k_bound + t_s) / n
    w = np.vstack([w_k, w_l])
    events = []
    for t in range(int(trials)):
        z = _nff(sample_inputs(m, dist, child_seed(rng_seed, t)), w, n)
        events.append(abs(np.vdot(z[:, 0], z[:, 1])) <= threshold)
    return _result(events, eps_inner_product(t_s, m), threshold)
