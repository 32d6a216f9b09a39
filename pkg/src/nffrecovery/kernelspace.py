"""Frequency dictionaries, shift-invariant kernels and kernel matrices.

The kernel associated with an input distribution ``p(x)`` is its
characteristic function::

    k(dw) = E[exp(-1j * x^T dw)],   x ~ p

so a frequency set ``Omega`` induces the N x N kernel matrix
``K[i, j] = k(w_i - w_j)``.  Its extreme eigenvalues, condition number and
largest off-diagonal magnitude drive the sample-complexity bounds in
:mod:`nffrecovery.bounds`.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy import sparse
from scipy.spatial.distance import pdist, squareform

from ._seeding import as_seed_sequence
from .exceptions import DegenerateKernelError, ParameterError

__all__ = [
    "FrequencySet",
    "InputDistribution",
    "KernelStats",
    "KernelCheck",
    "generate_frequencies",
    "kernel_value",
    "build_kernel_matrix",
    "empirical_kernel_check",
    "read_frequencies_csv",
    "write_frequencies_csv",
]

DISTRIBUTION_KINDS = ("gaussian", "laplace", "cauchy")

# K is declared degenerate when lambda_min <= PD_RTOL * lambda_max.
PD_RTOL = 1e-10

# Sample-loop chunk for the Monte Carlo kernel estimate.
_CHUNK = 100_000


@dataclass(frozen=True)
class FrequencySet:
    """N distinct frequency vectors of dimension d, stored as an (N, d) array."""

    freqs: np.ndarray

    def __post_init__(self):
        freqs = np.array(self.freqs, dtype=float, copy=True)
        if freqs.ndim == 1:
            freqs = freqs[:, None]
        if freqs.ndim != 2 or freqs.shape[0] < 1 or freqs.shape[1] < 1:
            raise ParameterError(f"frequencies must be a nonempty (N, d) array, got shape {freqs.shape}")
        if not np.all(np.isfinite(freqs)):
            raise ParameterError("frequencies must be finite")
        if len(np.unique(freqs, axis=0)) != len(freqs):
            raise ParameterError("frequencies must be pairwise distinct")
        freqs.flags.writeable = False
        object.__setattr__(self, "freqs", freqs)

    @property
    def n(self) -> int:
        return self.freqs.shape[0]

    @property
    def dim(self) -> int:
        return self.freqs.shape[1]

    def __len__(self):
        return self.n

    def subset(self, indices) -> "FrequencySet":
        return FrequencySet(self.freqs[np.asarray(indices, dtype=int)])


@dataclass(frozen=True)
class InputDistribution:
    """Symmetric, zero-centred input distribution with i.i.d. components.

    ``kind="gaussian"`` is N(0, scale * I_d), i.e. ``scale`` is the variance
    sigma^2.  For ``"laplace"`` and ``"cauchy"`` ``scale`` is the usual scale
    parameter of each component.
    """

    kind: str
    scale: float
    dim: int

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in DISTRIBUTION_KINDS:
            raise ParameterError(f"unknown distribution kind {self.kind!r}; expected one of {DISTRIBUTION_KINDS}")
        if not (np.isfinite(self.scale) and self.scale > 0):
            raise ParameterError(f"scale must be positive, got {self.scale}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ParameterError(f"dim must be a positive integer, got {self.dim}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "scale", float(self.scale))
        object.__setattr__(self, "dim", int(self.dim))

    @classmethod
    def gaussian(cls, sigma2: float, dim: int) -> "InputDistribution":
        return cls("gaussian", sigma2, dim)

    @classmethod
    def laplace(cls, scale: float, dim: int) -> "InputDistribution":
        return cls("laplace", scale, dim)

    @classmethod
    def cauchy(cls, scale: float, dim: int) -> "InputDistribution":
        return cls("cauchy", scale, dim)

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        """Draw ``size`` i.i.d. rows, returned as a (size, dim) array."""
        shape = (size, self.dim)
        if self.kind == "gaussian":
            return rng.normal(0.0, np.sqrt(self.scale), size=shape)
        if self.kind == "laplace":
            return rng.laplace(0.0, self.scale, size=shape)
        return self.scale * rng.standard_cauchy(size=shape)

    def characteristic(self, delta: np.ndarray) -> np.ndarray:
        """Evaluate the kernel along the last axis of ``delta``."""
        delta = np.asarray(delta, dtype=float)
        if self.kind == "gaussian":
            return np.exp(-0.5 * self.scale * np.sum(delta**2, axis=-1))
        if self.kind == "laplace":
            # Laplace inputs give the Cauchy kernel 1 / (1 + b^2 t^2) per component
            return np.prod(1.0 / (1.0 + (self.scale * delta) ** 2), axis=-1)
        # Cauchy inputs give the exponential kernel exp(-gamma |t|) per component
        return np.exp(-self.scale * np.sum(np.abs(delta), axis=-1))


@dataclass(frozen=True)
class KernelStats:
    """Kernel matrix with its spectral summary."""

    matrix: np.ndarray
    lambda_min: float
    lambda_max: float
    beta: float
    k_max: float
    eigenvalues: np.ndarray = field(repr=False, default=None)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def identity(cls, n: int) -> "KernelStats":
        """Exact identity kernel (the large-variance Gaussian limit).

        ``matrix`` is a sparse identity so that very large ``n`` stays cheap.
        """
        if int(n) != n or n < 1:
            raise ParameterError(f"n must be a positive integer, got {n}")
        return cls(sparse.identity(int(n), format="dia"), 1.0, 1.0, 1.0, 0.0, None)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "KernelStats":
        """Compute the spectral summary of a symmetric kernel matrix.

        Raises
        ------
        DegenerateKernelError
            If ``lambda_min <= 1e-10 * lambda_max``.
        """
        matrix = np.array(matrix, dtype=float, copy=True)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ParameterError("kernel matrix must be square")
        eig = np.linalg.eigvalsh(matrix)
        lam_min, lam_max = float(eig[0]), float(eig[-1])
        if lam_max <= 0 or lam_min <= PD_RTOL * lam_max:
            raise DegenerateKernelError(
                f"kernel matrix is not positive definite (lambda_min={lam_min:.3e}, lambda_max={lam_max:.3e})"
            )
        n = matrix.shape[0]
        if n > 1:
            k_max = float(np.max(np.abs(matrix[~np.eye(n, dtype=bool)])))
        else:
            k_max = 0.0
        matrix.flags.writeable = False
        eig.flags.writeable = False
        return cls(matrix, lam_min, lam_max, lam_max / lam_min, k_max, eig)


def generate_frequencies(n: int, dim: int, component_variance: float = 1.0,
                         rng_seed=None) -> FrequencySet:
    """Draw ``n`` i.i.d. frequencies from N(0, component_variance * I_dim).

    Any exact duplicate (a probability-zero event) is redrawn.
    """
    if int(n) != n or n < 1 or int(dim) != dim or dim < 1:
        raise ParameterError(f"n and dim must be positive integers, got n={n}, dim={dim}")
    if not (np.isfinite(component_variance) and component_variance > 0):
        raise ParameterError(f"component_variance must be positive, got {component_variance}")
    rng = np.random.default_rng(rng_seed)
    std = np.sqrt(component_variance)
    freqs = rng.normal(0.0, std, size=(int(n), int(dim)))
    while True:
        _, first = np.unique(freqs, axis=0, return_index=True)
        if len(first) == len(freqs):
            break
        dup = np.setdiff1d(np.arange(len(freqs)), first)
        freqs[dup] = rng.normal(0.0, std, size=(len(dup), int(dim)))
    return FrequencySet(freqs)


def kernel_value(dist: InputDistribution, delta_omega) -> float:
    """Kernel of ``dist`` at a single frequency difference."""
    delta = np.atleast_1d(np.asarray(delta_omega, dtype=float))
    if delta.shape != (dist.dim,):
        raise ParameterError(f"delta_omega must have shape ({dist.dim},), got {delta.shape}")
    return float(dist.characteristic(delta))


def build_kernel_matrix(dist: InputDistribution, freqs: FrequencySet) -> KernelStats:
    """Assemble ``K[i, j] = k(w_i - w_j)`` and its spectral statistics."""
    if dist.dim != freqs.dim:
        raise ParameterError(f"distribution dim {dist.dim} != frequency dim {freqs.dim}")
    w = freqs.freqs
    n = freqs.n
    if n == 1:
        return KernelStats.from_matrix(np.ones((1, 1)))
    if dist.kind == "gaussian":
        K = squareform(np.exp(-0.5 * dist.scale * pdist(w, "sqeuclidean")))
    elif dist.kind == "cauchy":
        K = squareform(np.exp(-dist.scale * pdist(w, "cityblock")))
    else:
        log_k = np.zeros(n * (n - 1) // 2)
        for c in range(w.shape[1]):
            log_k -= np.log1p((dist.scale * pdist(w[:, c:c + 1], "euclidean")) ** 2)
        K = squareform(np.exp(log_k))
    np.fill_diagonal(K, 1.0)
    return KernelStats.from_matrix(K)


class KernelCheck(NamedTuple):
    estimate: complex
    abs_error: float
    std_error: float


def empirical_kernel_check(dist: InputDistribution, delta_omega, n_samples: int,
                           rng_seed=None) -> KernelCheck:
    """Monte Carlo estimate of ``E[exp(-1j x^T dw)]`` compared against the closed form.

    The sample loop runs in fixed-size chunks, each with its own child stream
    spawned from ``rng_seed``, so the estimate depends only on the seed and
    ``n_samples``.  ``std_error`` is the standard error of the complex mean,
    i.e. ``sqrt(var(Re) + var(Im)) / sqrt(n)``.
    """
    delta = np.atleast_1d(np.asarray(delta_omega, dtype=float))
    if delta.shape != (dist.dim,):
        raise ParameterError(f"delta_omega must have shape ({dist.dim},), got {delta.shape}")
    if int(n_samples) != n_samples or n_samples < 1:
        raise ParameterError(f"n_samples must be a positive integer, got {n_samples}")
    n_samples = int(n_samples)
    n_chunks = -(-n_samples // _CHUNK)
    streams = as_seed_sequence(rng_seed).spawn(n_chunks)
    total = 0j
    total_sq = 0.0
    remaining = n_samples
    for ss in streams:
        size = min(_CHUNK, remaining)
        remaining -= size
        x = dist.sample(size, np.random.default_rng(ss))
        phase = np.exp(-1j * (x @ delta))
        total += phase.sum()
        # |phase|^2 = 1 exactly, so E|.|^2 needs no accumulation
        total_sq += size
    mean = total / n_samples
    var = max(total_sq / n_samples - abs(mean) ** 2, 0.0)
    std_error = np.sqrt(var / n_samples)
    return KernelCheck(complex(mean), float(abs(mean - kernel_value(dist, delta))), float(std_error))


def write_frequencies_csv(freqs: FrequencySet, path) -> None:
    """Write one frequency per row under the header ``w1,...,wd``."""
    with open(Path(path), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"w{i + 1}" for i in range(freqs.dim)])
        for row in freqs.freqs:
            writer.writerow([repr(float(v)) for v in row])


def read_frequencies_csv(path) -> FrequencySet:
    with open(Path(path), newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        expected = [f"w{i + 1}" for i in range(len(header))]
        if header != expected:
            raise ParameterError(f"bad frequency CSV header {header!r}; expected {expected!r}")
        rows = [[float(v) for v in row] for row in reader if row]
    if not rows:
        raise ParameterError("frequency CSV contains no rows")
    return FrequencySet(np.array(rows))
