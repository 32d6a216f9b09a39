"""Sparse ground truth, input sampling and measurement matrices.

Two measurement models share the :class:`FeatureMatrix` container:

* NFF: ``Z[i, k] = exp(-1j * x_i^T w_k) / sqrt(N)`` for random inputs ``x_i``;
* partial DFT: ``M`` distinct rows of the unitary ``N``-point DFT matrix.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._seeding import as_seed_sequence
from .exceptions import ParameterError
from .kernelspace import FrequencySet, InputDistribution

__all__ = [
    "SIGN_MODELS",
    "SparseModel",
    "FeatureMatrix",
    "Trial",
    "generate_sparse_model",
    "sample_inputs",
    "build_nff_matrix",
    "synthesize_observations",
    "build_partial_dft",
    "restrict_columns",
    "make_nff_trial",
]

SIGN_MODELS = ("rademacher", "steinhaus", "uniform_positive")
MAGNITUDE_MODELS = ("unit", "uniform")


def _readonly(a):
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class SparseModel:
    theta_bar: np.ndarray
    support: tuple
    sign_model: str

    def __post_init__(self):
        theta = np.asarray(self.theta_bar, dtype=complex)
        support = tuple(sorted(int(i) for i in self.support))
        if len(set(support)) != len(support):
            raise ParameterError("support indices must be distinct")
        if support and (support[0] < 0 or support[-1] >= theta.size):
            raise ParameterError("support index out of range")
        off = np.ones(theta.size, dtype=bool)
        off[list(support)] = False
        if np.any(theta[off] != 0):
            raise ParameterError("theta_bar must vanish off the support")
        object.__setattr__(self, "theta_bar", _readonly(theta))
        object.__setattr__(self, "support", support)

    @property
    def n(self) -> int:
        return self.theta_bar.size

    @property
    def sparsity(self) -> int:
        return len(self.support)


def generate_sparse_model(n: int, sparsity_d: int, sign_model: str = "rademacher",
                          magnitude_model: str | None = None, rng_seed=None) -> SparseModel:
    """Random D-sparse coefficient vector with a uniformly chosen support.

    ``magnitude_model`` defaults to ``"unit"`` for Rademacher/Steinhaus signs
    and ``"uniform"`` (i.i.d. U[0, 1]) for ``"uniform_positive"``.
    """
    sign_model = sign_model.lower()
    if sign_model not in SIGN_MODELS:
        raise ParameterError(f"unknown sign model {sign_model!r}; expected one of {SIGN_MODELS}")
    if magnitude_model is None:
        magnitude_model = "uniform" if sign_model == "uniform_positive" else "unit"
    if magnitude_model not in MAGNITUDE_MODELS:
        raise ParameterError(f"unknown magnitude model {magnitude_model!r}")
    if int(n) != n or n < 1:
        raise ParameterError(f"n must be a positive integer, got {n}")
    if int(sparsity_d) != sparsity_d or not 1 <= sparsity_d <= n:
        raise ParameterError(f"sparsity must satisfy 1 <= D <= N, got D={sparsity_d}, N={n}")
    rng = np.random.default_rng(rng_seed)
    D = int(sparsity_d)
    support = np.sort(rng.choice(int(n), size=D, replace=False))
    if magnitude_model == "unit":
        mags = np.ones(D)
    else:
        mags = rng.uniform(0.0, 1.0, size=D)
    if sign_model == "rademacher":
        signs = rng.choice([-1.0, 1.0], size=D)
    elif sign_model == "steinhaus":
        signs = np.exp(2j * np.pi * rng.uniform(0.0, 1.0, size=D))
    else:
        signs = np.ones(D)
    theta = np.zeros(int(n), dtype=complex)
    theta[support] = mags * signs
    return SparseModel(theta, tuple(support), sign_model)


def sample_inputs(m: int, dist: InputDistribution, rng_seed=None) -> np.ndarray:
    """``m`` i.i.d. input rows from ``dist`` as an (m, d) array."""
    if int(m) != m or m < 1:
        raise ParameterError(f"m must be a positive integer, got {m}")
    return dist.sample(int(m), np.random.default_rng(rng_seed))


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """An M x N measurement matrix plus what it was built from.

    ``kind`` is ``"nff"`` (``inputs`` and ``freqs`` set) or ``"partial_dft"``
    (``rows`` set, zero-based).
    """

    entries: np.ndarray
    kind: str
    inputs: np.ndarray | None = None
    freqs: FrequencySet | None = None
    rows: tuple | None = field(default=None)

    @property
    def shape(self):
        return self.entries.shape

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    @property
    def n(self) -> int:
        return self.entries.shape[1]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def build_nff_matrix(inputs, freqs: FrequencySet) -> FeatureMatrix:
    X = np.atleast_2d(np.asarray(inputs, dtype=float))
    if X.shape[1] != freqs.dim:
        raise ParameterError(f"inputs have dimension {X.shape[1]} but frequencies have {freqs.dim}")
    Z = np.exp(-1j * (X @ freqs.freqs.T)) / np.sqrt(freqs.n)
    return FeatureMatrix(_readonly(Z), "nff", inputs=_readonly(X), freqs=freqs)


def dft_matrix(n: int) -> np.ndarray:
    """Unitary DFT matrix ``F[t, k] = exp(-2j pi t k / n) / sqrt(n)`` (zero-based)."""
    t = np.arange(n)
    # reduce t*k mod n first so large n keeps full phase accuracy
    return np.exp(-2j * np.pi * (np.outer(t, t) % n) / n) / np.sqrt(n)


def build_partial_dft(n: int, m: int, rng_seed=None) -> FeatureMatrix:
    """``m`` distinct rows of the unitary ``n``-point DFT, chosen uniformly at random."""
    if int(n) != n or n < 1:
        raise ParameterError(f"n must be a positive integer, got {n}")
    if int(m) != m or not 1 <= m <= n:
        raise ParameterError(f"m must satisfy 1 <= m <= n, got m={m}, n={n}")
    rng = np.random.default_rng(rng_seed)
    rows = np.sort(rng.choice(int(n), size=int(m), replace=False))
    return partial_dft_from_rows(n, rows)


def partial_dft_from_rows(n: int, rows) -> FeatureMatrix:
    rows = np.asarray(rows, dtype=int)
    if len(np.unique(rows)) != len(rows) or rows.min() < 0 or rows.max() >= n:
        raise ParameterError("DFT rows must be distinct indices in [0, n)")
    k = np.arange(n)
    F = np.exp(-2j * np.pi * (np.outer(rows, k) % n) / n) / np.sqrt(n)
    return FeatureMatrix(_readonly(F), "partial_dft", rows=tuple(int(r) for r in rows))


def synthesize_observations(z: FeatureMatrix, model: SparseModel) -> np.ndarray:
    """Noiseless observations ``y = Z theta_bar``."""
    if z.n != model.n:
        raise ParameterError(f"feature matrix has {z.n} columns but theta_bar has length {model.n}")
    return z.entries @ model.theta_bar


def restrict_columns(z: FeatureMatrix, support) -> np.ndarray:
    """Columns of ``Z`` indexed by ``support``, in ascending index order."""
    idx = np.sort(np.asarray(list(support), dtype=int))
    if idx.size and (idx[0] < 0 or idx[-1] >= z.n):
        raise ParameterError("support index out of range")
    return z.entries[:, idx]


def _cplx_to_json(a):
    a = np.asarray(a, dtype=complex)
    return {"re": a.real.tolist(), "im": a.imag.tolist()}


def _cplx_from_json(obj):
    return np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)


@dataclass(frozen=True, eq=False)
class Trial:
    """One noiseless recovery instance, serialisable to a single JSON document."""

    z: FeatureMatrix
    y: np.ndarray
    truth: SparseModel
    seeds: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "kind": self.z.kind,
            "n": self.z.n,
            "m": self.z.m,
            "y": _cplx_to_json(self.y),
            "theta_bar": _cplx_to_json(self.truth.theta_bar),
            "support": list(self.truth.support),
            "sign_model": self.truth.sign_model,
            "seeds": dict(self.seeds),
        }
        if self.z.kind == "nff":
            out["inputs"] = self.z.inputs.tolist()
            out["freqs"] = self.z.freqs.freqs.tolist()
        else:
            out["rows"] = list(self.z.rows)
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "Trial":
        if obj["kind"] == "nff":
            z = build_nff_matrix(np.asarray(obj["inputs"], dtype=float), FrequencySet(np.asarray(obj["freqs"])))
        elif obj["kind"] == "partial_dft":
            z = partial_dft_from_rows(int(obj["n"]), obj["rows"])
        else:
            raise ParameterError(f"unknown feature matrix kind {obj['kind']!r}")
        truth = SparseModel(_cplx_from_json(obj["theta_bar"]), obj["support"], obj.get("sign_model", "rademacher"))
        return cls(z, _cplx_from_json(obj["y"]), truth, dict(obj.get("seeds", {})))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "Trial":
        return cls.from_dict(json.loads(Path(path).read_text()))


def make_nff_trial(freqs: FrequencySet, dist: InputDistribution, m: int, sparsity_d: int,
                   sign_model: str = "uniform_positive", rng_seed=None) -> Trial:
    """Fresh ground truth, inputs and observations for a fixed frequency set."""
    ss = as_seed_sequence(rng_seed)
    model_ss, input_ss = ss.spawn(2)
    truth = generate_sparse_model(freqs.n, sparsity_d, sign_model, rng_seed=model_ss)
    z = build_nff_matrix(sample_inputs(m, dist, input_ss), freqs)
    seeds = {"entropy": str(ss.entropy), "spawn_key": list(ss.spawn_key)}
    return Trial(z, synthesize_observations(z, truth), truth, seeds)
