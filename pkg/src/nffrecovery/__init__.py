"""Sparse recovery under random nonlinear Fourier features.

Submodules
----------
kernelspace
    Frequency sets, input distributions and kernel matrices.
bounds
    Sufficient sample counts and their feasibility conditions.
sensing
    Sparse ground truths, NFF and partial-DFT feature matrices, trials.
bpsolver
    Basis pursuit by ADMM and the recovery verdict.
experiments
    Seeded Monte Carlo harnesses and concentration verifiers.
"""

__version__ = "0.1.0"

from .exceptions import DegenerateKernelError, ParameterError, RankError  # noqa: E402
from .kernelspace import (  # noqa: E402
    FrequencySet,
    InputDistribution,
    KernelStats,
    build_kernel_matrix,
    empirical_kernel_check,
    generate_frequencies,
    kernel_value,
)
from .bounds import BoundReport, compute_mf, compute_mk, compute_mk_gaussian_limit, ratio_curve  # noqa: E402
from .sensing import (  # noqa: E402
    FeatureMatrix,
    SparseModel,
    Trial,
    build_nff_matrix,
    build_partial_dft,
    generate_sparse_model,
    make_nff_trial,
    sample_inputs,
    synthesize_observations,
)
from .bpsolver import SolverConfig, SolverResult, basis_pursuit, recovery_verdict  # noqa: E402
from .experiments import (  # noqa: E402
    ConcentrationProbe,
    ExperimentConfig,
    run_mse_sweep,
    run_ratio_figure,
    verify_eigenvalue_bound,
    verify_inner_product_bound,
    verify_pinv_norm_bound,
)

__all__ = [
    "ParameterError", "DegenerateKernelError", "RankError",
    "FrequencySet", "InputDistribution", "KernelStats", "build_kernel_matrix", "empirical_kernel_check",
    "generate_frequencies", "kernel_value",
    "BoundReport", "compute_mf", "compute_mk", "compute_mk_gaussian_limit", "ratio_curve",
    "FeatureMatrix", "SparseModel", "Trial", "build_nff_matrix", "build_partial_dft", "generate_sparse_model",
    "make_nff_trial", "sample_inputs", "synthesize_observations",
    "SolverConfig", "SolverResult", "basis_pursuit", "recovery_verdict",
    "ConcentrationProbe", "ExperimentConfig", "run_mse_sweep", "run_ratio_figure",
    "verify_eigenvalue_bound", "verify_inner_product_bound", "verify_pinv_norm_bound",
]
