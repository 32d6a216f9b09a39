"""Command line entry point.

Every subcommand reads an optional JSON config (``--config``); ``--seed``
and ``--out`` override the seed and the output path.  Tables go out as CSV,
everything else as JSON.  Without ``--out`` the result is printed.

Exit codes: 0 success, 2 parameter error, 3 when every requested bound is
infeasible.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from ._seeding import child_seed
from .bounds import DEFAULT_C_PRIME, compute_mk
from .bpsolver import SolverConfig, basis_pursuit, recovery_verdict
from .exceptions import DegenerateKernelError, ParameterError, RankError
from .experiments import (
    ConcentrationProbe,
    ExperimentConfig,
    run_mse_sweep,
    run_ratio_figure,
    sweep_rows_to_csv,
    verify_eigenvalue_bound,
    verify_inner_product_bound,
    verify_pinv_norm_bound,
)
from .bounds import ratio_rows_to_csv
from .kernelspace import InputDistribution, KernelStats, build_kernel_matrix, generate_frequencies, read_frequencies_csv
from .sensing import Trial, make_nff_trial

EXIT_OK = 0
EXIT_PARAMETER = 2
EXIT_INFEASIBLE = 3


def _load_config(path):
    if path is None:
        return {}
    text = Path(path).read_text()
    cfg = json.loads(text) if text.strip() else {}
    if not isinstance(cfg, dict):
        raise ParameterError("config must be a JSON object")
    return cfg


def _pop(cfg, key, default):
    return cfg.pop(key, default)


def _reject_unknown(cfg, command):
    if cfg:
        raise ParameterError(f"unknown keys for {command}: {sorted(cfg)}")


def _emit(text: str, out):
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(out).write_text(text)


def _json(obj) -> str:
    def clean(v):
        if isinstance(v, float) and not math.isfinite(v):
            return None
        if isinstance(v, dict):
            return {k: clean(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [clean(x) for x in v]
        if isinstance(v, np.generic):
            return clean(v.item())
        return v
    return json.dumps(clean(obj), indent=2) + "\n"


def _distribution(cfg, dim):
    kind = _pop(cfg, "kind", "gaussian")
    scale = _pop(cfg, "scale", _pop(cfg, "sigma2", 1.0))
    return InputDistribution(kind, scale, dim)


def _frequencies(cfg, seed):
    path = _pop(cfg, "freqs_csv", None)
    if path is not None:
        return read_frequencies_csv(path)
    n = _pop(cfg, "n", 50)
    dim = _pop(cfg, "dim", 20)
    return generate_frequencies(n, dim, _pop(cfg, "component_variance", 1.0), child_seed(seed, 0))


def cmd_bounds(args, cfg):
    seed = args.seed if args.seed is not None else _pop(cfg, "seed", 0)
    cfg.pop("seed", None)
    D = _pop(cfg, "sparsity_d", 1)
    delta = _pop(cfg, "delta", 0.1)
    c_prime = _pop(cfg, "c_prime", DEFAULT_C_PRIME)
    if _pop(cfg, "identity", False):
        n = _pop(cfg, "n", 1000)
        stats = KernelStats.identity(n)
    else:
        freqs = _frequencies(cfg, seed)
        stats = build_kernel_matrix(_distribution(cfg, freqs.dim), freqs)
        n = freqs.n
    _reject_unknown(cfg, "bounds")
    report = compute_mk(stats, n, D, delta, c_prime)
    _emit(_json(report.to_dict()), args.out)
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def cmd_ratio_curve(args, cfg):
    seed = args.seed if args.seed is not None else _pop(cfg, "seed", 0)
    cfg.pop("seed", None)
    kw = dict(
        dims=_pop(cfg, "dims", [10, 20, 40, 60, 80, 100]),
        sparsities=_pop(cfg, "sparsities", [1, 5, 10, 20]),
        n=_pop(cfg, "n", 1000),
        sigma2=_pop(cfg, "sigma2", 1.0),
        delta=_pop(cfg, "delta", 0.1),
        component_variance=_pop(cfg, "component_variance", 1.0),
        c_prime=_pop(cfg, "c_prime", DEFAULT_C_PRIME),
    )
    _reject_unknown(cfg, "ratio-curve")
    rows = run_ratio_figure(master_seed=seed, output_path=args.out, **kw)
    if args.out is None:
        _emit(ratio_rows_to_csv(rows), None)
    return EXIT_OK if any(r.feasible for r in rows) else EXIT_INFEASIBLE


def cmd_make_trial(args, cfg):
    seed = args.seed if args.seed is not None else _pop(cfg, "seed", 0)
    cfg.pop("seed", None)
    m = _pop(cfg, "m", 20)
    D = _pop(cfg, "sparsity_d", 2)
    sign_model = _pop(cfg, "sign_model", "uniform_positive")
    freqs = _frequencies(cfg, seed)
    dist = _distribution(cfg, freqs.dim)
    _reject_unknown(cfg, "make-trial")
    trial = make_nff_trial(freqs, dist, m, D, sign_model, child_seed(seed, 1))
    _emit(json.dumps(trial.to_dict()), args.out)
    return EXIT_OK


def cmd_recover(args, cfg):
    trial_path = args.trial or _pop(cfg, "trial", None)
    cfg.pop("trial", None)
    if trial_path is None:
        raise ParameterError("recover needs a trial JSON (--trial or config key 'trial')")
    domain = _pop(cfg, "domain", "complex")
    rel_tol = _pop(cfg, "rel_tol", 1e-5)
    solver = SolverConfig(**_pop(cfg, "solver", {}))
    _reject_unknown(cfg, "recover")
    trial = Trial.load(trial_path)
    result = basis_pursuit(trial.z, trial.y, solver, domain=domain)
    verdict = recovery_verdict(result, trial.truth, rel_tol)
    out = result.to_dict()
    out["verdict"] = verdict._asdict()
    _emit(_json(out), args.out)
    return EXIT_OK


def cmd_mse_sweep(args, cfg):
    if args.seed is not None:
        cfg["master_seed"] = args.seed
    if args.out is not None:
        cfg["output_path"] = args.out
    for key in ("m_values", "d_sweep"):
        if key in cfg:
            cfg[key] = tuple(cfg[key])
    config = ExperimentConfig.from_dict(cfg)
    rows = run_mse_sweep(config)
    if config.output_path is None:
        _emit(sweep_rows_to_csv(rows), None)
    return EXIT_OK


def _verify_setup(cfg, seed):
    freqs = _frequencies(cfg, seed)
    dist = _distribution(cfg, freqs.dim)
    support = _pop(cfg, "support", None)
    if support is None:
        support = list(range(_pop(cfg, "sparsity_d", 3)))
    cfg.pop("sparsity_d", None)
    m = _pop(cfg, "m", 2000)
    stats = build_kernel_matrix(dist, freqs)
    t_i = _pop(cfg, "t_i", None)
    if t_i is None:
        t_i = _pop(cfg, "t_i_fraction", 0.5) * stats.lambda_min
    cfg.pop("t_i_fraction", None)
    probe = ConcentrationProbe(t_i=t_i, t_p=_pop(cfg, "t_p", 0.5), t_s=_pop(cfg, "t_s", 0.0),
                               trials=_pop(cfg, "trials", 500))
    return freqs, dist, support, m, probe


def _verification_json(res, **extra):
    out = {k: getattr(res, k) for k in res.__dataclass_fields__}
    out.update(extra)
    return _json(out)


def cmd_verify_thm2(args, cfg):
    seed = args.seed if args.seed is not None else _pop(cfg, "seed", 0)
    cfg.pop("seed", None)
    freqs, dist, support, m, probe = _verify_setup(cfg, seed)
    _reject_unknown(cfg, "verify-thm2")
    res = verify_eigenvalue_bound(dist, freqs, support, m, probe, child_seed(seed, 2))
    _emit(_verification_json(res, event="eigenvalue", t_i=probe.t_i, m=m), args.out)
    return EXIT_OK


def cmd_verify_thm3(args, cfg):
    seed = args.seed if args.seed is not None else _pop(cfg, "seed", 0)
    cfg.pop("seed", None)
    freqs, dist, support, m, probe = _verify_setup(cfg, seed)
    _reject_unknown(cfg, "verify-thm3")
    res = verify_pinv_norm_bound(dist, freqs, support, m, probe, child_seed(seed, 3))
    _emit(_verification_json(res, event="pinv_norm", t_i=probe.t_i, t_p=probe.t_p, m=m), args.out)
    return EXIT_OK


def cmd_verify_lemma3(args, cfg):
    seed = args.seed if args.seed is not None else _pop(cfg, "seed", 0)
    cfg.pop("seed", None)
    dim = _pop(cfg, "dim", 10)
    dist = _distribution(cfg, dim)
    pair = _pop(cfg, "freq_pair", None)
    if pair is None:
        pair = generate_frequencies(2, dim, _pop(cfg, "component_variance", 1.0), child_seed(seed, 0)).freqs
    cfg.pop("component_variance", None)
    m = _pop(cfg, "m", 500)
    t_s = _pop(cfg, "t_s", 3.0 * math.sqrt(m))
    kw = dict(n=_pop(cfg, "n", 500), m=m, t_s=t_s, trials=_pop(cfg, "trials", 10_000),
              k_bound=_pop(cfg, "k_bound", None))
    _reject_unknown(cfg, "verify-lemma3")
    res = verify_inner_product_bound(dist, pair, rng_seed=child_seed(seed, 4), **kw)
    _emit(_verification_json(res, event="inner_product", t_s=t_s, m=m), args.out)
    return EXIT_OK


COMMANDS = {
    "bounds": (cmd_bounds, "sample-count bounds for one kernel, as JSON"),
    "ratio-curve": (cmd_ratio_curve, "M_k / M_f over input dimension, as CSV plus manifest"),
    "make-trial": (cmd_make_trial, "draw one NFF recovery trial, as JSON"),
    "recover": (cmd_recover, "solve basis pursuit for a trial JSON"),
    "mse-sweep": (cmd_mse_sweep, "recovery MSE versus sparsity, as CSV"),
    "verify-thm2": (cmd_verify_thm2, "empirical check of the Gram eigenvalue bound"),
    "verify-thm3": (cmd_verify_thm3, "empirical check of the pseudo-inverse norm bound"),
    "verify-lemma3": (cmd_verify_lemma3, "empirical check of the inner-product bound"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nffrecovery", description="Sparse recovery with nonlinear Fourier features.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, help="master seed override")
        p.add_argument("--out", help="output path (default: stdout)")
        if name == "recover":
            p.add_argument("--trial", help="trial JSON written by make-trial")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    func, _ = COMMANDS[args.command]
    try:
        cfg = _load_config(args.config)
        return func(args, cfg)
    except (ParameterError, DegenerateKernelError, RankError, TypeError, json.JSONDecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMETER


if __name__ == "__main__":
    sys.exit(main())
