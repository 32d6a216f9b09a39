import json
import math

import numpy as np
import pytest

from nffrecovery import (
    ConcentrationProbe,
    ExperimentConfig,
    InputDistribution,
    ParameterError,
    SolverConfig,
    build_kernel_matrix,
    compute_mf,
    compute_mk_gaussian_limit,
    generate_frequencies,
    kernel_value,
    run_mse_sweep,
    run_ratio_figure,
    verify_eigenvalue_bound,
    verify_inner_product_bound,
    verify_pinv_norm_bound,
)
from nffrecovery.experiments import (
    binomial_slack,
    eps_eigenvalue,
    eps_inner_product,
    eps_pinv_norm,
    pinv_column_norms,
    sweep_rows_to_csv,
)


def small_config(**kw):
    base = dict(n=60, dim=10, m_values=(20,), d_sweep=(2, 4), trials=4, master_seed=3)
    base.update(kw)
    return ExperimentConfig(**base)


@pytest.mark.parametrize("kw", [
    {"trials": 0}, {"m_values": ()}, {"d_sweep": ()}, {"d_sweep": (61,)}, {"m_values": (0,)},
    {"sign_model": "gaussian"}, {"domain": "quaternion"}, {"delta": 1.0}, {"rel_tol": 0.0},
    {"sign_model": "steinhaus", "domain": "real"},
])
def test_config_validation(kw):
    with pytest.raises(ParameterError):
        small_config(**kw)


def test_config_dict_round_trip():
    cfg = small_config(solver=SolverConfig(max_iters=77))
    again = ExperimentConfig.from_dict(cfg.to_dict())
    assert again == cfg
    with pytest.raises(ParameterError):
        ExperimentConfig.from_dict({"bogus": 1})


def test_published_defaults():
    cfg = ExperimentConfig()
    assert (cfg.n, cfg.dim, cfg.sigma2, cfg.trials) == (500, 20, 1.0, 50)
    assert cfg.m_values == (100, 200) and cfg.d_sweep == tuple(range(10, 121, 10))
    assert cfg.sign_model == "uniform_positive"


def test_square_support_only_dictionary_is_exact():
    cfg = ExperimentConfig(n=12, dim=20, m_values=(12,), d_sweep=(12,), trials=3, domain="complex")
    (row,) = run_mse_sweep(cfg)
    assert row.success_rate == 1.0
    assert row.mean_sq_error < 1e-20


def test_trial_accounting_is_conserved():
    rows = run_mse_sweep(small_config())
    for r in rows:
        assert r.successes + r.failures + r.nonconverged == r.trials == 4
    starved = run_mse_sweep(small_config(solver=SolverConfig(max_iters=2, polish_every=0)))
    assert all(r.nonconverged == r.trials and r.successes == 0 for r in starved)
    assert all(math.isfinite(r.mean_sq_error) for r in starved)


def test_sweep_is_deterministic_and_seed_isolated():
    a_rows, a = run_mse_sweep(small_config(), return_records=True)
    b_rows, b = run_mse_sweep(small_config(), return_records=True)
    assert sweep_rows_to_csv(a_rows) == sweep_rows_to_csv(b_rows)
    _, longer = run_mse_sweep(small_config(trials=6), return_records=True)
    by_key = {(r.m, r.sparsity_d, r.trial): r for r in longer}
    for r in a:
        assert by_key[(r.m, r.sparsity_d, r.trial)] == r
    _, other = run_mse_sweep(small_config(master_seed=4), return_records=True)
    assert [r.sq_error for r in other] != [r.sq_error for r in a]


def test_parallel_sweep_matches_serial():
    cfg = small_config(trials=3)
    serial = sweep_rows_to_csv(run_mse_sweep(cfg))
    parallel = sweep_rows_to_csv(run_mse_sweep(small_config(trials=3, workers=2)))
    assert serial == parallel


def test_sweep_csv_layout(tmp_path):
    out = tmp_path / "sweep.csv"
    rows = run_mse_sweep(small_config(output_path=str(out)))
    lines = out.read_text().splitlines()
    assert lines[0] == "M,D,mse,success_rate,successes,failures,nonconverged,trials"
    assert [tuple(l.split(",")[:2]) for l in lines[1:]] == [("20", "2"), ("20", "4")]
    assert out.read_text() == sweep_rows_to_csv(rows)


def test_complex_domain_needs_more_samples_than_real_domain():
    # a complex program has twice the unknowns per coefficient, so at the
    # same M it stops recovering real coefficients at a smaller D
    kw = dict(n=150, dim=20, m_values=(40,), d_sweep=(20,), trials=6, master_seed=1)
    real = run_mse_sweep(ExperimentConfig(domain="real", **kw))[0]
    cplx = run_mse_sweep(ExperimentConfig(domain="complex", **kw))[0]
    assert real.success_rate == 1.0
    assert cplx.success_rate == 0.0


# -- concentration ---------------------------------------------------------------


def test_eps_eigenvalue_inversion():
    lam, beta, D = 0.9, 1.3, 4
    t = lam / 2
    m = math.log(2 * D * 10) * 2 * D * lam * (beta + 2 / 3) / t**2
    assert eps_eigenvalue(t, m, D, lam, beta) == pytest.approx(0.1, rel=1e-14)


def test_eps_formulas():
    assert eps_pinv_norm(1.0, 14 / 3, 3) == pytest.approx(9 * math.exp(-1), rel=1e-15)
    assert eps_inner_product(0.0, 100) == 2.0
    assert eps_inner_product(6.0, 5) == pytest.approx(2 * math.exp(-36 / 18), rel=1e-15)
    assert binomial_slack(0.1, 900) == pytest.approx(0.03, rel=1e-14)
    assert binomial_slack(2.0, 10) == 0.0


@pytest.mark.parametrize("kw", [{"t_i": 0.0}, {"t_p": 0.0}, {"t_p": 2.5}, {"t_s": -1.0}, {"trials": 0}])
def test_probe_validation(kw):
    with pytest.raises(ParameterError):
        ConcentrationProbe(**kw)


@pytest.fixture(scope="module")
def thm_setup():
    dist = InputDistribution.gaussian(1.0, 20)
    freqs = generate_frequencies(50, 20, rng_seed=8)
    return dist, freqs, build_kernel_matrix(dist, freqs)


def test_eigenvalue_probe_above_lambda_min_rejected(thm_setup):
    dist, freqs, stats = thm_setup
    probe = ConcentrationProbe(t_i=stats.lambda_min * 1.01, trials=5)
    with pytest.raises(ParameterError):
        verify_eigenvalue_bound(dist, freqs, [0, 1], 100, probe)
    with pytest.raises(ParameterError):
        verify_pinv_norm_bound(dist, freqs, [0, 1], 100, probe)


def test_eigenvalue_event_trivial_near_lambda_min(thm_setup):
    dist, freqs, stats = thm_setup
    probe = ConcentrationProbe(t_i=stats.lambda_min * (1 - 1e-9), trials=50)
    res = verify_eigenvalue_bound(dist, freqs, [0, 1, 2], 5000, probe, rng_seed=1)
    assert 0 < res.threshold < 1e-6
    assert res.empirical_rate == 1.0


def test_eigenvalue_bound_small_run(thm_setup):
    dist, freqs, stats = thm_setup
    probe = ConcentrationProbe(t_i=stats.lambda_min / 2, trials=100)
    res = verify_eigenvalue_bound(dist, freqs, [4, 9, 30], 2000, probe, rng_seed=2)
    assert res.epsilon == pytest.approx(eps_eigenvalue(probe.t_i, 2000, 3, stats.lambda_min, stats.beta))
    assert res.bound_holds and res.trials == 100


def test_eigenvalue_bound_can_fail_when_probe_is_tight():
    # with a dense kernel and tiny t_i the event fails often while the bound is vacuous
    dist = InputDistribution.gaussian(1.0, 2)
    freqs = generate_frequencies(6, 2, rng_seed=0)
    stats = build_kernel_matrix(dist, freqs)
    probe = ConcentrationProbe(t_i=stats.lambda_min * 1e-3, trials=200)
    res = verify_eigenvalue_bound(dist, freqs, range(6), 30, probe, rng_seed=0)
    assert res.failure_rate > 0.2 and res.vacuous and res.bound_holds


def test_pinv_single_column_formula():
    rng = np.random.default_rng(0)
    for _ in range(20):
        z1 = rng.normal(size=(7, 1)) + 1j * rng.normal(size=(7, 1))
        rest = rng.normal(size=(7, 5)) + 1j * rng.normal(size=(7, 5))
        expected = np.abs((z1.conj().T @ rest) / (z1.conj().T @ z1)).ravel()
        np.testing.assert_allclose(pinv_column_norms(z1, rest), expected, rtol=1e-12)
        direct = np.linalg.norm(np.linalg.pinv(z1) @ rest, axis=0)
        np.testing.assert_allclose(pinv_column_norms(z1, rest), direct, rtol=1e-12)


def test_pinv_bound_edge_probe(thm_setup):
    dist, freqs, stats = thm_setup
    probe = ConcentrationProbe(t_i=stats.lambda_min / 2, t_p=2.0, trials=20)
    res = verify_pinv_norm_bound(dist, freqs, [0], 500, probe, rng_seed=3)
    assert res.threshold == pytest.approx((2.0 + stats.k_max) / (stats.lambda_min / 2))
    assert res.attempted == 20 and res.bound_holds


def test_pinv_bound_small_run(thm_setup):
    dist, freqs, stats = thm_setup
    probe = ConcentrationProbe(t_i=stats.lambda_min / 2, t_p=0.5, trials=50)
    res = verify_pinv_norm_bound(dist, freqs, [1, 2, 3], 2000, probe, rng_seed=4)
    assert res.epsilon == eps_pinv_norm(0.5, 2000, 50)
    assert res.empirical_rate == 1.0 and res.bound_holds


def test_pinv_bound_rejects_full_support():
    dist = InputDistribution.gaussian(1.0, 20)
    freqs = generate_frequencies(3, 20, rng_seed=0)
    probe = ConcentrationProbe(t_i=0.1, trials=2)
    with pytest.raises(ParameterError):
        verify_pinv_norm_bound(dist, freqs, [0, 1, 2], 10, probe)


def test_inner_product_trivial_for_large_deviation():
    dist = InputDistribution.gaussian(1.0, 3)
    pair = generate_frequencies(2, 3, rng_seed=0).freqs
    res = verify_inner_product_bound(dist, pair, n=40, m=30, t_s=60.0, trials=200, rng_seed=0)
    assert res.threshold >= 30 / 40
    assert res.empirical_rate == 1.0


def test_inner_product_vacuous_at_zero_deviation():
    dist = InputDistribution.gaussian(1.0, 3)
    pair = generate_frequencies(2, 3, rng_seed=1).freqs
    res = verify_inner_product_bound(dist, pair, n=40, m=30, t_s=0.0, trials=50, rng_seed=0)
    assert res.epsilon == 2.0 and res.vacuous and res.bound_holds


def test_inner_product_default_constant_and_override():
    dist = InputDistribution.gaussian(1.0, 3)
    pair = generate_frequencies(2, 3, rng_seed=2).freqs
    k = abs(kernel_value(dist, pair[0] - pair[1]))
    res = verify_inner_product_bound(dist, pair, n=10, m=100, t_s=5.0, trials=5, rng_seed=0)
    assert res.threshold == pytest.approx((100 * k + 5.0) / 10)
    res2 = verify_inner_product_bound(dist, pair, n=10, m=100, t_s=5.0, trials=5, rng_seed=0, k_bound=0.5)
    assert res2.threshold == pytest.approx((50 + 5.0) / 10)


def test_inner_product_rejects_identical_frequencies():
    dist = InputDistribution.gaussian(1.0, 2)
    with pytest.raises(ParameterError):
        verify_inner_product_bound(dist, ([1.0, 2.0], [1.0, 2.0]), n=5, m=5, t_s=1.0, trials=5)


# -- ratio figure ----------------------------------------------------------------


def test_ratio_figure_outputs(tmp_path):
    out = tmp_path / "ratio.csv"
    rows = run_ratio_figure(dims=[2, 120], sparsities=[1, 4], n=200, master_seed=5, output_path=out)
    lines = out.read_text().splitlines()
    assert lines[0] == "d,D,M_k,M_f,ratio,feasible" and len(lines) == 5
    assert [l.endswith("false") for l in lines[1:]] == [True, True, False, False]
    manifest = json.loads((tmp_path / "ratio.csv.manifest.json").read_text())
    assert manifest["master_seed"] == 5 and manifest["parameters"]["n"] == 200
    assert manifest["rows"] == 4 and manifest["feasible_rows"] == 2 and "created" in manifest
    for r in rows[2:]:
        m_g, _ = compute_mk_gaussian_limit(200, r.D, 0.1)
        assert r.ratio == pytest.approx(m_g / compute_mf(200, r.D, 0.1), rel=1e-3)


def test_ratio_figure_single_dimension():
    rows = run_ratio_figure(dims=[50], sparsities=[3], n=100)
    assert len(rows) == 1 and rows[0].d == 50
