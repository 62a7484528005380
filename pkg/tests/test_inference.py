import numpy as np
import pytest

from factordf.datasets import AGE_COEF_INDEX, synthetic_study
from factordf.dof import DofMethod, df_naive, df_noise
from factordf.inference import (compute_direction_stats, df_totals,
                                t_statistic, response_tests,
                                variance_estimate)
from factordf.inference import test_all_responses as run_all_tests
from factordf.inference import test_response as run_one_test
from factordf.model import DatasetBundle


def test_variance_estimate_arithmetic():
    est = variance_estimate(34.0, 36, df_naive(2))
    assert est.sigma_sq_hat == pytest.approx(1.0)
    assert est.df_resid == pytest.approx(34.0)


def test_variance_estimate_exhausted_guard():
    with pytest.raises(ValueError, match="exhausted"):
        variance_estimate(10.0, 4, df_naive(4))
    with pytest.raises(ValueError, match="exhausted"):
        variance_estimate(10.0, 3, df_naive(5))


def test_variance_estimate_null_mean():
    # r = r_hat = 0, sigma^2 = 1: mean sigma_sq_hat is 1 over replicates
    rng = np.random.default_rng(55)
    n, reps = 20, 3000
    vals = np.empty(reps)
    zero_df = df_naive(0)
    for i in range(reps):
        e = rng.standard_normal(n)
        vals[i] = variance_estimate(float(e @ e), n, zero_df).sigma_sq_hat
    se = vals.std(ddof=1) / np.sqrt(reps)
    assert abs(vals.mean() - 1.0) <= 3 * se


def test_t_statistic_zero_coefficient():
    est = variance_estimate(34.0, 36, df_naive(2))
    t, df = t_statistic(0.0, 0.1, est)
    assert t == 0.0
    assert df == pytest.approx(34.0)


def test_t_statistic_guards():
    est = variance_estimate(34.0, 36, df_naive(2))
    with pytest.raises(ValueError):
        t_statistic(1.0, 0.0, est)


def classical_column_test(X, y, coef_index):
    # per-column OLS oracle built from scratch
    XtX = X.T @ X
    beta = np.linalg.solve(XtX, X.T @ y)
    resid = y - X @ beta
    df = len(y) - X.shape[1]
    sigma_sq = resid @ resid / df
    se = np.sqrt(sigma_sq * np.linalg.inv(XtX)[coef_index, coef_index])
    return beta[coef_index], se, beta[coef_index] / se, df


def test_r_hat_zero_matches_classical_regression():
    rng = np.random.default_rng(77)
    N, M, p = 12, 9, 3
    X = np.column_stack([np.ones(N), rng.standard_normal((N, p - 1))])
    Y = rng.standard_normal((N, M))
    bundle = DatasetBundle(Y, X=X)
    for j in range(M):
        got = run_one_test(bundle, j, coef_index=2, r_hat=0, method=None)
        est, se, t, df = classical_column_test(X, Y[:, j], 2)
        assert got.estimate == pytest.approx(est, abs=1e-9)
        assert got.std_error == pytest.approx(se, abs=1e-9)
        assert got.t_stat == pytest.approx(t, abs=1e-9)
        assert got.df_resid == pytest.approx(df)


def test_no_factor_df_is_n_minus_p():
    # N = 39, p = 3 gives 36 residual df with no factors
    rng = np.random.default_rng(3)
    X = np.column_stack([np.ones(39), rng.standard_normal((39, 2))])
    bundle = DatasetBundle(rng.standard_normal((39, 8)), X=X)
    res = run_one_test(bundle, 0, coef_index=1, r_hat=0, method=None)
    assert res.df_resid == pytest.approx(36.0)


@pytest.fixture(scope="module")
def contaminated():
    bundle, truth = synthetic_study(m_responses=600, seed=101)
    return bundle, truth


def test_planted_signals_gain_power(contaminated):
    bundle, truth = contaminated
    adj = run_all_tests(bundle, AGE_COEF_INDEX, r_hat=2,
                             method=DofMethod.PROPOSED)
    raw = run_all_tests(bundle, AGE_COEF_INDEX, r_hat=0, method=None)
    planted = np.nonzero(truth.signal_mask)[0]
    bigger = sum(abs(adj[j].t_stat) > abs(raw[j].t_stat) for j in planted)
    assert bigger / len(planted) >= 0.70


def test_naive_df_resid_dominates_proposed(contaminated):
    bundle, _ = contaminated
    naive = run_all_tests(bundle, AGE_COEF_INDEX, r_hat=2,
                               method=DofMethod.NAIVE)
    prop = run_all_tests(bundle, AGE_COEF_INDEX, r_hat=2,
                              method=DofMethod.PROPOSED)
    for a, b in zip(naive, prop):
        assert a.df_resid >= b.df_resid - 1e-12


def test_response_scale_equivariance(contaminated):
    bundle, _ = contaminated
    scaled = DatasetBundle(3.0 * bundle.Y, bundle.X, bundle.Z,
                           row_ids=bundle.row_ids, col_ids=bundle.col_ids)
    a = run_one_test(bundle, 5, AGE_COEF_INDEX, 2, DofMethod.PROPOSED)
    b = run_one_test(scaled, 5, AGE_COEF_INDEX, 2, DofMethod.PROPOSED)
    assert b.estimate == pytest.approx(3.0 * a.estimate, rel=1e-10)
    assert b.std_error == pytest.approx(3.0 * a.std_error, rel=1e-10)
    assert b.t_stat == pytest.approx(a.t_stat, rel=1e-10)
    assert b.df_resid == pytest.approx(a.df_resid, rel=1e-10)
    assert b.p_value == pytest.approx(a.p_value, rel=1e-8, abs=1e-12)


def test_direction_scale_invariance_in_formulas():
    # all formulas use ratios in s: scaling rss by c^2 and the coefficient by c
    # leaves t and p unchanged
    dof = df_noise(30, 300, 2)
    base = variance_estimate(25.0, 30, dof)
    scaled = variance_estimate(4.0 * 25.0, 30, dof)
    t1, df1 = t_statistic(1.3, 0.05, base)
    t2, df2 = t_statistic(2.6, 0.05, scaled)
    assert t1 == pytest.approx(t2, rel=1e-12)
    assert df1 == df2


def test_mandel_requires_seed(contaminated):
    bundle, _ = contaminated
    with pytest.raises(ValueError):
        run_all_tests(bundle, AGE_COEF_INDEX, r_hat=2,
                           method=DofMethod.MANDEL, seed=None)


def test_df_totals_per_method(contaminated):
    bundle, _ = contaminated
    stats = compute_direction_stats(bundle, 2)
    n, m = stats.n, stats.m
    prop = df_totals(stats, DofMethod.PROPOSED)
    assert np.all(prop >= 2 * (1 + np.sqrt(n / m)) ** 2 - 1e-12)
    naive = df_totals(stats, DofMethod.NAIVE)
    np.testing.assert_allclose(naive, 2.0)
    gollob = df_totals(stats, DofMethod.GOLLOB)
    assert np.all(gollob == gollob[0])


def test_response_tests_exhaustion_guard():
    rng = np.random.default_rng(12)
    N, M = 8, 40
    X = np.column_stack([np.ones(N), rng.standard_normal(N)])
    # single dominant factor aligned with one response direction
    u = rng.standard_normal(N)
    Y = 0.01 * rng.standard_normal((N, M))
    Y[:, 0] += 50 * u
    bundle = DatasetBundle(Y, X=X)
    stats = compute_direction_stats(bundle, 1)
    df_tot = df_totals(stats, DofMethod.PROPOSED)
    if np.any(stats.n - df_tot <= 0):
        with pytest.raises(ValueError, match="exhausted"):
            response_tests(stats, 1, df_tot)


def test_requires_row_covariates():
    bundle = DatasetBundle(np.random.default_rng(0).standard_normal((6, 7)))
    with pytest.raises(ValueError, match="requires X"):
        compute_direction_stats(bundle, 0)
