"""Direction-wise variance estimation and t tests with df adjustment.

The per-response pipeline works in full coordinates: the factor truncation of
the doubly projected residual matrix equals the reduced-model truncation
rotated back, so no explicit complement bases are materialized.  A single
``DirectionStats`` holds everything the tests need for all responses at once;
the degrees-of-freedom schemes then differ only in arithmetic on top of it.
"""

from dataclasses import dataclass

import numpy as np

from . import dof as dof_mod
from .distributions import t_sf
from .dof import DofEstimate, DofMethod
from .model import DatasetBundle, fit_two_sided


@dataclass(frozen=True)
class VarianceEstimate:
    """Direction-wise error variance rss / (n - df)."""

    sigma_sq_hat: float
    rss: float
    df_used: float
    df_resid: float


@dataclass(frozen=True)
class TestResult:
    response_id: str
    estimate: float
    std_error: float
    t_stat: float
    df_resid: float
    p_value: float
    df_method: DofMethod | None


def variance_estimate(rss: float, n: int, dof: DofEstimate) -> VarianceEstimate:
    """Unbiased variance along a direction given its degrees of freedom."""
    if rss < 0:
        raise ValueError("rss must be nonnegative")
    df_resid = n - dof.total
    if df_resid <= 0:
        raise ValueError(
            f"degrees of freedom exhausted: n = {n}, df(s) = {dof.total:.4f}")
    return VarianceEstimate(rss / df_resid, rss, dof.total, df_resid)


def t_statistic(coef: float, contrast_var: float,
                var_est: VarianceEstimate) -> tuple[float, float]:
    """t = coef / sqrt(sigma_sq_hat * contrast_var), df carried alongside."""
    if contrast_var <= 0:
        raise ValueError("contrast variance must be positive")
    se = np.sqrt(var_est.sigma_sq_hat * contrast_var)
    return float(coef / se), float(var_est.df_resid)


@dataclass(frozen=True)
class DirectionStats:
    """Vectorized per-response quantities shared by every df scheme.

    For each response j with direction s_j = (I - H_Z) e_j this stores the
    identifiable coefficient components B_hat' s_j, the squared norms s_j's_j,
    the squared factor-loading projections (w_k)_j^2 / s_j's_j, and the
    adjusted residual sums of squares.
    """

    estimates: np.ndarray      # (p, M) columns are B_hat' s_j
    s_normsq: np.ndarray       # (M,)
    proj_sq: np.ndarray        # (M, r_hat)
    rss: np.ndarray            # (M,)
    n: int                     # N - p
    m: int                     # M - q
    xtx_inv: np.ndarray        # (p, p)
    factor_left: np.ndarray    # (N, r_hat) left vectors of the residual SVD
    factor_sing: np.ndarray    # (r_hat,) singular values
    factor_loadings: np.ndarray  # (M, r_hat) full-coordinate loadings
    residuals: np.ndarray      # (N, M) doubly projected residuals


def compute_direction_stats(bundle: DatasetBundle, r_hat: int) -> DirectionStats:
    """Fit once and assemble the statistics for all M response directions."""
    if bundle.X is None:
        raise ValueError("testing coefficient components requires X")
    n = bundle.N - bundle.p
    m = bundle.M - bundle.q
    if not 0 <= r_hat < min(n, m):
        raise ValueError(f"r_hat must be in [0, {min(n, m)}), got {r_hat}")

    coef, resid = fit_two_sided(bundle)
    E = resid.E_hat
    Bt = coef.B_hat.T                       # (p, M)
    if bundle.Z is not None:
        from .linalg import polar_factors
        P1, _ = polar_factors(bundle.Z)
        estimates = Bt - (Bt @ P1) @ P1.T
        s_normsq = 1.0 - np.einsum("ij,ij->i", P1, P1)
    else:
        estimates = Bt
        s_normsq = np.ones(bundle.M)

    if r_hat > 0:
        # top factors of E via the Gram matrix on the small side (N << M)
        G = E @ E.T
        w, Q = np.linalg.eigh(G)
        lam = np.maximum(w[::-1][:r_hat], 0.0)
        if lam[-1] <= 1e-12 * max(lam[0], 1e-300):
            raise ValueError(f"residual rank is below the requested {r_hat} factors")
        sing = np.sqrt(lam)
        left = Q[:, ::-1][:, :r_hat]
        loadings = (E.T @ left) / sing
        adjusted = E - (left * sing) @ loadings.T
        proj = loadings**2 / s_normsq[:, None]
    else:
        sing = np.zeros(0)
        left = np.zeros((bundle.N, 0))
        loadings = np.zeros((bundle.M, 0))
        adjusted = E
        proj = np.zeros((bundle.M, 0))

    rss = np.einsum("ij,ij->j", adjusted, adjusted)
    xtx_inv = np.linalg.inv(bundle.X.T @ bundle.X)
    return DirectionStats(estimates, s_normsq, proj, rss, n, m, xtx_inv,
                          left, sing, loadings, E)


def df_totals(stats: DirectionStats, method: DofMethod | None,
              mandel_reps: int = 1000, seed: int | None = None) -> np.ndarray:
    """Total df per response for one scheme (length-M array)."""
    r_hat = stats.proj_sq.shape[1]
    M = stats.rss.shape[0]
    if r_hat == 0:
        return np.zeros(M)
    if method == DofMethod.PROPOSED:
        floor = dof_mod.noise_floor(stats.n, stats.m)
        return stats.n * stats.proj_sq.sum(axis=1) + r_hat * floor
    if method == DofMethod.GOLLOB:
        return np.full(M, dof_mod.df_gollob(stats.n, stats.m, r_hat).total)
    if method == DofMethod.MANDEL:
        est = dof_mod.df_mandel(stats.n, stats.m, r_hat, mandel_reps, seed)
        return np.full(M, est.total)
    if method == DofMethod.NAIVE:
        return np.full(M, float(r_hat))
    raise ValueError(f"unsupported df method: {method}")


def response_tests(stats: DirectionStats, coef_index: int,
                     df_tot: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(estimate, t, df_resid, p) arrays for all responses at once."""
    p_cov = stats.estimates.shape[0]
    if not 0 <= coef_index < p_cov:
        raise ValueError(f"coef_index {coef_index} out of range [0, {p_cov})")
    df_resid = stats.n - df_tot
    if np.any(df_resid <= 0):
        worst = float(df_tot.max())
        raise ValueError(
            f"degrees of freedom exhausted: n = {stats.n}, max df(s) = {worst:.4f}")
    est = stats.estimates[coef_index]
    sigma_sq = stats.rss / df_resid
    cvar = stats.xtx_inv[coef_index, coef_index]
    t = est / np.sqrt(sigma_sq * cvar)
    p = 2.0 * t_sf(np.abs(t), df_resid)
    return est, t, df_resid, p


def test_all_responses(bundle: DatasetBundle, coef_index: int, r_hat: int,
                       method: DofMethod | None = DofMethod.PROPOSED, *,
                       mandel_reps: int = 1000,
                       seed: int | None = None) -> list[TestResult]:
    """Full testing pipeline for every response; one TestResult per column."""
    stats = compute_direction_stats(bundle, r_hat)
    df_tot = df_totals(stats, method if r_hat > 0 else None,
                       mandel_reps, seed) if r_hat > 0 else np.zeros(bundle.M)
    est, t, df_resid, p = response_tests(stats, coef_index, df_tot)
    sigma_sq = stats.rss / df_resid
    cvar = stats.xtx_inv[coef_index, coef_index]
    se = np.sqrt(sigma_sq * cvar)
    ids = bundle.col_ids if bundle.col_ids else tuple(str(j) for j in range(bundle.M))
    return [TestResult(ids[j], float(est[j]), float(se[j]), float(t[j]),
                       float(df_resid[j]), float(p[j]), method)
            for j in range(bundle.M)]


def test_response(bundle: DatasetBundle, j: int, coef_index: int, r_hat: int,
                  method: DofMethod | None = DofMethod.PROPOSED, *,
                  mandel_reps: int = 1000,
                  seed: int | None = None) -> TestResult:
    """Test one response: fit, adjust r_hat factors, estimate df, t, p.

    With r_hat = 0 this reduces exactly to the classical multivariate
    regression t test on the projected response.
    """
    if not 0 <= j < bundle.M:
        raise ValueError(f"response index {j} out of range [0, {bundle.M})")
    return test_all_responses(bundle, coef_index, r_hat, method,
                              mandel_reps=mandel_reps, seed=seed)[j]
