"""Degrees of freedom assigned to estimated latent factors.

Implements every scheme under comparison: the asymptotic noise value, the
asymptotic signal-case values (with the below-transition conjecture branch),
the proposed conservative estimator, and the classical Gollob, Mandel, and
naive parameter-counting rules.  All inputs are post-reduction sizes
(n = N - p rows, m = M - q columns).
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .distributions import DOMAIN_MANDEL, stream


class DofMethod(str, Enum):
    PROPOSED = "proposed"
    GOLLOB = "gollob"
    MANDEL = "mandel"
    NAIVE = "naive"
    THEORETICAL_NOISE = "theoretical-noise"
    THEORETICAL_SIGNAL = "theoretical-signal"


@dataclass(frozen=True)
class DofEstimate:
    """Per-factor and total degrees of freedom for one test direction."""

    per_factor: np.ndarray
    total: float
    method: DofMethod
    direction_id: str | None = None
    conjectural: bool = False      # below-transition values are a conjecture
    mc_se: float | None = None     # Monte-Carlo standard error (Mandel only)


def _estimate(per_factor, method, direction_id=None, conjectural=False,
              mc_se=None) -> DofEstimate:
    per_factor = np.asarray(per_factor, dtype=np.float64)
    return DofEstimate(per_factor, float(per_factor.sum()), method,
                       direction_id, conjectural, mc_se)


def noise_floor(n: int, m: int) -> float:
    """(1 + sqrt(n/m))^2, the asymptotic cost of one pure-noise factor."""
    return (1.0 + np.sqrt(n / m)) ** 2


def is_above_transition(mu_k: float, n: int, m: int, sigma_sq: float = 1.0) -> bool:
    """Whether a factor strength exceeds the phase transition sigma^2 sqrt(m/n).

    Exact equality sits on the below-transition (conjecture) side because the
    above-transition expressions degenerate there.
    """
    return mu_k / sigma_sq > np.sqrt(m / n)


def df_noise(n: int, m: int, r_hat: int) -> DofEstimate:
    """Asymptotic df when the data are pure noise: r_hat copies of the floor."""
    if n < 1 or m < 1 or r_hat < 0:
        raise ValueError("n, m must be >= 1 and r_hat >= 0")
    return _estimate(np.full(r_hat, noise_floor(n, m)), DofMethod.THEORETICAL_NOISE)


def df_signal_k(n: int, m: int, mu_k: float, sigma_sq: float,
                proj_sq: float) -> float:
    """Asymptotic df of one estimated factor of true strength mu_k.

    ``proj_sq`` is the squared projection (v_k's)^2 / s's of the test
    direction onto the factor loading.  Above the phase transition the full
    signal-case expression applies; at or below it the conjectured value
    (noise floor minus the captured signal energy) is returned.
    """
    if mu_k <= 0 or sigma_sq <= 0:
        raise ValueError("mu_k and sigma_sq must be positive")
    if not -1e-12 <= proj_sq <= 1 + 1e-12:
        raise ValueError("proj_sq must lie in [0, 1]")
    proj_sq = min(max(proj_sq, 0.0), 1.0)
    if is_above_transition(mu_k, n, m, sigma_sq):
        parallel = n * (1.0 - m * sigma_sq / (n * mu_k)
                        - m * sigma_sq**2 / (n * mu_k**2))
        perp = (1.0 + sigma_sq / mu_k) ** 2
        return parallel * proj_sq + perp * (1.0 - proj_sq)
    return noise_floor(n, m) - n * (mu_k / sigma_sq) * proj_sq


def df_signal_total(n: int, m: int, mu, sigma_sq: float, proj_sqs,
                    r_hat: int) -> DofEstimate:
    """Total asymptotic signal-case df for r_hat estimated factors.

    When r_hat exceeds the true rank, each surplus factor costs the noise
    floor.  When r_hat falls short, the unremoved factors inflate the RSS;
    that (negative) adjustment is folded into the last per-factor entry so
    the total matches the sum.
    """
    mu = np.asarray(mu, dtype=np.float64)
    proj_sqs = np.asarray(proj_sqs, dtype=np.float64)
    r = len(mu)
    if len(proj_sqs) != r:
        raise ValueError("mu and proj_sqs must have equal length")
    if r > 1 and np.any(np.diff(mu) >= 0):
        raise ValueError("mu must be strictly decreasing")
    if np.any(mu <= 0):
        raise ValueError("mu must be positive")
    if proj_sqs.sum() > 1 + 1e-9:
        raise ValueError("projections sum to more than 1")
    if r_hat < r and r_hat == 0:
        raise ValueError("r_hat = 0 with true factors has no per-factor split")

    per = [df_signal_k(n, m, mu[k], sigma_sq, proj_sqs[k])
           for k in range(min(r, r_hat))]
    if r_hat > r:
        per.extend([noise_floor(n, m)] * (r_hat - r))
    elif r_hat < r:
        err = -n * float((mu[r_hat:] / sigma_sq) @ proj_sqs[r_hat:])
        per[-1] += err
    conj = any(not is_above_transition(mu[k], n, m, sigma_sq)
               for k in range(min(r, r_hat)))
    return _estimate(per, DofMethod.THEORETICAL_SIGNAL, conjectural=conj)


def df_conservative(n: int, m: int, vhat_proj_sqs,
                    direction_id: str | None = None) -> DofEstimate:
    """The proposed estimator: n (vhat_k's)^2 / s's + noise floor per factor.

    Depends only on observable quantities; asymptotically an upper bound for
    the true per-factor df.
    """
    proj = np.asarray(vhat_proj_sqs, dtype=np.float64)
    if np.any(proj < -1e-12) or np.any(proj > 1 + 1e-12):
        raise ValueError("projections must lie in [0, 1]")
    if proj.sum() > 1 + 1e-9:
        raise ValueError("projections sum to more than 1")
    proj = np.clip(proj, 0.0, 1.0)
    return _estimate(n * proj + noise_floor(n, m), DofMethod.PROPOSED,
                     direction_id)


def df_gollob(n: int, m: int, r_hat: int) -> DofEstimate:
    """Gollob's parameter count, spread evenly over the m directions.

    Factor k is charged (n - k + 1) + (m - k + 1) - 1 parameters in total,
    i.e. that amount divided by m per direction.
    """
    if r_hat >= min(n, m):
        raise ValueError("r_hat must be below min(n, m)")
    k = np.arange(1, r_hat + 1)
    return _estimate(((n - k + 1) + (m - k + 1) - 1) / m, DofMethod.GOLLOB)


def df_mandel(n: int, m: int, r_hat: int, mc_reps: int = 1000,
              seed: int | None = None) -> DofEstimate:
    """Mandel's allocation: E[lambda_k] / m, estimated by Monte Carlo.

    lambda_k is the kth largest eigenvalue of an m-dimensional white Wishart
    matrix with n degrees of freedom (the law of G'G for G an n x m standard
    normal matrix).  Sampling uses the Bartlett factorization of the
    equivalent min(n, m)-dimensional Wishart, which has the same nonzero
    spectrum; results are deterministic for a fixed seed.
    """
    if r_hat > min(n, m):
        raise ValueError("r_hat must not exceed min(n, m)")
    if mc_reps < 100:
        raise ValueError("mc_reps must be >= 100")
    if seed is None:
        raise ValueError("df_mandel requires an explicit seed")
    dim, dof = min(n, m), max(n, m)
    rng = stream(seed, DOMAIN_MANDEL)
    A = np.zeros((mc_reps, dim, dim))
    lower = np.tril_indices(dim, -1)
    A[:, lower[0], lower[1]] = rng.standard_normal((mc_reps, len(lower[0])))
    diag_dfs = dof - np.arange(dim)
    A[:, np.arange(dim), np.arange(dim)] = np.sqrt(
        rng.chisquare(diag_dfs, size=(mc_reps, dim)))
    eigs = np.linalg.eigvalsh(A @ np.transpose(A, (0, 2, 1)))
    top = eigs[:, ::-1][:, :r_hat] / m
    per = top.mean(axis=0)
    se = float(np.sqrt(np.sum(top.var(axis=0, ddof=1)) / mc_reps))
    return _estimate(per, DofMethod.MANDEL, mc_se=se)


def df_naive(r_hat: int) -> DofEstimate:
    """One df per estimated factor, as if U_hat were observed covariates."""
    if r_hat < 0:
        raise ValueError("r_hat must be >= 0")
    return _estimate(np.ones(r_hat), DofMethod.NAIVE)


@dataclass(frozen=True)
class AsymptoticPrediction:
    """Predicted top-eigenvalue location and squared loading overlap."""

    mu_bar_k: float
    rho_bar_kk_sq: float
    above_transition: bool


def asymptotic_predictions(mu_k: float, n: int, m: int,
                           sigma_sq: float = 1.0) -> AsymptoticPrediction:
    """Where mu_hat_k concentrates and how much of v_k the estimate captures.

    Above the transition: mu_bar = (t + 1)(m/(n t) + 1) sigma^2 and
    rho_bar^2 = (1 - m/(n t^2)) / (1 + m/(n t)) with t = mu_k / sigma^2.
    At or below it the eigenvalue sticks to the bulk edge and the overlap
    is clamped to zero.
    """
    if mu_k <= 0 or sigma_sq <= 0:
        raise ValueError("mu_k and sigma_sq must be positive")
    t = mu_k / sigma_sq
    above = is_above_transition(mu_k, n, m, sigma_sq)
    if above:
        mu_bar = (t + 1.0) * (m / (n * t) + 1.0) * sigma_sq
        rho2 = (1.0 - m / (n * t**2)) / (1.0 + m / (n * t))
    else:
        mu_bar = (1.0 + np.sqrt(m / n)) ** 2 * sigma_sq
        rho2 = 0.0
    return AsymptoticPrediction(float(mu_bar), float(rho2), above)
