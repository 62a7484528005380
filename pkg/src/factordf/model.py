"""Two-sided least squares for the bilinear regression model.

Fits Y = A Z' + X B' + (latent factors) + E, exposes the identifiable
coefficient components under the fixed normalization H_X A = 0,
H_Z B = H_Z Y' X (X'X)^-1, and reduces any model with covariates to a
covariate-free one on the orthogonal complements of col(X) and col(Z).
"""

from dataclasses import dataclass, field

import numpy as np

from .linalg import RANK_TOL, _as_matrix, orthonormal_complement, polar_factors

# Tolerance for s being orthogonal to the column covariates.
DIRECTION_TOL = 1e-8


def _check_covariate(C, n_rows: int, name: str) -> np.ndarray | None:
    if C is None:
        return None
    C = _as_matrix(C, name)
    if C.shape[1] == 0:
        return None
    if C.shape[0] != n_rows:
        raise ValueError(f"{name} has {C.shape[0]} rows, expected {n_rows}")
    if C.shape[1] >= n_rows:
        raise ValueError(f"{name} must have fewer columns than rows")
    s = np.linalg.svd(C, compute_uv=False)
    if s[-1] <= RANK_TOL * s[0]:
        raise ValueError(f"{name} is rank deficient")
    return C


@dataclass(frozen=True)
class DatasetBundle:
    """Response matrix with optional row covariates X and column covariates Z."""

    Y: np.ndarray                       # (N, M)
    X: np.ndarray | None = None         # (N, p)
    Z: np.ndarray | None = None         # (M, q)
    row_ids: tuple = field(default=(), compare=False)
    col_ids: tuple = field(default=(), compare=False)

    def __post_init__(self):
        Y = _as_matrix(self.Y, "Y")
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "X", _check_covariate(self.X, Y.shape[0], "X"))
        object.__setattr__(self, "Z", _check_covariate(self.Z, Y.shape[1], "Z"))

    @property
    def N(self) -> int:
        return self.Y.shape[0]

    @property
    def M(self) -> int:
        return self.Y.shape[1]

    @property
    def p(self) -> int:
        return 0 if self.X is None else self.X.shape[1]

    @property
    def q(self) -> int:
        return 0 if self.Z is None else self.Z.shape[1]


@dataclass(frozen=True)
class CoefficientEstimates:
    A_hat: np.ndarray       # (N, q), H_X A_hat = 0
    B_hat: np.ndarray       # (M, p), full normal-equation solution Y' X (X'X)^-1
    Gamma_hat: np.ndarray   # (p, q) interaction block of the reparametrized model


@dataclass(frozen=True)
class ResidualMatrix:
    """Doubly projected residuals (I - H_X) Y (I - H_Z)."""

    E_hat: np.ndarray


@dataclass(frozen=True)
class ReducedModel:
    """Covariate-free coordinates: Y22 = Q2' Y P2 on the complement bases."""

    Q2: np.ndarray    # (N, n)
    P2: np.ndarray    # (M, m)
    Y22: np.ndarray   # (n, m)

    @property
    def n(self) -> int:
        return self.Y22.shape[0]

    @property
    def m(self) -> int:
        return self.Y22.shape[1]


@dataclass(frozen=True)
class TestDirection:
    """A direction s with Z's = 0 along which B's is identifiable."""

    s: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.s, dtype=np.float64).ravel()
        if not np.all(np.isfinite(s)):
            raise ValueError("test direction has non-finite entries")
        if s @ s <= 0:
            raise ValueError("test direction has zero norm")
        object.__setattr__(self, "s", s)

    @property
    def norm_sq(self) -> float:
        return float(self.s @ self.s)


def _project_out_rows(Q1: np.ndarray | None, A: np.ndarray) -> np.ndarray:
    # (I - Q1 Q1') A without forming the projector
    if Q1 is None:
        return A
    return A - Q1 @ (Q1.T @ A)


def _project_out_cols(A: np.ndarray, P1: np.ndarray | None) -> np.ndarray:
    if P1 is None:
        return A
    return A - (A @ P1) @ P1.T


def fit_two_sided(bundle: DatasetBundle) -> tuple[CoefficientEstimates, ResidualMatrix]:
    """Least squares fit of the two-sided regression part of the model.

    Returns the coefficient blocks under the stated identifiability
    convention and the residual matrix E_hat = (I - H_X) Y (I - H_Z).
    """
    Y, X, Z = bundle.Y, bundle.X, bundle.Z
    N, M, p, q = bundle.N, bundle.M, bundle.p, bundle.q

    Q1 = R = None
    if X is not None:
        Q1, R = polar_factors(X)
    P1 = S = None
    if Z is not None:
        P1, S = polar_factors(Z)

    if X is not None:
        B_hat = np.linalg.solve(X.T @ X, X.T @ Y).T
    else:
        B_hat = np.zeros((M, 0))

    Yx = _project_out_rows(Q1, Y)
    if Z is not None:
        A_hat = np.linalg.solve(Z.T @ Z, (Yx @ Z).T).T
    else:
        A_hat = np.zeros((N, 0))

    if X is not None and Z is not None:
        Y11 = Q1.T @ Y @ P1
        Gamma_hat = np.linalg.solve(R, Y11) @ np.linalg.inv(S)
    else:
        Gamma_hat = np.zeros((p, q))

    E_hat = _project_out_cols(Yx, P1)
    return CoefficientEstimates(A_hat, B_hat, Gamma_hat), ResidualMatrix(E_hat)


def test_direction(bundle: DatasetBundle, j: int) -> TestDirection:
    """Direction (I - H_Z) e_j for response j (0-based index)."""
    if not 0 <= j < bundle.M:
        raise ValueError(f"response index {j} out of range [0, {bundle.M})")
    e = np.zeros(bundle.M)
    e[j] = 1.0
    if bundle.Z is None:
        return TestDirection(e)
    P1, _ = polar_factors(bundle.Z)
    return TestDirection(e - P1 @ (P1.T @ e))


def reduce_to_covariate_free(
    bundle: DatasetBundle, direction: TestDirection
) -> tuple[ReducedModel, TestDirection]:
    """Change of basis to the complements of col(X) and col(Z).

    The returned model satisfies Y22 = Q2' Y P2 with n = N - p and
    m = M - q rows/columns; the reduced direction is s2 = P2' s, which
    preserves the residual quadratic form s' E' E s exactly.
    """
    s = direction.s
    if s.shape[0] != bundle.M:
        raise ValueError("direction length does not match number of responses")
    if bundle.Z is not None:
        if np.max(np.abs(bundle.Z.T @ s)) > DIRECTION_TOL * max(1.0, np.linalg.norm(s)):
            raise ValueError("test direction is not orthogonal to Z")
        P1, _ = polar_factors(bundle.Z)
        P2 = orthonormal_complement(P1)
    else:
        P2 = np.eye(bundle.M)
    if bundle.X is not None:
        Q1, _ = polar_factors(bundle.X)
        Q2 = orthonormal_complement(Q1)
    else:
        Q2 = np.eye(bundle.N)
    Y22 = Q2.T @ (bundle.Y @ P2)
    return ReducedModel(Q2, P2, Y22), TestDirection(P2.T @ s)
