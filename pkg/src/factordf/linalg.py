"""Dense linear-algebra kernels with fixed sign conventions.

Every routine here is a pure function of its input bytes: singular vectors,
polar factors, and orthonormal complements all follow the same deterministic
sign rule so that downstream estimates are reproducible across runs and
thread counts.
"""

from dataclasses import dataclass

import numpy as np

# Relative threshold below which a matrix is treated as rank deficient.
RANK_TOL = 1e-10


def _as_matrix(A, name: str = "matrix") -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {A.shape}")
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and column")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} contains non-finite entries")
    return A


def canonical_signs(V: np.ndarray) -> np.ndarray:
    """Sign flips (+/-1 per column) making each column's largest-|entry| positive.

    Ties in absolute value are broken by the lowest index.
    """
    if V.shape[1] == 0:
        return np.ones(0)
    lead = np.abs(V).argmax(axis=0)
    vals = V[lead, np.arange(V.shape[1])]
    signs = np.where(vals < 0, -1.0, 1.0)
    return signs


@dataclass(frozen=True)
class SvdTruncation:
    """Leading-k SVD factors with orthonormal columns and canonical signs."""

    left_vectors: np.ndarray      # (n, k)
    singular_values: np.ndarray   # (k,) descending, >= 0
    right_vectors: np.ndarray     # (m, k)

    @property
    def rank(self) -> int:
        return len(self.singular_values)

    def reconstruct(self) -> np.ndarray:
        return (self.left_vectors * self.singular_values) @ self.right_vectors.T


def truncated_svd(A, k: int) -> SvdTruncation:
    """Best rank-k factors of A with the canonical sign convention.

    The sign of each (left, right) vector pair is fixed so that the
    largest-magnitude entry of the right singular vector is positive.
    """
    A = _as_matrix(A, "A")
    kmax = min(A.shape)
    if not 1 <= k <= kmax:
        raise ValueError(f"k must be in [1, {kmax}], got {k}")
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    U, s, Vt = U[:, :k], s[:k], Vt[:k]
    signs = canonical_signs(Vt.T)
    return SvdTruncation(U * signs, s, Vt.T * signs)


def polar_factors(X) -> tuple[np.ndarray, np.ndarray]:
    """Polar decomposition X = Q R with Q orthonormal-column, R symmetric PD.

    Computed from the SVD: X = U S V' gives Q = U V' and R = V S V'.
    Raises on rank-deficient input (smallest singular value below
    RANK_TOL relative to the largest).
    """
    X = _as_matrix(X, "X")
    U, s, Vt = np.linalg.svd(X, full_matrices=False)
    if X.shape[1] > X.shape[0] or s[-1] <= RANK_TOL * s[0]:
        raise ValueError("polar_factors requires full column rank")
    Q = U @ Vt
    R = (Vt.T * s) @ Vt
    return Q, 0.5 * (R + R.T)


def orthonormal_complement(Q1, n_rows: int | None = None) -> np.ndarray:
    """Orthonormal basis Q2 of the complement of span(Q1), so [Q1 Q2] is orthogonal.

    Deterministic construction: Gram-Schmidt completion against the identity
    columns in index order, re-orthogonalized once, then the canonical sign
    convention.  Pass ``n_rows`` for the degenerate k = 0 case (returns the
    identity).
    """
    if Q1 is None or (hasattr(Q1, "shape") and np.asarray(Q1).size == 0):
        if n_rows is None:
            raise ValueError("n_rows is required when Q1 is empty")
        return np.eye(n_rows)
    Q1 = _as_matrix(Q1, "Q1")
    N, k = Q1.shape
    if k > N:
        raise ValueError("Q1 cannot have more columns than rows")
    if np.max(np.abs(Q1.T @ Q1 - np.eye(k))) > 1e-8:
        raise ValueError("Q1 columns are not orthonormal")
    if k == N:
        return np.zeros((N, 0))

    basis = [Q1[:, j] for j in range(k)]
    added = []
    for i in range(N):
        if len(basis) == N:
            break
        v = np.zeros(N)
        v[i] = 1.0
        for b in basis:
            v = v - (b @ v) * b
        # second pass guards against cancellation
        for b in basis:
            v = v - (b @ v) * b
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            v = v / norm
            basis.append(v)
            added.append(v)
    if len(basis) != N:
        raise ValueError("failed to complete orthonormal basis")
    Q2 = np.column_stack(added)
    return Q2 * canonical_signs(Q2)


def hat_matrix(X) -> np.ndarray:
    """Orthogonal projector onto the column space of X (symmetric, idempotent)."""
    X = _as_matrix(X, "X")
    Q, _ = polar_factors(X)
    H = Q @ Q.T
    return 0.5 * (H + H.T)
