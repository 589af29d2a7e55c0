"""Tolerance-aware dense complex linear algebra kernel.

Matrices are plain 2-D complex ndarrays.  Every decision that depends on a
numerical threshold (rank, null space, pseudo-inverse cutoff) goes through a
shared :class:`TolerancePolicy` so the whole pipeline agrees on what counts
as zero.  All outputs are deterministic: SVD post-processing fixes column
order and phase so identical inputs give bit-identical results.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidMatrixError, SingularBlockError


@dataclass(frozen=True)
class TolerancePolicy:
    """Relative thresholds used by all rank and residual decisions.

    ``rank_rel_tol`` is measured against the largest singular value of the
    matrix at hand, which keeps decisions scale-free for O(1) channel gains.
    ``residual_rel_tol`` bounds acceptable relative residuals in
    verification checks.
    """

    rank_rel_tol: float = 1e-8
    residual_rel_tol: float = 1e-9

    def __post_init__(self):
        for name in ("rank_rel_tol", "residual_rel_tol"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise ValueError(f"{name} must be in (0, 1), got {v!r}")


DEFAULT_TOL = TolerancePolicy()


def as_matrix(m) -> np.ndarray:
    """Validate and return ``m`` as a 2-D complex array.

    Raises :class:`InvalidMatrixError` for non-2-D input or non-finite
    entries.  Zero-sized dimensions are allowed; several antenna corner
    cases produce legitimately empty blocks.
    """
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise InvalidMatrixError(f"expected a 2-D matrix, got shape {a.shape}")
    if a.size and not np.isfinite(a).all():
        raise InvalidMatrixError("matrix contains non-finite entries")
    return a


def _require_nonempty(a: np.ndarray):
    if a.shape[0] == 0 or a.shape[1] == 0:
        raise InvalidMatrixError(f"operation requires a nonempty matrix, got shape {a.shape}")


def numerical_rank(m, tol: TolerancePolicy = DEFAULT_TOL) -> int:
    """Number of singular values above ``rank_rel_tol`` times the largest.

    An all-zero matrix has rank 0.  Zero-sized matrices also report rank 0,
    which is the convention the partitioned-matrix identities below rely on.
    """
    a = as_matrix(m)
    if a.shape[0] == 0 or a.shape[1] == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol.rank_rel_tol * s[0]))


def rank_at_scale(m, scale: float, tol: TolerancePolicy = DEFAULT_TOL) -> int:
    """Rank with singular values judged against an external scale.

    For a sub-block of a larger problem, entries of pure roundoff size must
    count as zero even though they dominate the block itself; the threshold
    used is ``rank_rel_tol`` times the larger of ``scale`` and the block's
    own top singular value, so the result never exceeds the plain rank.
    """
    a = as_matrix(m)
    if a.shape[0] == 0 or a.shape[1] == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    anchor = max(float(scale), float(s[0]))
    if anchor <= 0.0:
        return 0
    return int(np.sum(s > tol.rank_rel_tol * anchor))


def null_space_basis(m, tol: TolerancePolicy = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the right null space, as columns.

    Columns are ordered by ascending associated singular value (the most
    null direction first) and each column is phase-normalized so that its
    largest-magnitude entry is real and positive.  The column count is
    ``cols - numerical_rank(m)``.
    """
    a = as_matrix(m)
    _require_nonempty(a)
    rows, cols = a.shape
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    smax = s[0] if s.size else 0.0
    if smax == 0.0:
        rank = 0
    else:
        rank = int(np.sum(s > tol.rank_rel_tol * smax))
    # vh rows are sorted by descending singular value; rows beyond
    # min(rows, cols) correspond to singular value zero.  Reversing the
    # tail therefore yields ascending order.
    idx = range(cols - 1, rank - 1, -1)
    basis = np.empty((cols, cols - rank), dtype=np.complex128)
    for out_col, i in enumerate(idx):
        basis[:, out_col] = np.conj(vh[i, :])
    return phase_normalize_columns(basis)


def phase_normalize_columns(b: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real positive."""
    b = np.array(b, dtype=np.complex128, copy=True)
    for j in range(b.shape[1]):
        col = b[:, j]
        i = int(np.argmax(np.abs(col)))
        pivot = col[i]
        mag = abs(pivot)
        if mag > 0.0:
            b[:, j] = col * (np.conj(pivot) / mag)
            b[i, j] = b[i, j].real + 0.0j
    return b


def pseudo_inverse(m, tol: TolerancePolicy = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose pseudo-inverse with the shared relative rank cutoff."""
    a = as_matrix(m)
    if a.shape[0] == 0 or a.shape[1] == 0:
        return np.zeros((a.shape[1], a.shape[0]), dtype=np.complex128)
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    smax = s[0]
    inv = np.zeros_like(s)
    if smax > 0.0:
        keep = s > tol.rank_rel_tol * smax
        inv[keep] = 1.0 / s[keep]
    return (vh.conj().T * inv) @ u.conj().T


def schur_complement(m, split_row: int, split_col: int,
                     tol: TolerancePolicy = DEFAULT_TOL) -> np.ndarray:
    """Schur complement of the lower-right block of a partitioned matrix.

    ``m`` is split into ``[[m11, m12], [m21, m22]]`` at the explicit indices
    ``split_row``/``split_col``; the result is ``m11 - m12 m22^{-1} m21``.
    The lower-right block must be square and numerically nonsingular.  A
    zero-sized ``m22`` is treated as nonsingular with inverse of size zero,
    so the complement degenerates to ``m11``; this makes the corner cases of
    the partitioned-rank identity directly testable.
    """
    a = as_matrix(m)
    rows, cols = a.shape
    if not (0 <= split_row <= rows and 0 <= split_col <= cols):
        raise InvalidMatrixError(
            f"split ({split_row}, {split_col}) outside matrix of shape {a.shape}")
    q_r, q_c = rows - split_row, cols - split_col
    if q_r != q_c:
        raise SingularBlockError(
            f"lower-right block must be square, got {q_r}x{q_c}")
    m11 = a[:split_row, :split_col]
    if q_r == 0:
        return m11.copy()
    m12 = a[:split_row, split_col:]
    m21 = a[split_row:, :split_col]
    m22 = a[split_row:, split_col:]
    if numerical_rank(m22, tol) < q_r:
        raise SingularBlockError(
            f"lower-right {q_r}x{q_r} block is numerically singular")
    return m11 - m12 @ np.linalg.solve(m22, m21)


def spectral_norm(m) -> float:
    """Largest singular value; 0.0 for zero-sized matrices."""
    a = as_matrix(m)
    if a.shape[0] == 0 or a.shape[1] == 0:
        return 0.0
    return float(np.linalg.svd(a, compute_uv=False)[0])
