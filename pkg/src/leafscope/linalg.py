from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .config import SETTINGS


def normalize(v: np.ndarray) -> np.ndarray:
    """Unit-norm representative of a projective point (or of each row)."""
    v = np.asarray(v, dtype=complex)
    norms = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(norms == 0):
        raise ValueError("zero vector has no projective class")
    return v / norms


def projective_distance(p: np.ndarray, q: np.ndarray) -> float:
    """Chordal distance sqrt(1 - |<p, q>|^2) between unit representatives."""
    p, q = normalize(p), normalize(q)
    overlap = abs(np.vdot(p, q))
    return float(np.sqrt(max(0.0, 1.0 - overlap * overlap)))


@dataclass(frozen=True)
class RankDecision:
    rank: int
    ambiguous: bool
    singular_values: tuple[float, ...]

    @property
    def kernel_dim(self) -> int:
        return len(self.singular_values) - self.rank


def numeric_rank(
    singular_values,
    rank_tol: float,
    gap: float | None = None,
    scale: float | None = None,
) -> RankDecision:
    """Gap rule: keep s_i > rank_tol * scale (scale defaults to s_1).

    The decision is flagged ambiguous when the last kept and first dropped
    values are within `gap` of each other, or when the last kept value sits
    within `gap` of the threshold.
    """
    gap = SETTINGS.rank_gap if gap is None else gap
    sv = np.sort(np.abs(np.asarray(singular_values, dtype=float)))[::-1]
    ref = float(sv[0]) if scale is None and sv.size else float(scale or 0.0)
    if sv.size == 0 or ref == 0.0:
        return RankDecision(0, False, tuple(sv.tolist()))

    threshold = rank_tol * ref
    rank = int(np.count_nonzero(sv > threshold))
    ambiguous = False
    if 0 < rank < sv.size:
        tiny = np.finfo(float).tiny
        ambiguous = sv[rank - 1] / max(sv[rank], tiny) < gap
    if rank > 0 and sv[rank - 1] < threshold * gap:
        ambiguous = True
    if rank == 0 and sv[0] > threshold / gap:
        ambiguous = True
    return RankDecision(rank, bool(ambiguous), tuple(sv.tolist()))


def matrix_rank(
    matrix: np.ndarray,
    rank_tol: float,
    gap: float | None = None,
    scale: float | None = None,
) -> RankDecision:
    return numeric_rank(np.linalg.svd(matrix, compute_uv=False), rank_tol, gap, scale)


def null_space(matrix: np.ndarray, rank_tol: float) -> np.ndarray:
    """Orthonormal columns spanning {v : matrix @ v = 0}."""
    return sla.null_space(np.atleast_2d(matrix), rcond=rank_tol)


def left_kernel(matrix: np.ndarray, rank_tol: float) -> np.ndarray:
    """Columns v with v^T @ matrix = 0 (bilinear, no conjugation)."""
    return sla.null_space(np.atleast_2d(matrix).T, rcond=rank_tol)


def column_span(matrix: np.ndarray, rank_tol: float) -> np.ndarray:
    return sla.orth(np.atleast_2d(matrix), rcond=rank_tol)


def null_vector(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Least singular vector of a tall system plus its full singular spectrum.

    The matrix is first reduced by column-pivoted QR; the SVD then runs on the
    small triangular factor and the permutation is undone on the way out.
    """
    A = np.asarray(matrix, dtype=complex)
    if A.shape[0] < A.shape[1]:
        A = np.vstack([A, np.zeros((A.shape[1] - A.shape[0], A.shape[1]), dtype=complex)])
    _, R, perm = sla.qr(A, mode="economic", pivoting=True)
    _, s, vh = np.linalg.svd(R)
    v_perm = vh[-1].conj()
    v = np.empty_like(v_perm)
    v[perm] = v_perm
    return v, s
