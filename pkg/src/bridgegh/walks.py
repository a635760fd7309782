"""Walk paths, bridges and Euclidean distance matrices.

Arrays follow one convention throughout: an increment batch is ``(n, d)``
with row ``k`` holding X_{k+1}; a path or bridge cloud is ``(n + 1, d)`` with
row ``k`` holding S_k or B_k.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np

DEFAULT_BLOCK = 256
# Gram-expansion squared distances below this fraction of ||a||^2 + ||b||^2
# lose too many digits to cancellation; those pairs are recomputed directly.
REFINE_RATIO = 1e-4
_REFINE_CHUNK = 4096


@dataclass
class DistanceMatrix:
    entries: np.ndarray
    scale_applied: float = 1.0

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    def diameter(self) -> float:
        return float(self.entries.max()) if self.entries.size else 0.0

    def validate(self, tol: float = 1e-9) -> None:
        validate_distance_matrix(self.entries, tol)

    def to_csv(self, path: Union[str, Path, None] = None) -> str:
        text = matrix_to_csv(self.entries)
        if path is not None:
            Path(path).write_text(text, encoding="utf-8", newline="\n")
        return text

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "DistanceMatrix":
        return cls(read_matrix_csv(path))


@dataclass
class DecompositionDiagnostics:
    T: np.ndarray
    Q: np.ndarray
    identity_residual: float
    tq_residual: float


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def matrix_to_csv(entries: np.ndarray) -> str:
    buf = io.StringIO()
    for row in np.asarray(entries, dtype=float):
        buf.write(",".join(format_float(v) for v in row))
        buf.write("\n")
    return buf.getvalue()


def read_matrix_csv(path: Union[str, Path]) -> np.ndarray:
    text = Path(path).read_text(encoding="utf-8")
    rows = [line for line in text.splitlines() if line.strip()]
    if not rows:
        raise ValueError(f"{path}: empty matrix file")
    try:
        data = np.array([[float(v) for v in line.split(",")] for line in rows])
    except ValueError as exc:
        raise ValueError(f"{path}: malformed matrix CSV ({exc})") from None
    validate_distance_matrix(data)
    return data


def validate_distance_matrix(entries: np.ndarray, tol: float = 1e-9) -> None:
    """Raise ValueError unless ``entries`` is a finite pseudo-metric matrix."""
    D = np.asarray(entries, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValueError(f"distance matrix must be square, got shape {D.shape}")
    if not np.all(np.isfinite(D)):
        raise ValueError("distance matrix has non-finite entries")
    if np.any(np.diag(D) != 0):
        raise ValueError("distance matrix diagonal must be zero")
    if np.any(D < 0):
        raise ValueError("distance matrix has negative entries")
    if not np.array_equal(D, D.T):
        raise ValueError("distance matrix is not symmetric")
    if triangle_violation(D) > tol:
        raise ValueError("distance matrix violates the triangle inequality")


def triangle_violation(D: np.ndarray) -> float:
    """max over i, j, k of D[i, j] - D[i, k] - D[k, j] (<= 0 for a pseudo-metric)."""
    worst = -np.inf
    for k in range(D.shape[0]):
        worst = max(worst, float(np.max(D - D[:, k][:, None] - D[k][None, :])))
    return worst if D.size else 0.0


def cumulate(batch: np.ndarray) -> np.ndarray:
    """Partial sums S_0 = 0, S_k = X_1 + ... + X_k, accumulated in index order."""
    batch = np.asarray(batch, dtype=float)
    if batch.ndim != 2 or batch.shape[0] < 1:
        raise ValueError("batch must be a nonempty (n, d) array")
    n, d = batch.shape
    path = np.empty((n + 1, d))
    path[0] = 0.0
    np.cumsum(batch, axis=0, out=path[1:])
    return path


def bridge_of(path: np.ndarray) -> np.ndarray:
    """B_k = S_k - (k/n) S_n; rows 0 and n come out exactly zero."""
    path = np.asarray(path, dtype=float)
    if path.ndim != 2 or path.shape[0] < 2:
        raise ValueError("path must have at least two rows")
    n = path.shape[0] - 1
    frac = np.arange(n + 1) / n
    return path - frac[:, None] * path[-1]


def truncated_batch(batch: np.ndarray, threshold: float) -> np.ndarray:
    """Zero every increment with ||X_k||^2 < threshold (threshold = s * a(n))."""
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    batch = np.asarray(batch, dtype=float)
    keep = np.einsum("ij,ij->i", batch, batch) >= threshold
    return np.where(keep[:, None], batch, 0.0)


def grid_indices(n: int, m: int) -> np.ndarray:
    """floor(n i / m) for i = 0..m, in exact integer arithmetic."""
    if m < 1 or m > n:
        raise ValueError(f"grid size m={m} must satisfy 1 <= m <= n={n}")
    return (n * np.arange(m + 1, dtype=np.int64)) // m


def subsample_grid(cloud: np.ndarray, m: int) -> np.ndarray:
    n = cloud.shape[0] - 1
    return cloud[grid_indices(n, m)]


def bridge_rows(chunks: Iterable[np.ndarray], n: int, indices: np.ndarray) -> np.ndarray:
    """Selected bridge rows B_k, k in ``indices``, from a stream of increment chunks.

    Consumes the chunks in order (n rows in total) and returns exactly
    ``bridge_of(cumulate(batch))[indices]``: the running sum is carried into
    each chunk, so the left-to-right summation order matches :func:`cumulate`
    bit for bit while only one chunk is held in memory.
    """
    idx = np.asarray(indices, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() > n):
        raise ValueError(f"row indices must lie in 0..{n}")
    rows: Optional[np.ndarray] = None
    pos = 0
    carry = None
    for chunk in chunks:
        chunk = np.array(chunk, dtype=float)
        if rows is None:
            # rows[-1] holds S_n
            rows = np.zeros((idx.size + 1, chunk.shape[1]))
            carry = np.zeros(chunk.shape[1])
        chunk[0] += carry
        partial = np.cumsum(chunk, axis=0)
        lo, hi = pos, pos + chunk.shape[0]
        sel = np.nonzero((idx > lo) & (idx <= hi))[0]
        rows[sel] = partial[idx[sel] - lo - 1]
        carry = partial[-1]
        pos = hi
    if rows is None or pos != n:
        raise ValueError(f"expected {n} increment rows, got {pos}")
    rows[-1] = carry
    frac = idx / n
    return rows[:-1] - frac[:, None] * rows[-1]


def grid_bridge(chunks: Iterable[np.ndarray], n: int, m: int) -> np.ndarray:
    """``subsample_grid(bridge_of(cumulate(batch)), m)`` computed from a chunk stream."""
    return bridge_rows(chunks, n, grid_indices(n, m))


def _squared_norms(P: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->i", P, P)


def _refine(D2: np.ndarray, A: np.ndarray, B: np.ndarray, a0: int, b0: int, bad: np.ndarray) -> None:
    ia, ib = np.nonzero(bad)
    for start in range(0, ia.size, _REFINE_CHUNK):
        sa = ia[start:start + _REFINE_CHUNK]
        sb = ib[start:start + _REFINE_CHUNK]
        diff = A[a0 + sa] - B[b0 + sb]
        D2[sa, sb] = np.einsum("ij,ij->i", diff, diff)


def cross_sq_distances(A: np.ndarray, B: np.ndarray, block: int = DEFAULT_BLOCK) -> np.ndarray:
    """Squared distances between rows of A and rows of B via blocked Gram expansion."""
    A = np.ascontiguousarray(A, dtype=float)
    B = np.ascontiguousarray(B, dtype=float)
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[1]:
        raise ValueError("point arrays must be 2-D with equal dimension")
    na, nb = _squared_norms(A), _squared_norms(B)
    out = np.empty((A.shape[0], B.shape[0]))
    for i0 in range(0, A.shape[0], block):
        i1 = min(i0 + block, A.shape[0])
        for j0 in range(0, B.shape[0], block):
            j1 = min(j0 + block, B.shape[0])
            D2 = na[i0:i1, None] + nb[None, j0:j1] - 2.0 * (A[i0:i1] @ B[j0:j1].T)
            bad = D2 < REFINE_RATIO * (na[i0:i1, None] + nb[None, j0:j1])
            if bad.any():
                _refine(D2, A, B, i0, j0, bad)
            out[i0:i1, j0:j1] = D2
    np.maximum(out, 0.0, out=out)
    return out


def pairwise_sq_distances(P: np.ndarray, block: int = DEFAULT_BLOCK) -> np.ndarray:
    """Symmetric version of :func:`cross_sq_distances`: upper blocks computed, then mirrored."""
    P = np.ascontiguousarray(P, dtype=float)
    if P.ndim != 2:
        raise ValueError("cloud must be a 2-D array")
    sq = _squared_norms(P)
    m = P.shape[0]
    out = np.empty((m, m))
    for i0 in range(0, m, block):
        i1 = min(i0 + block, m)
        for j0 in range(i0, m, block):
            j1 = min(j0 + block, m)
            D2 = sq[i0:i1, None] + sq[None, j0:j1] - 2.0 * (P[i0:i1] @ P[j0:j1].T)
            bad = D2 < REFINE_RATIO * (sq[i0:i1, None] + sq[None, j0:j1])
            if bad.any():
                _refine(D2, P, P, i0, j0, bad)
            out[i0:i1, j0:j1] = D2
            out[j0:j1, i0:i1] = D2.T
    np.maximum(out, 0.0, out=out)
    np.fill_diagonal(out, 0.0)
    return out


def distance_matrix(cloud: np.ndarray, scale: float = 1.0, block: int = DEFAULT_BLOCK) -> DistanceMatrix:
    """scale * ||P_i - P_j||, symmetric with an exactly zero diagonal."""
    if not scale > 0:
        raise ValueError("scale must be positive")
    D = np.sqrt(pairwise_sq_distances(cloud, block))
    if scale != 1.0:
        D *= scale
    return DistanceMatrix(D, float(scale))


def naive_distance_matrix(cloud: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """Reference kernel: explicit differences, one pair at a time."""
    P = np.asarray(cloud, dtype=float)
    m = P.shape[0]
    D = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            diff = P[i] - P[j]
            D[i, j] = D[j, i] = scale * np.sqrt(diff @ diff)
    return D


def decomposition_check(batch: np.ndarray) -> DecompositionDiagnostics:
    """Check the bridge expansion and ||S_i||^2 = T_i + Q_{1,i} for i = 0..n.

    Q_{1,i} = sum_{l != k <= i} <X_l, X_k> is accumulated as the martingale sum
    2 sum_{l <= i} <X_l, S_{l-1}>, independently of ||S_i||^2.
    """
    X = np.asarray(batch, dtype=float)
    n = X.shape[0]
    S = cumulate(X)
    sqS = _squared_norms(S)
    T = np.concatenate(([0.0], np.cumsum(_squared_norms(X))))
    Q = np.concatenate(([0.0], 2.0 * np.cumsum(np.einsum("ij,ij->i", X, S[:-1]))))

    p = np.arange(n + 1) / n
    lhs = _squared_norms(bridge_of(S))
    rest = S[-1] - S
    rhs = (1 - p) * sqS + p * _squared_norms(rest) - p * (1 - p) * sqS[-1]
    identity = float(np.max(np.abs(lhs - rhs) / (1.0 + np.abs(lhs))))
    tq = float(np.max(np.abs(sqS - T - Q) / (1.0 + T + sqS)))
    return DecompositionDiagnostics(T, Q, identity, tq)
