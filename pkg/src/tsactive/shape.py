"""Shape-based distance via normalized cross-correlation, and k-Shape clustering.

SBD(x, y) = 1 - max_s NCC(x, y; s), with the cross-correlation maximized
over all linear (zero-padded) shifts and normalized by the product of the
series norms.  Centroids are leading eigenvectors of the shift-aligned,
mean-centered scatter matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset

_NORM_EPS = 1e-12


class DegenerateSeriesError(ValueError):
    """Raised when a series has (near-)zero norm and no correlation is defined."""


def _norm_checked(arr: np.ndarray, what: str = "series") -> float:
    nrm = float(np.linalg.norm(arr))
    if nrm < _NORM_EPS:
        raise DegenerateSeriesError(f"degenerate {what}: zero norm")
    return nrm


def _cross_correlation(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """cc[k] = sum_u x[u] * y[u + s] for shifts s = k - (m-1), s in (-m, m)."""
    m = x.shape[0]
    size = 1 << (2 * m - 2).bit_length()
    fx = np.fft.rfft(x, size)
    fy = np.fft.rfft(y, size)
    full = np.fft.irfft(np.conj(fx) * fy, size)
    return np.concatenate((full[size - (m - 1):], full[:m]))


def ncc_max(x, y) -> tuple[float, int]:
    """Peak coefficient-normalized cross-correlation and its shift.

    The returned shift s is the displacement of y relative to x: if y equals
    x delayed by s samples (zero-padded), the peak sits at s.  Ties resolve
    to the smallest shift index.
    """
    xa = np.ascontiguousarray(x, dtype=np.float64)
    ya = np.ascontiguousarray(y, dtype=np.float64)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise ValueError("ncc_max needs two equal-length 1-D series")
    m = xa.shape[0]
    denom = _norm_checked(xa) * _norm_checked(ya)
    cc = _cross_correlation(xa, ya) / denom
    k = int(np.argmax(cc))
    return float(cc[k]), k - (m - 1)


def sbd(x, y) -> float:
    """Shape-based distance in [0, 2]: 1 minus the peak normalized cross-correlation."""
    value, _ = ncc_max(x, y)
    return 1.0 - value


def shift_series(y: np.ndarray, s: int) -> np.ndarray:
    """Translate y by s samples with zero padding (positive s delays y)."""
    m = y.shape[0]
    out = np.zeros_like(y)
    if s >= 0:
        out[s:] = y[: m - s]
    else:
        out[: m + s] = y[-s:]
    return out


def align_to(ref: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Shift y so its correlation with ref is maximal."""
    _, s = ncc_max(ref, y)
    return shift_series(y, -s)


def _znorm_rows(rows: np.ndarray) -> np.ndarray:
    mu = rows.mean(axis=1, keepdims=True)
    sd = rows.std(axis=1, keepdims=True)
    sd = np.where(sd < _NORM_EPS, 1.0, sd)
    return (rows - mu) / sd


def extract_centroid(members: np.ndarray, prev: np.ndarray | None = None,
                     tol: float = 1e-8, max_iter: int = 300) -> np.ndarray:
    """Shape centroid of a stack of series: unit-norm, zero-mean.

    Members are aligned to the previous centroid (skipped when there is
    none), z-normalized, and the leading eigenvector of the mean-centered
    scatter matrix is found by power iteration.  The sign is chosen to keep
    a non-negative correlation with the previous centroid (with the first
    member as tie-breaker when there is none).
    """
    rows = np.atleast_2d(np.asarray(members, dtype=np.float64))
    m = rows.shape[1]
    has_prev = prev is not None and np.linalg.norm(prev) >= _NORM_EPS
    if has_prev:
        rows = np.vstack([align_to(prev, row) for row in rows])
    rows = _znorm_rows(rows)

    scatter = rows.T @ rows
    # center: M = Q S Q with Q = I - (1/m) 1 1^T, applied without forming Q
    scatter -= scatter.mean(axis=0, keepdims=True)
    scatter -= scatter.mean(axis=1, keepdims=True)

    # start off the previous centroid (or the first member): both live in the
    # zero-mean subspace the centered scatter acts on
    v = np.asarray(prev, dtype=np.float64).copy() if has_prev else rows[0].copy()
    v -= v.mean()
    nrm = np.linalg.norm(v)
    v = np.full(m, 1.0 / np.sqrt(m)) if nrm < _NORM_EPS else v / nrm
    for _ in range(max_iter):
        w = scatter @ v
        nrm = np.linalg.norm(w)
        if nrm < _NORM_EPS:
            # scatter annihilated the start vector; restart off the first member
            w = rows[0] - rows[0].mean()
            nrm = np.linalg.norm(w)
            if nrm < _NORM_EPS:
                return np.zeros(m)
        w /= nrm
        if np.linalg.norm(w - v) < tol or np.linalg.norm(w + v) < tol:
            v = w
            break
        v = w

    reference = prev if has_prev else rows[0]
    if float(reference @ v) < 0:
        v = -v
    v = v - v.mean()
    nrm = np.linalg.norm(v)
    return v / nrm if nrm >= _NORM_EPS else np.zeros(m)


@dataclass(frozen=True)
class KShapeResult:
    assignment: np.ndarray          # instance -> cluster in [0, k)
    centroids: np.ndarray           # (k, m), unit-norm zero-mean rows
    iterations: int


def _series_matrix(ds) -> np.ndarray:
    if isinstance(ds, Dataset):
        return ds.values
    return np.atleast_2d(np.asarray(ds, dtype=np.float64))


def kshape(ds, k: int, rng_seed: int = 0, max_iter: int = 100) -> KShapeResult:
    """k-Shape clustering: alternate SBD assignment and shape-centroid extraction.

    Expects z-normalized series.  Starts from a random assignment drawn from
    ``rng_seed``; empty clusters are reseeded with the instance farthest from
    its own centroid.  Deterministic for a fixed seed.
    """
    data = _series_matrix(ds)
    n, m = data.shape
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    rng = np.random.default_rng(rng_seed)
    assignment = rng.integers(0, k, size=n)
    centroids = np.zeros((k, m))

    iterations = 0
    for iterations in range(1, max_iter + 1):
        for c in range(k):
            members = data[assignment == c]
            if members.shape[0] == 0:
                continue
            centroids[c] = extract_centroid(members, centroids[c])

        # distance of every instance to every centroid (1 - peak NCC)
        dist = np.empty((n, k))
        for c in range(k):
            if np.linalg.norm(centroids[c]) < _NORM_EPS:
                dist[:, c] = np.inf
                continue
            for i in range(n):
                dist[i, c] = 1.0 - ncc_max(centroids[c], data[i])[0]
        new_assignment = dist.argmin(axis=1)

        new_assignment = _repair_empty(new_assignment, dist, k)
        if np.array_equal(new_assignment, assignment):
            break
        assignment = new_assignment

    return KShapeResult(assignment, centroids.copy(), iterations)


def _repair_empty(assignment: np.ndarray, dist: np.ndarray, k: int) -> np.ndarray:
    """Move, per empty cluster, the instance farthest from its own centroid."""
    assignment = assignment.copy()
    for c in range(k):
        if np.any(assignment == c):
            continue
        counts = np.bincount(assignment, minlength=k)
        movable = counts[assignment] > 1
        own = dist[np.arange(assignment.shape[0]), assignment]
        own = np.where(movable & np.isfinite(own), own, -np.inf)
        donor = int(np.argmax(own))
        assignment[donor] = c
    return assignment


def sbd_representative(members, ds) -> int:
    """Member index closest (by SBD) to the shape centroid of the member set."""
    idx = np.asarray(list(members), dtype=np.intp)
    if idx.shape[0] == 0:
        raise ValueError("members must be non-empty")
    data = _series_matrix(ds)
    if idx.shape[0] == 1:
        return int(idx[0])
    centroid = extract_centroid(data[idx])
    best, best_d = int(idx[0]), np.inf
    for i in idx:
        d = sbd(data[i], centroid)
        if d < best_d - 1e-15 or (abs(d - best_d) <= 1e-15 and i < best):
            best, best_d = int(i), d
    return best
