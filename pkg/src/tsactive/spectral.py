"""Normalized spectral clustering over a fixed affinity sub-matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SpectralParams:
    k: int
    eig_tolerance: float = 1e-10   # backend tolerance; the dense direct solver is exact
    kmeans_restarts: int = 10
    rng_seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.kmeans_restarts < 1:
            raise ValueError("kmeans_restarts must be >= 1")


def spectral_cluster(affinity: np.ndarray, params: SpectralParams) -> np.ndarray:
    """Partition the rows of a symmetric positive affinity matrix into k clusters.

    Normalizes the affinity by D^{-1/2} A D^{-1/2}, embeds into the top-k
    eigenvectors, row-normalizes, and runs restarted k-means.  All k clusters
    are non-empty and the result is deterministic for a fixed seed.
    """
    a = np.asarray(affinity, dtype=np.float64)
    n = a.shape[0]
    if a.ndim != 2 or a.shape[1] != n:
        raise ValueError("affinity must be square")
    k = params.k
    if k > n:
        raise ValueError(f"k={k} exceeds subset size {n}")
    if k == n:
        return np.arange(n, dtype=np.intp)
    if k == 1:
        return np.zeros(n, dtype=np.intp)

    degree = a.sum(axis=1)
    inv_sqrt = 1.0 / np.sqrt(degree)
    sym = a * inv_sqrt[:, None] * inv_sqrt[None, :]
    sym = (sym + sym.T) / 2.0
    _, vecs = np.linalg.eigh(sym)
    embedding = vecs[:, -k:]

    norms = np.linalg.norm(embedding, axis=1)
    small = norms < 1e-12
    if np.any(small):
        embedding = embedding.copy()
        embedding[small] = 0.0
        embedding[small, 0] = 1.0
        norms = np.linalg.norm(embedding, axis=1)
    embedding = embedding / norms[:, None]

    rng = np.random.default_rng(params.rng_seed)
    labels = _kmeans(embedding, k, params.kmeans_restarts, rng)
    return labels


def _kmeans(points: np.ndarray, k: int, restarts: int, rng: np.random.Generator) -> np.ndarray:
    best_labels = None
    best_inertia = np.inf
    for _ in range(restarts):
        centers = _kmeanspp_seed(points, k, rng)
        labels, inertia = _lloyd(points, centers, k)
        if inertia < best_inertia - 1e-15:
            best_inertia = inertia
            best_labels = labels
    return best_labels


def _kmeanspp_seed(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    first = int(rng.integers(n))
    centers[0] = points[first]
    closest = ((points - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = closest.sum()
        if total <= 0:
            nxt = int(rng.integers(n))
        else:
            target = rng.random() * total
            nxt = int(np.searchsorted(np.cumsum(closest), target))
            nxt = min(nxt, n - 1)
        centers[c] = points[nxt]
        closest = np.minimum(closest, ((points - centers[c]) ** 2).sum(axis=1))
    return centers


def _lloyd(points: np.ndarray, centers: np.ndarray, k: int,
           max_iter: int = 300) -> tuple[np.ndarray, float]:
    n = points.shape[0]
    labels = np.full(n, -1, dtype=np.intp)
    for _ in range(max_iter):
        d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = d2.argmin(axis=1)
        new_labels = _fill_empty(new_labels, d2, k)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(k):
            mask = labels == c
            centers[c] = points[mask].mean(axis=0)
    d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    inertia = float(d2[np.arange(n), labels].sum())
    return labels, inertia


def _fill_empty(labels: np.ndarray, d2: np.ndarray, k: int) -> np.ndarray:
    """Give each empty cluster the point farthest from its current center."""
    labels = labels.copy()
    for c in range(k):
        if np.any(labels == c):
            continue
        counts = np.bincount(labels, minlength=k)
        movable = counts[labels] > 1
        own = d2[np.arange(labels.shape[0]), labels]
        own = np.where(movable, own, -np.inf)
        labels[int(np.argmax(own))] = c
    return labels
