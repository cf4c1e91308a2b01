"""Banded dynamic time warping, pairwise distance matrices, and the distance-to-affinity map."""

from __future__ import annotations

import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .data import Dataset, as_series

_MAGIC = b"TSDMAT01"


@dataclass(frozen=True)
class WarpingWindow:
    """Sakoe-Chiba band width as a fraction of series length; ``None`` = unconstrained."""

    fraction: float | None = 0.1

    def __post_init__(self):
        if self.fraction is not None and not 0.0 <= self.fraction <= 1.0:
            raise ValueError(f"window fraction must be in [0, 1], got {self.fraction}")

    @classmethod
    def full(cls) -> "WarpingWindow":
        return cls(None)

    @classmethod
    def parse(cls, text: str) -> "WarpingWindow":
        if text.strip().lower() == "full":
            return cls.full()
        return cls(float(text))

    @property
    def is_full(self) -> bool:
        return self.fraction is None

    def radius(self, m: int) -> int:
        """Band half-width in samples; the diagonal is always feasible."""
        if self.fraction is None:
            return m
        return max(1, math.ceil(self.fraction * m))

    def __str__(self) -> str:
        return "full" if self.fraction is None else str(self.fraction)


def cdtw(x, y, window: WarpingWindow = WarpingWindow()) -> float:
    """Banded DTW distance: sqrt of the minimal accumulated squared difference.

    Series must have equal length; the band always contains the diagonal, so
    the result never exceeds the Euclidean distance.
    """
    xa = as_series(x)
    ya = as_series(y)
    if xa.shape[0] != ya.shape[0]:
        raise ValueError(f"series lengths differ: {xa.shape[0]} vs {ya.shape[0]}")
    return float(_kernels.band_dtw(xa, ya, window.radius(xa.shape[0])))


@dataclass(frozen=True)
class DistanceMatrix:
    """Dense symmetric pairwise distances with a zero diagonal."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("distance matrix must be square")
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def save(self, path) -> None:
        """Binary layout: 8-byte magic, u64 n, row-major lower triangle of f64."""
        n = self.n
        tri = self.values[np.tril_indices(n)]
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<Q", n))
            fh.write(tri.astype("<f8").tobytes())

    @classmethod
    def load(cls, path) -> "DistanceMatrix":
        raw = Path(path).read_bytes()
        if len(raw) < 16 or raw[:8] != _MAGIC:
            raise ValueError("not a distance matrix file (bad magic)")
        (n,) = struct.unpack("<Q", raw[8:16])
        expect = n * (n + 1) // 2
        tri = np.frombuffer(raw[16:], dtype="<f8")
        if tri.shape[0] != expect:
            raise ValueError(
                f"truncated distance matrix: {tri.shape[0]} entries, expected {expect}"
            )
        out = np.zeros((n, n))
        out[np.tril_indices(n)] = tri
        out = out + np.tril(out, -1).T
        return cls(out)

    def save_csv(self, path) -> None:
        np.savetxt(path, self.values, delimiter=",")


@dataclass(frozen=True)
class AffinityMatrix:
    """exp(-gamma * d) applied elementwise to a distance matrix."""

    values: np.ndarray
    gamma: float

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def submatrix(self, indices) -> np.ndarray:
        idx = np.asarray(indices, dtype=np.intp)
        return self.values[np.ix_(idx, idx)]


def _pair_distance(data: np.ndarray, i: int, j: int, radius: int) -> float:
    return _kernels.band_dtw(data[i], data[j], radius)


def distance_matrix(ds: Dataset | np.ndarray, window: WarpingWindow = WarpingWindow(),
                    workers: int = 1) -> DistanceMatrix:
    """All-pairs banded DTW over the upper triangle, mirrored into a symmetric matrix.

    Each (i, j) cell is written exactly once, so the result is identical for
    any ``workers`` setting.
    """
    data = ds.values if isinstance(ds, Dataset) else np.ascontiguousarray(ds, dtype=np.float64)
    n, m = data.shape
    if n < 2:
        raise ValueError("need at least 2 series")
    radius = window.radius(m)
    out = np.zeros((n, n))
    if workers <= 1:
        for i in range(n):
            for j in range(i + 1, n):
                out[i, j] = _pair_distance(data, i, j, radius)
    else:
        # oversplit rows so early (pair-heavy) chunks amortize across workers
        bounds = np.unique(np.linspace(0, n, workers * 4 + 1).astype(int))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_kernels.band_dtw_block, data, radius, out, int(a), int(b))
                for a, b in zip(bounds[:-1], bounds[1:])
            ]
            for fut in futures:
                fut.result()
    out = out + out.T
    return DistanceMatrix(out)


def to_affinity(dm: DistanceMatrix, gamma: float = 0.5) -> AffinityMatrix:
    """Map distances to similarities in (0, 1]: a = exp(-gamma * d)."""
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    return AffinityMatrix(np.exp(-gamma * dm.values), gamma)
