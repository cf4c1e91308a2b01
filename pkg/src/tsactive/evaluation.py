"""Adjusted Rand Index, cross-validated query-curve evaluation, and parameter sweeps."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .dtw import DistanceMatrix, WarpingWindow, distance_matrix
from .engine import EngineConfig, RefinerKind, run
from .oracle import LabelOracle
from .shape import kshape


def _comb2(x: int) -> int:
    return x * (x - 1) // 2


def ari(partition_a, partition_b) -> float:
    """Adjusted Rand Index between two labelings of the same instances.

    1 for identical partitions up to relabeling, about 0 for independent
    ones.  The doubly degenerate cases (both single-cluster, or both
    all-singletons) return 1.
    """
    a = np.asarray(partition_a)
    b = np.asarray(partition_b)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("partitions must be equal-length 1-D label vectors")
    n = a.shape[0]
    if n < 2:
        raise ValueError("need at least 2 instances")

    _, a_idx = np.unique(a, return_inverse=True)
    _, b_idx = np.unique(b, return_inverse=True)
    contingency: dict[tuple[int, int], int] = {}
    for x, y in zip(a_idx, b_idx):
        contingency[(int(x), int(y))] = contingency.get((int(x), int(y)), 0) + 1
    a_counts = np.bincount(a_idx)
    b_counts = np.bincount(b_idx)

    sum_cells = sum(_comb2(c) for c in contingency.values())
    sum_a = sum(_comb2(int(c)) for c in a_counts)
    sum_b = sum(_comb2(int(c)) for c in b_counts)
    total = _comb2(n)

    expected = sum_a * sum_b / total
    max_index = (sum_a + sum_b) / 2.0
    if max_index == expected:
        # both partitions trivial (all one cluster or all singletons)
        return 1.0
    return float((sum_cells - expected) / (max_index - expected))


@dataclass(frozen=True)
class FoldSplit:
    """Stratified fold assignment: instance -> fold index."""

    folds: np.ndarray
    n_folds: int
    rng_seed: int
    stratified: bool = True

    @classmethod
    def stratified_folds(cls, labels, n_folds: int = 10, rng_seed: int = 0) -> "FoldSplit":
        labels = list(labels)
        n = len(labels)
        if n < n_folds:
            raise ValueError(f"cannot make {n_folds} folds from {n} instances")
        rng = np.random.default_rng(rng_seed)
        folds = np.full(n, -1, dtype=np.intp)
        cursor = 0
        for label in sorted(set(labels)):
            idx = np.array([i for i, l in enumerate(labels) if l == label], dtype=np.intp)
            rng.shuffle(idx)
            for pos, inst in enumerate(idx):
                folds[inst] = (cursor + pos) % n_folds
            cursor += idx.size
        return cls(folds, n_folds, rng_seed)

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.folds == fold)

    def train_mask(self, fold: int) -> np.ndarray:
        return self.folds != fold


@dataclass
class EvalResult:
    fold_curves: np.ndarray     # (n_folds, budget + 1)
    mean_curve: np.ndarray      # (budget + 1,)
    final_mean_ari: float
    queries_used: list[int]
    metadata: dict

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["fold", "query_count", "ari"])
            for f in range(self.fold_curves.shape[0]):
                for q in range(self.fold_curves.shape[1]):
                    writer.writerow([f, q, f"{self.fold_curves[f, q]:.6f}"])

    def summary(self) -> dict:
        return {
            "final_mean_ari": self.final_mean_ari,
            "mean_curve": [float(v) for v in self.mean_curve],
            "queries_used": self.queries_used,
            **self.metadata,
        }

    def save_summary(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.summary(), fh, indent=2)


def engine_distances(ds: Dataset, config: EngineConfig) -> DistanceMatrix | None:
    """Global DTW matrix on the engine's input basis; None for refiners that skip it."""
    if config.refiner is not RefinerKind.DTW_SPECTRAL:
        return None
    basis = ds.z_normalized().values if config.normalize else ds.values
    return distance_matrix(basis, config.window)


def evaluate(ds: Dataset, config: EngineConfig, folds: FoldSplit,
             distances: DistanceMatrix | None = None) -> EvalResult:
    """Cross-validated run: cluster everything, query only within the training fold,
    score the ARI of every per-query snapshot on the held-out instances."""
    if ds.labels is None:
        raise ValueError("evaluation requires labels")
    labels = np.asarray(ds.labels)
    if distances is None:
        distances = engine_distances(ds, config)

    budget = config.budget
    curves = np.zeros((folds.n_folds, budget + 1))
    used: list[int] = []
    for fold in range(folds.n_folds):
        test_idx = folds.test_indices(fold)
        result = run(ds, config, LabelOracle(ds.labels),
                     train_mask=folds.train_mask(fold), distances=distances)
        used.append(result.queries_used)
        for q in range(budget + 1):
            snap = result.snapshots[min(q, len(result.snapshots) - 1)]
            curves[fold, q] = ari(snap[test_idx], labels[test_idx])

    mean_curve = curves.mean(axis=0)
    return EvalResult(
        fold_curves=curves,
        mean_curve=mean_curve,
        final_mean_ari=float(mean_curve[-1]),
        queries_used=used,
        metadata={
            "n_folds": folds.n_folds,
            "fold_seed": folds.rng_seed,
            "stratified": folds.stratified,
            "config": config.to_dict(),
            "dataset": ds.name,
            "n": ds.n,
            "m": ds.m,
        },
    )


def sweep(ds: Dataset, base_config: EngineConfig, gammas, windows,
          folds: FoldSplit | None = None) -> tuple[np.ndarray, list[list[float]]]:
    """Grid of final mean ARIs over gamma x window settings."""
    from dataclasses import replace

    if folds is None:
        folds = FoldSplit.stratified_folds(ds.labels, rng_seed=base_config.rng_seed)
    grid = np.zeros((len(gammas), len(windows)))
    for wi, w in enumerate(windows):
        window = w if isinstance(w, WarpingWindow) else WarpingWindow.parse(str(w))
        config_w = replace(base_config, window=window)
        distances = engine_distances(ds, config_w)
        for gi, gamma in enumerate(gammas):
            config = replace(config_w, gamma=float(gamma))
            grid[gi, wi] = evaluate(ds, config, folds, distances=distances).final_mean_ari
    rows = [[float(v) for v in row] for row in grid]
    return grid, rows


def sweep_to_csv(grid: np.ndarray, gammas, windows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["gamma\\window"] + [str(w) for w in windows])
        for gi, gamma in enumerate(gammas):
            writer.writerow([gamma] + [f"{v:.6f}" for v in grid[gi]])


def kshape_baseline(ds: Dataset, k_true: int, rng_seed: int = 0) -> float:
    """Unsupervised k-Shape with the true cluster count, scored on all instances."""
    if ds.labels is None:
        raise ValueError("baseline requires labels")
    result = kshape(ds.z_normalized(), k_true, rng_seed=rng_seed)
    return ari(result.assignment, np.asarray(ds.labels))
