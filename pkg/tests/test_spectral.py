import itertools

import numpy as np
import pytest

from tsactive import SpectralParams, spectral_cluster


def block_affinity(sizes, within=1.0, across=np.exp(-10), rng=None):
    """Affinity with near-1 blocks and tiny cross-block entries."""
    n = sum(sizes)
    a = np.full((n, n), across)
    start = 0
    for size in sizes:
        a[start:start + size, start:start + size] = within
        start += size
    if rng is not None:
        jitter = rng.uniform(-1e-3, 1e-3, size=(n, n))
        jitter = (jitter + jitter.T) / 2
        a = np.clip(a + jitter, 1e-12, 1.0)
    np.fill_diagonal(a, 1.0)
    return a


def partition_groups(labels):
    groups = {}
    for idx, lab in enumerate(labels):
        groups.setdefault(int(lab), set()).add(idx)
    return sorted(groups.values(), key=min)


class TestSpectralCluster:
    def test_two_blocks_recovered(self):
        a = block_affinity([4, 5])
        labels = spectral_cluster(a, SpectralParams(k=2, rng_seed=0))
        assert partition_groups(labels) == [set(range(4)), set(range(4, 9))]

    def test_block_partition_maximizes_within_affinity(self):
        # brute-force check over all 2-partitions: the block split is optimal,
        # so recovering it is the right answer (not an artifact of the solver)
        a = block_affinity([3, 3])
        n = 6

        def within_sum(mask):
            total = 0.0
            for i in range(n):
                for j in range(i + 1, n):
                    if mask[i] == mask[j]:
                        total += a[i, j]
            return total

        best_mask = max(
            (mask for mask in itertools.product([0, 1], repeat=n)
             if len(set(mask)) == 2),
            key=within_sum,
        )
        assert partition_groups(best_mask) == [set(range(3)), set(range(3, 6))]
        labels = spectral_cluster(a, SpectralParams(k=2, rng_seed=3))
        assert partition_groups(labels) == partition_groups(best_mask)

    def test_three_blocks(self):
        rng = np.random.default_rng(5)
        a = block_affinity([4, 4, 4], rng=rng)
        labels = spectral_cluster(a, SpectralParams(k=3, rng_seed=1))
        assert partition_groups(labels) == [set(range(4)), set(range(4, 8)),
                                            set(range(8, 12))]

    def test_subset_size_equals_k(self):
        a = block_affinity([2, 2])
        labels = spectral_cluster(a, SpectralParams(k=4, rng_seed=0))
        assert sorted(labels) == [0, 1, 2, 3]
        assert partition_groups(labels) == [{0}, {1}, {2}, {3}]

    def test_k_exceeds_subset_rejected(self):
        with pytest.raises(ValueError, match="exceeds"):
            spectral_cluster(np.ones((3, 3)), SpectralParams(k=4))

    def test_deterministic(self):
        rng = np.random.default_rng(7)
        a = block_affinity([5, 6], rng=rng)
        p = SpectralParams(k=2, rng_seed=11)
        first = spectral_cluster(a, p)
        second = spectral_cluster(a, p)
        assert np.array_equal(first, second)

    def test_every_cluster_nonempty_partition(self):
        rng = np.random.default_rng(9)
        d = np.abs(rng.standard_normal((10, 10)))
        d = (d + d.T) / 2
        np.fill_diagonal(d, 0)
        a = np.exp(-0.5 * d)
        for k in (2, 3, 4, 7):
            labels = spectral_cluster(a, SpectralParams(k=k, rng_seed=2))
            assert labels.shape == (10,)
            assert set(labels) == set(range(k))

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(13)
        a = block_affinity([4, 5], rng=rng)
        perm = rng.permutation(9)
        labels = spectral_cluster(a, SpectralParams(k=2, rng_seed=5))
        permuted = spectral_cluster(a[np.ix_(perm, perm)], SpectralParams(k=2, rng_seed=5))
        # same partition after undoing the permutation, up to relabeling
        original = partition_groups(labels)
        recovered = partition_groups([permuted[np.where(perm == i)[0][0]] for i in range(9)])
        assert original == recovered

    def test_identical_rows_still_split(self):
        # all-identical affinities force the empty-cluster repair path
        a = np.ones((5, 5))
        labels = spectral_cluster(a, SpectralParams(k=2, rng_seed=0))
        assert set(labels) == {0, 1}

    def test_embedding_row_normalization(self, monkeypatch):
        import tsactive.spectral as spectral_mod

        captured = {}
        original = spectral_mod._kmeans

        def spy(points, k, restarts, rng):
            captured["points"] = points.copy()
            return original(points, k, restarts, rng)

        monkeypatch.setattr(spectral_mod, "_kmeans", spy)
        rng = np.random.default_rng(17)
        a = block_affinity([3, 4], rng=rng)
        spectral_cluster(a, SpectralParams(k=2, rng_seed=0))
        norms = np.linalg.norm(captured["points"], axis=1)
        assert np.allclose(norms, 1.0, atol=1e-9)
