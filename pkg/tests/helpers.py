"""Shared test fixtures: scripted oracles, a deterministic stub splitter, datasets."""

from __future__ import annotations

import numpy as np

from tsactive import Dataset, Relation


class ScriptedOracle:
    """Answers from a fixed list, ignoring which pair is asked."""

    def __init__(self, answers):
        self.answers = list(answers)
        self.asked: list[tuple[int, int]] = []

    def answer(self, i, j):
        self.asked.append((i, j))
        if not self.answers:
            raise AssertionError("scripted oracle ran out of answers")
        return self.answers.pop(0)


class StubSplitter:
    """Splits sorted members into k contiguous chunks along given 1-D positions.

    Representative = lowest train index; distance = |position difference|.
    Makes engine control flow fully predictable in tests.
    """

    def __init__(self, positions, is_train):
        self.positions = np.asarray(positions, dtype=float)
        self.is_train = np.asarray(is_train, dtype=bool)

    def split(self, members, k, seed):
        members = np.asarray(members)
        order = np.argsort(self.positions[members], kind="stable")
        labels = np.empty(members.shape[0], dtype=np.intp)
        for ci, chunk in enumerate(np.array_split(np.arange(members.shape[0]), k)):
            labels[order[chunk]] = ci
        return labels

    def representative(self, train_members):
        return int(np.min(train_members))

    def distance(self, i, j):
        return float(abs(self.positions[i] - self.positions[j]))


def stub_engine(n, budget=50, positions=None, train=None, oracle=None):
    """Engine over a toy dataset with the stub splitter swapped in."""
    from tsactive import EngineConfig, Engine

    rng = np.random.default_rng(0)
    values = rng.standard_normal((n, 8))
    ds = Dataset(values)
    config = EngineConfig(budget=budget, rng_seed=0)
    engine = Engine(ds, config, oracle or ScriptedOracle([]), train_mask=train)
    positions = np.arange(n, dtype=float) if positions is None else positions
    engine.splitter = StubSplitter(positions, engine.is_train)
    engine.sis.clear()
    engine.clusters.clear()
    engine._next_sid = 0
    engine._next_cid = 0
    root = engine._new_super_instance(np.arange(n, dtype=np.intp))
    engine._new_cluster({root.sid})
    return engine


def pulse_dataset(blob_centers=(22.0, 64.0, 106.0), blob_labels=("up", "mid", "up"),
                  per_blob=8, m=128, width=5.0, noise=0.02, seed=0):
    """Gaussian bumps whose position carries the cluster structure.

    The first and last blobs share a label, so the target clustering has a
    cluster with two components separated by the middle blob.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(m, dtype=float)
    rows, labels = [], []
    for center, label in zip(blob_centers, blob_labels):
        for _ in range(per_blob):
            c = center + rng.uniform(-2.0, 2.0)
            rows.append(np.exp(-0.5 * ((t - c) / width) ** 2)
                        + noise * rng.standard_normal(m))
            labels.append(label)
    return Dataset(np.vstack(rows), tuple(labels), name="pulses")


def label_answers(labels):
    def answer(i, j):
        return Relation.MUST_LINK if labels[i] == labels[j] else Relation.CANNOT_LINK
    return answer
