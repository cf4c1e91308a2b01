"""Iterative super-instance refinement driven by pairwise must-link/cannot-link queries.

The engine keeps a three-level hierarchy: instances belong to
super-instances, super-instances belong to clusters.  Each iteration takes
the largest splittable super-instance, probes constraints to pick a split
level, refines it with the configured splitter (spectral over a global DTW
affinity, or k-Shape over raw series), wraps the children in singleton
clusters, and then queries/derives pairwise cluster relations until all are
known or the budget runs out.  Only training instances are ever queried.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .constraints import (BudgetExhausted, ConstraintStore, Constraint,
                          InconsistentConstraintError, Origin, Relation)
from .data import Dataset
from .dtw import AffinityMatrix, DistanceMatrix, WarpingWindow, distance_matrix, to_affinity
from .oracle import SessionAborted
from .shape import kshape, sbd, sbd_representative
from .spectral import SpectralParams, spectral_cluster


class RefinerKind(Enum):
    DTW_SPECTRAL = "dtw-spectral"
    KSHAPE = "kshape"


@dataclass(frozen=True)
class EngineConfig:
    refiner: RefinerKind = RefinerKind.DTW_SPECTRAL
    window: WarpingWindow = WarpingWindow(0.1)
    gamma: float = 0.5
    budget: int = 50
    rng_seed: int = 0
    normalize: bool = True
    kmeans_restarts: int = 10
    kshape_max_iter: int = 100

    def __post_init__(self):
        if isinstance(self.refiner, str):
            object.__setattr__(self, "refiner", RefinerKind(self.refiner))
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")

    def to_dict(self) -> dict:
        return {
            "refiner": self.refiner.value,
            "window": str(self.window),
            "gamma": self.gamma,
            "budget": self.budget,
            "rng_seed": self.rng_seed,
            "normalize": self.normalize,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EngineConfig":
        d = dict(d)
        if "window" in d:
            d["window"] = WarpingWindow.parse(str(d["window"]))
        return cls(**{k: v for k, v in d.items() if k in cls.__dataclass_fields__})


@dataclass
class SuperInstance:
    sid: int
    members: np.ndarray          # sorted instance indices
    train_members: np.ndarray    # sorted, non-empty subset of members
    representative: int          # always a training instance


@dataclass(frozen=True)
class Clustering:
    assignment: np.ndarray              # instance -> cluster index
    clusters: tuple[tuple[int, ...], ...]  # per-cluster sorted instance indices

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)


@dataclass
class RunResult:
    clustering: Clustering
    query_log: list[Constraint]         # queried constraints, in order
    constraint_log: list[Constraint]    # queried + derived decision events
    snapshots: list[np.ndarray]         # assignment after 0..queries_used answers
    queries_used: int
    aborted: bool
    converged: bool
    view: dict


class EngineSessionError(RuntimeError):
    """Engine stopped on an inconsistent oracle; carries the constraint log."""

    def __init__(self, message: str, log: list[Constraint]):
        super().__init__(message)
        self.log = log


def medoid_of(indices, distances: np.ndarray) -> int:
    """Index among ``indices`` minimizing the distance sum to the others;

    ties break to the lowest index."""
    idx = np.asarray(list(indices), dtype=np.intp)
    if idx.size == 0:
        raise ValueError("need at least one index")
    if idx.size == 1:
        return int(idx[0])
    sub = distances[np.ix_(idx, idx)]
    sums = sub.sum(axis=1)
    order = np.lexsort((idx, sums))
    return int(idx[order[0]])


class _DtwSpectralSplitter:
    """Splits by normalized spectral clustering on a fixed global affinity."""

    def __init__(self, affinity: AffinityMatrix, distances: DistanceMatrix,
                 kmeans_restarts: int):
        self.affinity = affinity
        self.distances = distances.values
        self.kmeans_restarts = kmeans_restarts

    def split(self, members: np.ndarray, k: int, seed: int) -> np.ndarray:
        params = SpectralParams(k=k, kmeans_restarts=self.kmeans_restarts, rng_seed=seed)
        return spectral_cluster(self.affinity.submatrix(members), params)

    def representative(self, train_members: np.ndarray) -> int:
        return medoid_of(train_members, self.distances)

    def distance(self, i: int, j: int) -> float:
        return float(self.distances[i, j])


class _KShapeSplitter:
    """Splits by k-Shape over the z-normalized series; distances are SBD on demand."""

    def __init__(self, data: np.ndarray, max_iter: int):
        self.data = data
        self.max_iter = max_iter
        self._sbd_cache: dict[tuple[int, int], float] = {}

    def split(self, members: np.ndarray, k: int, seed: int) -> np.ndarray:
        result = kshape(self.data[members], k, rng_seed=seed, max_iter=self.max_iter)
        return result.assignment

    def representative(self, train_members: np.ndarray) -> int:
        return sbd_representative(train_members, self.data)

    def distance(self, i: int, j: int) -> float:
        if i == j:
            return 0.0
        key = (i, j) if i < j else (j, i)
        if key not in self._sbd_cache:
            self._sbd_cache[key] = sbd(self.data[i], self.data[j])
        return self._sbd_cache[key]


class Engine:
    def __init__(self, ds: Dataset, config: EngineConfig, oracle,
                 train_mask=None, distances: DistanceMatrix | None = None,
                 on_query=None):
        self.ds = ds
        self.config = config
        self.oracle = oracle
        self.on_query = on_query
        n = ds.n

        if train_mask is None:
            self.is_train = np.ones(n, dtype=bool)
        else:
            mask = np.asarray(train_mask)
            if mask.dtype == bool:
                self.is_train = mask.copy()
            else:
                self.is_train = np.zeros(n, dtype=bool)
                self.is_train[np.asarray(mask, dtype=np.intp)] = True
        if not self.is_train.any():
            raise ValueError("train mask selects no instances")

        znormed = ds.z_normalized().values
        if config.refiner is RefinerKind.DTW_SPECTRAL:
            basis = znormed if config.normalize else ds.values
            if distances is None:
                distances = distance_matrix(basis, config.window)
            affinity = to_affinity(distances, config.gamma)
            self.splitter = _DtwSpectralSplitter(affinity, distances, config.kmeans_restarts)
        else:
            self.splitter = _KShapeSplitter(znormed, config.kshape_max_iter)

        self.store = ConstraintStore(config.budget)
        self.rng = np.random.default_rng(config.rng_seed)
        self._iter_seed = 0
        self._mutex = threading.Lock()

        self._next_sid = 0
        self._next_cid = 0
        self.sis: dict[int, SuperInstance] = {}
        self.clusters: dict[int, set[int]] = {}
        self.snapshots: list[np.ndarray] = []
        self._unsplittable: set[int] = set()

        root = self._new_super_instance(np.arange(n, dtype=np.intp))
        self._new_cluster({root.sid})

    # -- state helpers ------------------------------------------------------

    def _new_super_instance(self, members: np.ndarray) -> SuperInstance:
        members = np.sort(np.asarray(members, dtype=np.intp))
        train = members[self.is_train[members]]
        if train.size == 0:
            raise ValueError("super-instance without training members")
        rep = self.splitter.representative(train)
        si = SuperInstance(self._next_sid, members, train, rep)
        self.sis[si.sid] = si
        self._next_sid += 1
        return si

    def _new_cluster(self, sids: set[int]) -> int:
        cid = self._next_cid
        self.clusters[cid] = set(sids)
        self._next_cid += 1
        return cid

    def _train_subset(self, members: np.ndarray) -> np.ndarray:
        return members[self.is_train[members]]

    def _cluster_of(self, sid: int) -> int:
        for cid, sids in self.clusters.items():
            if sid in sids:
                return cid
        raise KeyError(f"super-instance {sid} not in any cluster")

    def current_assignment(self) -> np.ndarray:
        out = np.full(self.ds.n, -1, dtype=np.intp)
        for slot, cid in enumerate(sorted(self.clusters)):
            for sid in self.clusters[cid]:
                out[self.sis[sid].members] = slot
        return out

    def current_clustering(self) -> Clustering:
        groups = []
        for cid in sorted(self.clusters):
            members = np.concatenate([self.sis[sid].members for sid in self.clusters[cid]])
            groups.append(tuple(int(i) for i in np.sort(members)))
        return Clustering(self.current_assignment(), tuple(groups))

    def view(self) -> dict:
        with self._mutex:
            clusters = []
            for cid in sorted(self.clusters):
                sis = []
                for sid in sorted(self.clusters[cid]):
                    si = self.sis[sid]
                    sis.append({
                        "id": si.sid,
                        "members": [int(i) for i in si.members],
                        "train_members": [int(i) for i in si.train_members],
                        "representative": int(si.representative),
                    })
                clusters.append({"id": cid, "super_instances": sis})
            return {
                "clusters": clusters,
                "queries_used": self.store.queries_used,
                "budget": self.store.budget,
            }

    def _validate_state(self) -> None:
        seen = np.zeros(self.ds.n, dtype=bool)
        clustered_sids: set[int] = set()
        for si in self.sis.values():
            if seen[si.members].any():
                raise AssertionError("super-instances overlap")
            seen[si.members] = True
            if si.train_members.size == 0 or not self.is_train[si.representative]:
                raise AssertionError("representative must be a training member")
            if si.representative not in si.train_members:
                raise AssertionError("representative outside its super-instance")
        if not seen.all():
            raise AssertionError("super-instances do not cover the dataset")
        for sids in self.clusters.values():
            if not sids:
                raise AssertionError("empty cluster")
            if clustered_sids & sids:
                raise AssertionError("clusters overlap")
            clustered_sids |= sids
        if clustered_sids != set(self.sis):
            raise AssertionError("clusters do not partition the super-instances")

    # -- querying -----------------------------------------------------------

    def _ensure_snapshot(self) -> None:
        if len(self.snapshots) == self.store.queries_used:
            self.snapshots.append(self.current_assignment())

    def _consult(self, i: int, j: int) -> Relation:
        """Relation of a pair at a decision point: derived when possible, else queried."""
        known = self.store.relation_of(i, j)
        if known is not None:
            self.store.note_derived(i, j, known)
            return known
        if self.store.budget_remaining() <= 0:
            raise BudgetExhausted("query budget exhausted")
        self._ensure_snapshot()
        if self.on_query is not None:
            self.on_query(int(i), int(j), self.store.queries_used)
        answer = self.oracle.answer(int(i), int(j))
        self.store.record(i, j, answer, Origin.QUERIED)
        return answer

    # -- splitting ----------------------------------------------------------

    def _partition_members(self, members: np.ndarray, k: int, seed: int) -> list[np.ndarray]:
        """Split members into at most k groups, each holding >= 1 training member."""
        train = self._train_subset(members)
        if train.size == 0:
            raise ValueError("cannot partition a set without training members")
        k = min(k, int(members.size))
        if k < 2 or train.size == 1:
            return [members]

        labels = self.splitter.split(members, k, seed)
        groups = [members[labels == c] for c in range(int(labels.max()) + 1)]
        groups = [g for g in groups if g.size]
        with_train = [g for g in groups if self._train_subset(g).size]
        orphans = [g for g in groups if not self._train_subset(g).size]

        if len(with_train) < 2:
            # the split starved all-but-one child of training members; re-split
            # the training subset instead and attach test members to the
            # nearest training group
            kt = min(k, int(train.size))
            tlabels = self.splitter.split(train, kt, seed)
            tgroups = [train[tlabels == c] for c in range(int(tlabels.max()) + 1)]
            tgroups = [g for g in tgroups if g.size]
            reps = [self.splitter.representative(g) for g in tgroups]
            buckets: list[list[int]] = [list(g) for g in tgroups]
            for x in members[~self.is_train[members]]:
                dists = [self.splitter.distance(int(x), rep) for rep in reps]
                buckets[int(np.argmin(dists))].append(int(x))
            merged = [np.sort(np.asarray(b, dtype=np.intp)) for b in buckets]
            return sorted(merged, key=lambda g: int(g.min()))

        if orphans:
            reps = [self.splitter.representative(self._train_subset(g)) for g in with_train]
            absorbed = [list(g) for g in with_train]
            for orphan in orphans:
                means = [
                    float(np.mean([self.splitter.distance(int(x), rep) for x in orphan]))
                    for rep in reps
                ]
                absorbed[int(np.argmin(means))].extend(int(x) for x in orphan)
            with_train = [np.sort(np.asarray(b, dtype=np.intp)) for b in absorbed]

        return sorted(with_train, key=lambda g: int(g.min()))

    def _determine_split_level(self, si: SuperInstance, seed: int) -> int:
        """Probe with binary splits: each cannot-link answer doubles the level."""
        cannot_links = 0
        current = si.members
        while True:
            if current.size < 2 or self._train_subset(current).size < 2:
                break
            halves = self._partition_members(current, 2, seed)
            if len(halves) < 2:
                break
            reps = [self.splitter.representative(self._train_subset(h)) for h in halves]
            answer = self._consult(reps[0], reps[1])
            if answer is Relation.MUST_LINK:
                break
            cannot_links += 1
            halves.sort(key=lambda h: (-h.size, -self._train_subset(h).size, int(h.min())))
            current = halves[0]
        return min(2 ** max(cannot_links, 1), int(si.members.size))

    # -- cluster relations ----------------------------------------------------

    def _cluster_relation(self, cid_a: int, cid_b: int):
        """Relation evidenced by any cross super-instance representative pair."""
        cl_pair = None
        for sa in sorted(self.clusters[cid_a]):
            for sb in sorted(self.clusters[cid_b]):
                ra, rb = self.sis[sa].representative, self.sis[sb].representative
                rel = self.store.relation_of(ra, rb)
                if rel is Relation.MUST_LINK:
                    return Relation.MUST_LINK, (ra, rb)
                if rel is Relation.CANNOT_LINK and cl_pair is None:
                    cl_pair = (ra, rb)
        if cl_pair is not None:
            return Relation.CANNOT_LINK, cl_pair
        return None, None

    def _closest_super_instances(self, cid_a: int, cid_b: int) -> tuple[float, int, int]:
        best = (np.inf, -1, -1)
        for sa in sorted(self.clusters[cid_a]):
            for sb in sorted(self.clusters[cid_b]):
                d = self.splitter.distance(self.sis[sa].representative,
                                           self.sis[sb].representative)
                if d < best[0]:
                    best = (d, sa, sb)
        return best

    def _merge_clusters(self, cid_a: int, cid_b: int) -> int:
        keep, drop = (cid_a, cid_b) if cid_a < cid_b else (cid_b, cid_a)
        with self._mutex:
            self.clusters[keep] |= self.clusters.pop(drop)
        return keep

    def _apply_derived_merges(self) -> None:
        changed = True
        while changed:
            changed = False
            cids = sorted(self.clusters)
            for ai in range(len(cids)):
                for bi in range(ai + 1, len(cids)):
                    rel, pair = self._cluster_relation(cids[ai], cids[bi])
                    if rel is Relation.MUST_LINK:
                        self.store.note_derived(pair[0], pair[1], Relation.MUST_LINK)
                        self._merge_clusters(cids[ai], cids[bi])
                        changed = True
                        break
                if changed:
                    break

    def _determine_relations(self) -> None:
        while True:
            self._apply_derived_merges()
            cids = sorted(self.clusters)
            unknown: list[tuple[float, int, int, int, int]] = []
            for ai in range(len(cids)):
                for bi in range(ai + 1, len(cids)):
                    rel, _ = self._cluster_relation(cids[ai], cids[bi])
                    if rel is None:
                        d, sa, sb = self._closest_super_instances(cids[ai], cids[bi])
                        unknown.append((d, cids[ai], cids[bi], sa, sb))
            if not unknown:
                return
            d, ca, cb, sa, sb = min(unknown)
            answer = self._consult(self.sis[sa].representative, self.sis[sb].representative)
            if answer is Relation.MUST_LINK:
                self._merge_clusters(ca, cb)

    # -- main loop ------------------------------------------------------------

    def _splittable(self) -> list[int]:
        return [
            sid for sid, si in self.sis.items()
            if sid not in self._unsplittable
            and si.members.size >= 2 and si.train_members.size >= 2
        ]

    def run(self) -> RunResult:
        aborted = False
        exhausted = False
        try:
            while True:
                self._validate_state()
                candidates = self._splittable()
                if not candidates or self.store.budget_remaining() <= 0:
                    break
                target = min(candidates,
                             key=lambda sid: (-self.sis[sid].members.size,
                                              self.sis[sid].representative))
                si = self.sis[target]
                seed = int(self.rng.integers(2 ** 31))
                k = self._determine_split_level(si, seed)
                groups = self._partition_members(si.members, k, seed)
                if len(groups) < 2:
                    self._unsplittable.add(target)
                    continue
                with self._mutex:
                    home = self._cluster_of(target)
                    self.clusters[home].discard(target)
                    if not self.clusters[home]:
                        del self.clusters[home]
                    del self.sis[target]
                    children = [self._new_super_instance(g) for g in groups]
                    for child in children:
                        self._new_cluster({child.sid})
                self._determine_relations()
        except BudgetExhausted:
            exhausted = True
        except SessionAborted:
            aborted = True
        except InconsistentConstraintError as err:
            raise EngineSessionError(
                f"oracle answers are inconsistent: {err}", self.store.log
            ) from err

        self._validate_state()
        while len(self.snapshots) <= self.store.queries_used:
            self.snapshots.append(self.current_assignment())

        query_log = [c for c in self.store.log if c.origin is Origin.QUERIED]
        return RunResult(
            clustering=self.current_clustering(),
            query_log=query_log,
            constraint_log=list(self.store.log),
            snapshots=list(self.snapshots),
            queries_used=self.store.queries_used,
            aborted=aborted,
            converged=not aborted and not exhausted,
            view=self.view(),
        )


def run(ds: Dataset, config: EngineConfig, oracle, train_mask=None,
        distances: DistanceMatrix | None = None, on_query=None) -> RunResult:
    """One full engine run; see :class:`Engine`."""
    return Engine(ds, config, oracle, train_mask=train_mask,
                  distances=distances, on_query=on_query).run()
