import numpy as np
import pytest

from tsactive import (CbfParams, Dataset, EngineConfig, Engine, LabelOracle,
                      Relation, WarpingWindow, ari, generate_cbf, medoid_of, run)
from tsactive.constraints import Origin

from helpers import ScriptedOracle, pulse_dataset, stub_engine

ML = Relation.MUST_LINK
CL = Relation.CANNOT_LINK


class TestMedoid:
    def test_three_point_example(self):
        d = np.array([[0.0, 1.0, 4.0],
                      [1.0, 0.0, 1.0],
                      [4.0, 1.0, 0.0]])
        assert medoid_of([0, 1, 2], d) == 1  # sums 5, 2, 5

    def test_singleton(self):
        assert medoid_of([3], np.zeros((5, 5))) == 3

    def test_tie_breaks_low(self):
        d = np.zeros((4, 4))
        assert medoid_of([2, 1, 3], d) == 1


class TestRepresentatives:
    def test_always_training_member(self):
        ds = generate_cbf(CbfParams(5, 64, 0.1, rng_seed=0))
        train = np.zeros(ds.n, dtype=bool)
        train[::2] = True
        result = run(ds, EngineConfig(budget=20, rng_seed=0),
                     LabelOracle(ds.labels), train_mask=train)
        for cluster in result.view["clusters"]:
            for si in cluster["super_instances"]:
                assert si["representative"] in si["train_members"]
                assert train[si["representative"]]


class TestDetermineSplitLevel:
    def test_first_must_link_gives_two(self):
        engine = stub_engine(8, oracle=ScriptedOracle([ML]))
        si = engine.sis[0]
        assert engine._determine_split_level(si, seed=0) == 2

    def test_two_cannot_links_give_four(self):
        engine = stub_engine(8, oracle=ScriptedOracle([CL, CL, ML]))
        si = engine.sis[0]
        assert engine._determine_split_level(si, seed=0) == 4

    def test_three_members_cap(self):
        engine = stub_engine(3, oracle=ScriptedOracle([CL, CL]))
        si = engine.sis[0]
        assert engine._determine_split_level(si, seed=0) == 3

    def test_cap_at_member_count(self):
        engine = stub_engine(5, oracle=ScriptedOracle([CL, CL, CL]))
        si = engine.sis[0]
        # probes: 5 -> (3,2) CL; 3 -> (2,1) CL; 2 -> (1,1) CL; exhausted
        assert engine._determine_split_level(si, seed=0) == 5

    def test_probe_queries_spend_budget(self):
        oracle = ScriptedOracle([CL, ML])
        engine = stub_engine(8, oracle=oracle)
        engine._determine_split_level(engine.sis[0], seed=0)
        assert engine.store.queries_used == 2


class TestPartitionMembers:
    def test_respects_k(self):
        engine = stub_engine(9)
        groups = engine._partition_members(np.arange(9), 3, seed=0)
        assert [list(g) for g in groups] == [[0, 1, 2], [3, 4, 5], [6, 7, 8]]

    def test_zero_train_child_merges_to_nearest(self):
        # only instances 0 and 8 are training; middle chunk has no train member
        train = np.zeros(9, dtype=bool)
        train[0] = train[8] = True
        engine = stub_engine(9, train=train)
        groups = engine._partition_members(np.arange(9), 3, seed=0)
        assert len(groups) == 2
        assert all(engine._train_subset(g).size >= 1 for g in groups)
        assert sorted(int(x) for g in groups for x in g) == list(range(9))

    def test_single_train_member_collapses(self):
        train = np.zeros(4, dtype=bool)
        train[1] = True
        engine = stub_engine(4, train=train)
        groups = engine._partition_members(np.arange(4), 2, seed=0)
        assert len(groups) == 1
        assert engine._train_subset(groups[0]).size == 1

    def test_train_resplit_when_one_child_keeps_all_train(self):
        # both training instances sit in the same contiguous half
        train = np.zeros(8, dtype=bool)
        train[0] = train[1] = True
        engine = stub_engine(8, train=train)
        groups = engine._partition_members(np.arange(8), 2, seed=0)
        assert len(groups) == 2
        assert all(engine._train_subset(g).size >= 1 for g in groups)
        assert sorted(int(x) for g in groups for x in g) == list(range(8))

    def test_identical_members_still_split(self):
        # the refiner must return a genuine 2-way partition even with nothing
        # to distinguish the members
        row = np.sin(np.linspace(0, 5, 32))
        ds = Dataset(np.vstack([row] * 4))
        engine = Engine(ds, EngineConfig(budget=5, rng_seed=0), ScriptedOracle([]))
        groups = engine._partition_members(np.arange(4), 2, seed=0)
        assert len(groups) == 2
        assert all(g.size >= 1 for g in groups)


class TestDetermineRelations:
    def test_single_cluster_no_queries(self):
        engine = stub_engine(6, oracle=ScriptedOracle([]))
        engine._determine_relations()
        assert engine.store.queries_used == 0

    def test_must_link_merges(self):
        oracle = ScriptedOracle([ML])
        engine = stub_engine(6, oracle=oracle)
        root = engine.sis.pop(0)
        engine.clusters.clear()
        a = engine._new_super_instance(np.arange(0, 3))
        b = engine._new_super_instance(np.arange(3, 6))
        engine._new_cluster({a.sid})
        engine._new_cluster({b.sid})
        engine._determine_relations()
        assert len(engine.clusters) == 1
        assert engine.store.queries_used == 1

    def test_entailment_saves_queries(self):
        # clusters at positions 0, 1, 10: A-B answered ML, merged; B-C answered
        # CL; A-C then derivable, no third query
        oracle = ScriptedOracle([ML, CL])
        engine = stub_engine(3, oracle=oracle)
        engine.sis.pop(0)
        engine.clusters.clear()
        engine.splitter.positions = np.array([0.0, 1.0, 10.0])
        for idx in range(3):
            si = engine._new_super_instance(np.array([idx]))
            engine._new_cluster({si.sid})
        engine._determine_relations()
        assert engine.store.queries_used == 2
        assert len(engine.clusters) == 2
        assert engine.store.relation_of(0, 2) is CL  # derived, never queried


def _assert_rep_level_satisfaction(engine):
    rep_to_sid = {si.representative: sid for sid, si in engine.sis.items()}
    cluster_of = {}
    for cid, sids in engine.clusters.items():
        for sid in sids:
            cluster_of[sid] = cid
    for c in engine.store.log:
        if c.origin is not Origin.QUERIED:
            continue
        if c.i in rep_to_sid and c.j in rep_to_sid:
            same = cluster_of[rep_to_sid[c.i]] == cluster_of[rep_to_sid[c.j]]
            if c.kind is ML:
                assert same, f"queried must-link {c.pair} split across clusters"
            else:
                assert not same, f"queried cannot-link {c.pair} inside one cluster"


class TestRun:
    def test_budget_contract_and_snapshots(self):
        ds = generate_cbf(CbfParams(6, 64, 0.1, rng_seed=1))
        config = EngineConfig(budget=12, rng_seed=0)
        result = run(ds, config, LabelOracle(ds.labels))
        assert result.queries_used <= config.budget
        assert len(result.query_log) == result.queries_used
        assert len(result.snapshots) == result.queries_used + 1
        for snap in result.snapshots:
            assert snap.shape == (ds.n,)
            assert (snap >= 0).all()

    def test_tiny_budget_leaves_initial_or_split(self):
        ds = generate_cbf(CbfParams(4, 64, 0.1, rng_seed=2))
        result = run(ds, EngineConfig(budget=1, rng_seed=0), LabelOracle(ds.labels))
        assert result.queries_used <= 1
        assert result.clustering.n_clusters >= 1

    def test_partition_invariants_final(self):
        ds = generate_cbf(CbfParams(5, 64, 0.1, rng_seed=3))
        result = run(ds, EngineConfig(budget=25, rng_seed=1), LabelOracle(ds.labels))
        seen = sorted(i for cluster in result.clustering.clusters for i in cluster)
        assert seen == list(range(ds.n))
        assert (result.clustering.assignment >= 0).all()

    def test_train_only_queries(self):
        ds = generate_cbf(CbfParams(6, 64, 0.1, rng_seed=4))
        train = np.zeros(ds.n, dtype=bool)
        train[: ds.n // 2 * 2 : 2] = True
        train[1] = True
        result = run(ds, EngineConfig(budget=20, rng_seed=0),
                     LabelOracle(ds.labels), train_mask=train)
        for c in result.query_log:
            assert train[c.i] and train[c.j]

    def test_deterministic_bitwise(self):
        ds = generate_cbf(CbfParams(5, 64, 0.1, rng_seed=5))
        config = EngineConfig(budget=18, rng_seed=9)
        a = run(ds, config, LabelOracle(ds.labels))
        b = run(ds, config, LabelOracle(ds.labels))
        assert np.array_equal(a.clustering.assignment, b.clustering.assignment)
        assert [(c.pair, c.kind) for c in a.query_log] == \
               [(c.pair, c.kind) for c in b.query_log]
        assert len(a.snapshots) == len(b.snapshots)
        for sa, sb in zip(a.snapshots, b.snapshots):
            assert np.array_equal(sa, sb)

    def test_no_query_on_derivable_pair(self):
        ds = generate_cbf(CbfParams(6, 64, 0.1, rng_seed=6))
        result = run(ds, EngineConfig(budget=30, rng_seed=2), LabelOracle(ds.labels))
        replayed = []
        from tsactive import ConstraintStore
        probe = ConstraintStore(budget=10_000)
        for c in result.constraint_log:
            if c.origin is Origin.QUERIED:
                assert probe.relation_of(c.i, c.j) is None, \
                    f"query spent on derivable pair {c.pair}"
                probe.record(c.i, c.j, c.kind)
                replayed.append(c)
        assert len(replayed) == result.queries_used

    def test_representative_level_satisfaction(self):
        ds = generate_cbf(CbfParams(6, 64, 0.05, rng_seed=7))
        for refiner in ("dtw-spectral", "kshape"):
            engine = Engine(ds, EngineConfig(refiner=refiner, budget=40, rng_seed=3),
                            LabelOracle(ds.labels))
            engine.run()
            _assert_rep_level_satisfaction(engine)

    def test_kshape_refiner_runs(self):
        ds = generate_cbf(CbfParams(5, 64, 0.05, rng_seed=8))
        result = run(ds, EngineConfig(refiner="kshape", budget=30, rng_seed=1),
                     LabelOracle(ds.labels))
        assert result.queries_used <= 30
        assert result.clustering.n_clusters >= 2

    def test_clusters_match_assignment(self):
        ds = generate_cbf(CbfParams(5, 64, 0.1, rng_seed=9))
        result = run(ds, EngineConfig(budget=20, rng_seed=4), LabelOracle(ds.labels))
        clustering = result.clustering
        for idx, cluster in enumerate(clustering.clusters):
            for instance in cluster:
                assert clustering.assignment[instance] == idx

    def test_relabeling_leaves_ari_unchanged(self):
        ds = generate_cbf(CbfParams(5, 64, 0.1, rng_seed=10))
        result = run(ds, EngineConfig(budget=20, rng_seed=5), LabelOracle(ds.labels))
        labels = np.asarray(ds.labels)
        base = ari(result.clustering.assignment, labels)
        shuffled = (result.clustering.assignment + 7) % (result.clustering.n_clusters + 7)
        assert ari(shuffled, labels) == pytest.approx(base)


class TestSeparatedComponents:
    def test_engine_reunites_separated_blobs(self):
        ds = pulse_dataset(per_blob=6, seed=1)
        config = EngineConfig(budget=30, rng_seed=0)
        result = run(ds, config, LabelOracle(ds.labels))
        labels = np.asarray(ds.labels)
        assert result.clustering.n_clusters == 2
        assert ari(result.clustering.assignment, labels) == pytest.approx(1.0)
        up = result.clustering.assignment[labels == "up"]
        assert len(set(up.tolist())) == 1

    def test_first_and_last_blob_far_apart_in_dtw(self):
        from tsactive import distance_matrix

        ds = pulse_dataset(per_blob=3, seed=2).z_normalized()
        dm = distance_matrix(ds, WarpingWindow(0.1))
        # within-blob distances are tiny; any cross-blob pair saturates the band
        within = max(dm.values[0, 1], dm.values[3, 4], dm.values[6, 7])
        across = min(dm.values[0, 3], dm.values[0, 6], dm.values[3, 6])
        assert within < across / 5


class TestAbort:
    def test_abort_returns_current_clustering(self):
        from tsactive.oracle import SessionAborted

        class AbortAfter:
            def __init__(self, n):
                self.n = n

            def answer(self, i, j):
                if self.n <= 0:
                    raise SessionAborted("user quit")
                self.n -= 1
                return ML

        ds = generate_cbf(CbfParams(4, 64, 0.1, rng_seed=11))
        result = run(ds, EngineConfig(budget=30, rng_seed=0), AbortAfter(3))
        assert result.aborted
        assert result.queries_used == 3
        seen = sorted(i for cluster in result.clustering.clusters for i in cluster)
        assert seen == list(range(ds.n))

    def test_inconsistent_oracle_raises_session_error(self):
        from tsactive import EngineSessionError

        class Liar:
            def __init__(self):
                self.count = 0

            def answer(self, i, j):
                self.count += 1
                return ML if self.count != 3 else CL

        ds = generate_cbf(CbfParams(4, 64, 0.1, rng_seed=12))
        # lying can produce either an inconsistency error or merely a bad
        # clustering, depending on which pairs get asked; only the error path
        # must carry the log
        try:
            run(ds, EngineConfig(budget=30, rng_seed=0), Liar())
        except EngineSessionError as err:
            assert err.log


class TestSessionRoundtrip:
    def test_config_dict_roundtrip(self):
        config = EngineConfig(refiner="kshape", window=WarpingWindow.full(),
                              gamma=0.25, budget=9, rng_seed=5, normalize=False)
        back = EngineConfig.from_dict(config.to_dict())
        assert back == config
