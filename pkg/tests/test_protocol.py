import dataclasses

import numpy as np
import pytest

from eocl.featio import DatasetManifest, FeatureSequence
from eocl.metrics import final_acc, plasticity
from eocl.pooling import PoolerConfig, make_pooler
from eocl.protocol import (AccMatrix, LearnerConfig, ProtocolError, RunFailure,
                           RunPlan, StreamOrder, build_stream, run_online,
                           run_suite)


class Memorizer:
    """Oracle test double: exact-match lookup of every training vector."""

    kind = "MEMO"

    def __init__(self, dim):
        self.dim = dim
        self.store = {}
        self.fit_calls = 0
        self.predict_calls = 0

    def fit_one(self, x, y):
        self.store[np.asarray(getattr(x, "values", x)).tobytes()] = y
        self.fit_calls += 1

    def predict(self, x):
        self.predict_calls += 1
        return self.store.get(np.asarray(getattr(x, "values", x)).tobytes(), -1)

    def param_count(self):
        return len(self.store) * (self.dim + 1)


class CountingPooler:
    tag = "COUNT"

    def __init__(self, inner):
        self.inner = inner
        self.calls = []

    def __call__(self, g, salt=0):
        self.calls.append(salt)
        return self.inner(g, salt=salt)


def _toy_records(labels, d=2, offset=0.0):
    rng = np.random.default_rng(42)
    return [(FeatureSequence(rng.standard_normal((4, d)) + lab + offset), lab)
            for lab in labels]


def _toy_manifest(tmp_path, num_classes=2, per_class=6):
    from eocl.featio import save_manifest, write_container
    train = _toy_records([c for c in range(num_classes) for _ in range(per_class)])
    test = _toy_records([c for c in range(num_classes) for _ in range(per_class)], offset=0.01)
    write_container(train, tmp_path / "train.eof1")
    write_container(test, tmp_path / "test.eof1")
    manifest = DatasetManifest(
        class_names=[f"c{i}" for i in range(num_classes)], d=2,
        splits={"train": ["train.eof1"], "test": ["test.eof1"]},
        backbone_tag="toy", backbone_param_count=1000, root=tmp_path,
    )
    save_manifest(manifest, tmp_path / "manifest.json")
    return manifest


class TestStreamOrder:
    def test_build_is_permutation(self):
        order = StreamOrder.build("CLASS_IID", 7, seed=5)
        assert sorted(order.class_order) == list(range(7))
        assert len(order.class_seeds) == 7

    def test_same_seed_same_order(self):
        assert StreamOrder.build("CLASS_IID", 5, 3) == StreamOrder.build("CLASS_IID", 5, 3)

    def test_rejects_bad_kind(self):
        with pytest.raises(ProtocolError):
            StreamOrder(kind="SHUFFLED", class_order=(0,), class_seeds=(1,), global_seed=0)

    def test_rejects_non_permutation(self):
        with pytest.raises(ProtocolError):
            StreamOrder(kind="IID", class_order=(0, 0), class_seeds=(1, 2), global_seed=0)


class TestBuildStream:
    def test_class_order_contract(self):
        records = [(None, 0), (None, 0), (None, 1)]
        order = StreamOrder(kind="CLASS_IID", class_order=(1, 0), class_seeds=(3, 4),
                            global_seed=0)
        stream = build_stream(records, order)
        assert stream[0] == (2, 1)  # class 1 has only sample index 2
        assert {s for s, _ in stream} == {0, 1, 2}

    def test_iid_deterministic(self):
        records = [(None, i % 3) for i in range(30)]
        order = StreamOrder.build("IID", 3, seed=9)
        assert build_stream(records, order) == build_stream(records, order)

    def test_class_iid_preserves_multisets(self):
        rng = np.random.default_rng(1)
        records = [(None, int(rng.integers(4))) for _ in range(100)]
        order = StreamOrder.build("CLASS_IID", 4, seed=2)
        stream = build_stream(records, order)
        assert len(stream) == len(records)
        for cls in range(4):
            expected = sorted(i for i, (_, lab) in enumerate(records) if lab == cls)
            got = sorted(i for i, lab in stream if lab == cls)
            assert got == expected

    def test_class_iid_is_contiguous_per_class(self):
        records = [(None, i % 3) for i in range(30)]
        order = StreamOrder.build("CLASS_IID", 3, seed=7)
        labels = [lab for _, lab in build_stream(records, order)]
        boundaries = [lab for i, lab in enumerate(labels) if i == 0 or labels[i - 1] != lab]
        assert boundaries == list(order.class_order)

    def test_unknown_class_rejected(self):
        records = [(None, 0)]
        order = StreamOrder(kind="CLASS_IID", class_order=(1, 0), class_seeds=(1, 2),
                            global_seed=0)
        with pytest.raises(ProtocolError, match="class 1"):
            build_stream(records, order)


class TestRunOnline:
    def test_memorizer_saturates_matrix(self, tmp_path):
        # upper-bound harness check: eval on a split aliasing the train
        # container, so exact lookup always hits
        manifest = _toy_manifest(tmp_path)
        manifest.splits["train_alias"] = list(manifest.splits["train"])
        plan = RunPlan(manifest=manifest, pooler=PoolerConfig("AVG"),
                       learner=LearnerConfig("NCM"),
                       order=StreamOrder.build("CLASS_IID", 2, 0),
                       eval_split="train_alias", num_orderings=1)
        result = run_online(plan, learner=Memorizer(2))
        assert result.matrix.to_lists() == [[100.0], [100.0, 100.0]]

    def test_row_shapes(self, tmp_path):
        manifest = _toy_manifest(tmp_path, num_classes=4)
        plan = RunPlan(manifest=manifest, pooler=PoolerConfig("AVG"),
                       learner=LearnerConfig("NCM"),
                       order=StreamOrder.build("CLASS_IID", 4, 1), num_orderings=1)
        result = run_online(plan)
        assert [row.size for row in result.matrix.rows] == [1, 2, 3, 4]

    def test_ft_collapses_to_newest_class(self, suite_manifest, suite_records):
        order = StreamOrder.build("CLASS_IID", 5, 0)
        plan = RunPlan(manifest=suite_manifest, pooler=PoolerConfig("AVG"),
                       learner=LearnerConfig("FT"), order=order, num_orderings=1)
        result = run_online(plan, train_records=suite_records["train"],
                            eval_records=suite_records["test"])
        # right after task 1, task 0 accuracy has collapsed
        assert result.matrix[1, 0] <= 5.0
        assert plasticity(result.matrix) >= 95.0

    def test_one_pass_counting(self, tmp_path):
        manifest = _toy_manifest(tmp_path, num_classes=3, per_class=5)
        train = manifest.load_split("train")
        test = manifest.load_split("test")
        plan = RunPlan(manifest=manifest, pooler=PoolerConfig("AVG"),
                       learner=LearnerConfig("NCM"),
                       order=StreamOrder.build("CLASS_IID", 3, 2), num_orderings=1)
        pooler = CountingPooler(make_pooler(plan.pooler))
        memo = Memorizer(2)
        result = run_online(plan, train_records=train, eval_records=test,
                            learner=memo, pooler=pooler)
        # each train sample pooled and fit exactly once
        train_salts = [s for s in pooler.calls if s >= 0]
        assert memo.fit_calls == len(train)
        assert result.counters["fits"] == len(train)
        assert sorted(train_salts) == list(range(len(train)))
        # eval pooling is cached: one pool per test sample
        assert len(pooler.calls) == len(train) + len(test)
        # evaluation after task k covers exactly tasks 0..k
        per_task = len(test) // 3
        assert memo.predict_calls == per_task * (1 + 2 + 3)

    def test_icarl_replay_counted_separately(self, tmp_path):
        manifest = _toy_manifest(tmp_path, num_classes=2, per_class=8)
        plan = RunPlan(manifest=manifest, pooler=PoolerConfig("AVG"),
                       learner=LearnerConfig("ICARL", {"buffer_capacity": 4, "seed": 0}),
                       order=StreamOrder.build("CLASS_IID", 2, 0), num_orderings=1)
        result = run_online(plan)
        assert result.counters["fits"] == 16
        assert result.counters["replay_reads"] == 15  # all but the first step

    def test_deterministic_matrix(self, suite_manifest, suite_records):
        plan = RunPlan(manifest=suite_manifest, pooler=PoolerConfig("TAP", R=3),
                       learner=LearnerConfig("SLDA"),
                       order=StreamOrder.build("CLASS_IID", 5, 4), num_orderings=1)
        a = run_online(plan, train_records=suite_records["train"],
                       eval_records=suite_records["test"])
        b = run_online(plan, train_records=suite_records["train"],
                       eval_records=suite_records["test"])
        assert a.matrix.to_lists() == b.matrix.to_lists()

    def test_iid_single_task(self, tmp_path):
        manifest = _toy_manifest(tmp_path, num_classes=3, per_class=4)
        plan = RunPlan(manifest=manifest, pooler=PoolerConfig("AVG"),
                       learner=LearnerConfig("NCM"),
                       order=StreamOrder.build("IID", 3, 0), num_orderings=1)
        result = run_online(plan)
        assert result.matrix.num_tasks == 1
        assert result.eval_weights.tolist() == [12.0]

    def test_run_failure_carries_position(self, tmp_path):
        manifest = _toy_manifest(tmp_path)

        class Exploder(Memorizer):
            def fit_one(self, x, y):
                if self.fit_calls == 3:
                    raise ValueError("boom")
                super().fit_one(x, y)

        plan = RunPlan(manifest=manifest, pooler=PoolerConfig("AVG"),
                       learner=LearnerConfig("NCM"),
                       order=StreamOrder.build("CLASS_IID", 2, 0), num_orderings=1)
        with pytest.raises(RunFailure, match="position 3"):
            run_online(plan, learner=Exploder(2))

    def test_eval_split_must_differ(self, tmp_path):
        manifest = _toy_manifest(tmp_path)
        with pytest.raises(ProtocolError):
            RunPlan(manifest=manifest, pooler=PoolerConfig("AVG"),
                    learner=LearnerConfig("NCM"),
                    order=StreamOrder.build("CLASS_IID", 2, 0),
                    train_split="train", eval_split="train")


class TestRunSuite:
    def _plan(self, manifest, num_orderings=3, learner=None):
        return RunPlan(manifest=manifest, pooler=PoolerConfig("AVG"),
                       learner=learner or LearnerConfig("NCM"),
                       order=StreamOrder.build("CLASS_IID", 2, 0),
                       num_orderings=num_orderings)

    def test_orderings_produce_rows_and_aggregates(self, tmp_path):
        manifest = _toy_manifest(tmp_path)
        report = run_suite([self._plan(manifest, 5)])
        assert len(report.rows) == 5
        assert {r.ordering_seed for r in report.rows} == {0, 1, 2, 3, 4}
        stats = {r.ordering_seed: r for r in report.aggregates}
        assert set(stats) == {"mean", "std"}
        accs = [r.acc for r in report.rows]
        assert stats["mean"].acc == pytest.approx(np.mean(accs))
        assert stats["std"].acc == pytest.approx(np.std(accs, ddof=1))

    def test_empty_plan_list(self):
        report = run_suite([])
        assert report.rows == [] and report.aggregates == [] and report.errors == []

    def test_identical_plans_identical_rows(self, tmp_path):
        manifest = _toy_manifest(tmp_path)
        r1 = run_suite([self._plan(manifest)])
        r2 = run_suite([self._plan(manifest)])
        assert [r.as_dict() for r in r1.rows] == [r.as_dict() for r in r2.rows]

    def test_failures_collected_not_raised(self, tmp_path):
        manifest = _toy_manifest(tmp_path)
        bad = self._plan(manifest, learner=LearnerConfig("SNB", {"variance_floor": -1}))

        # SNB accepts this floor; force failure via a pooler that needs t_cap
        bad = dataclasses.replace(bad, pooler=PoolerConfig("FLAT"))
        good = self._plan(manifest, num_orderings=2)
        report = run_suite([good, bad])
        assert len(report.rows) == 2
        assert len(report.errors) == bad.num_orderings
        assert all("t_cap" in e["error"] for e in report.errors)

    def test_parallel_matches_serial(self, tmp_path):
        manifest = _toy_manifest(tmp_path, num_classes=3)
        plans = [self._plan(manifest, 2),
                 self._plan(manifest, 2, learner=LearnerConfig("SLDA"))]
        serial = run_suite(plans, jobs=1)
        parallel = run_suite(plans, jobs=4)
        assert [r.as_dict() for r in serial.rows] == [r.as_dict() for r in parallel.rows]


class TestAccMatrixType:
    def test_indexing(self):
        m = AccMatrix([np.array([50.0]), np.array([25.0, 75.0])])
        assert m[1, 0] == 25.0
        assert m.num_tasks == 2

    def test_rejects_ragged(self):
        with pytest.raises(ProtocolError):
            AccMatrix([np.array([1.0, 2.0])])

    def test_final_acc_consistency(self, tmp_path):
        # final row weighted by test counts equals whole-split evaluation
        manifest = _toy_manifest(tmp_path, num_classes=3, per_class=5)
        train = manifest.load_split("train")
        test = manifest.load_split("test")
        plan = RunPlan(manifest=manifest, pooler=PoolerConfig("AVG"),
                       learner=LearnerConfig("NCM"),
                       order=StreamOrder.build("CLASS_IID", 3, 1), num_orderings=1)
        result = run_online(plan, train_records=train, eval_records=test)
        pooler = make_pooler(plan.pooler)
        direct = np.mean([
            result.learner.predict(pooler(seq)) == lab for seq, lab in test
        ]) * 100.0
        assert final_acc(result.matrix, result.eval_weights) == pytest.approx(direct, abs=1e-9)
