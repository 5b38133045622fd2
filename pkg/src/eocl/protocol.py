"""Stream construction and the one-pass online training protocol.

A run presents train samples one at a time with no repetitions: class-IID
streams group samples by class (one task per class, shuffled within), IID
streams shuffle everything globally (a single task). After each task the
learner is evaluated on the test samples of every task seen so far,
filling one row of the accuracy matrix.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import metrics
from .featio import DatasetManifest
from .learners import Learner, make_learner
from .pooling import Pooler, PoolerConfig, make_pooler, pooled_dim

STREAM_KINDS = ("CLASS_IID", "IID")


class ProtocolError(ValueError):
    """Raised for invalid plans or stream orders."""


class RunFailure(RuntimeError):
    """A learner or pooler error during a run, tagged with the stream position."""

    def __init__(self, position: int, cause: Exception):
        super().__init__(f"run aborted at stream position {position}: {cause}")
        self.position = position
        self.cause = cause


@dataclasses.dataclass(frozen=True)
class StreamOrder:
    kind: str
    class_order: tuple[int, ...]
    class_seeds: tuple[int, ...]
    global_seed: int

    def __post_init__(self):
        kind = self.kind.upper()
        if kind not in STREAM_KINDS:
            raise ProtocolError(f"unknown stream kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if sorted(self.class_order) != list(range(len(self.class_order))):
            raise ProtocolError(f"class_order must be a permutation, got {self.class_order}")
        if len(self.class_seeds) != len(self.class_order):
            raise ProtocolError("need one shuffle seed per class")

    @classmethod
    def build(cls, kind: str, num_classes: int, seed: int) -> "StreamOrder":
        root = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF])
        rng = np.random.default_rng(root)
        class_order = tuple(int(c) for c in rng.permutation(num_classes))
        class_seeds = tuple(int(s.generate_state(1)[0]) for s in root.spawn(num_classes))
        return cls(kind=kind, class_order=class_order, class_seeds=class_seeds,
                   global_seed=int(seed))


@dataclasses.dataclass(frozen=True)
class LearnerConfig:
    kind: str
    hyperparams: dict = dataclasses.field(default_factory=dict)

    @property
    def tag(self) -> str:
        if not self.hyperparams:
            return self.kind.upper()
        inner = ",".join(f"{k}={v}" for k, v in sorted(self.hyperparams.items()))
        return f"{self.kind.upper()}({inner})"

    def build(self, dim: int) -> Learner:
        return make_learner(self.kind, dim, **self.hyperparams)


@dataclasses.dataclass(frozen=True)
class RunPlan:
    manifest: DatasetManifest
    pooler: PoolerConfig
    learner: LearnerConfig
    order: StreamOrder
    train_split: str = "train"
    eval_split: str = "test"
    num_orderings: int = 5

    def __post_init__(self):
        if self.num_orderings < 1:
            raise ProtocolError("num_orderings must be >= 1")
        if self.train_split == self.eval_split:
            raise ProtocolError("eval split must differ from train split")


class AccMatrix:
    """Lower-triangular accuracy matrix; row i holds i+1 entries."""

    def __init__(self, rows: list[np.ndarray]):
        self.rows = [np.asarray(r, dtype=np.float64) for r in rows]
        for i, row in enumerate(self.rows):
            if row.size != i + 1:
                raise ProtocolError(f"row {i} must have {i + 1} entries, got {row.size}")

    def __getitem__(self, ij) -> float:
        i, j = ij
        return float(self.rows[i][j])

    @property
    def num_tasks(self) -> int:
        return len(self.rows)

    def to_lists(self) -> list[list[float]]:
        return [list(map(float, r)) for r in self.rows]


@dataclasses.dataclass
class RunResult:
    matrix: AccMatrix
    learner: Learner
    task_classes: list[list[int]]
    eval_weights: np.ndarray
    counters: dict


def build_stream(manifest_or_records, order: StreamOrder,
                 split: str = "train") -> list[tuple[int, int]]:
    """Order the split's samples into a stream of (sample_index, label)."""
    records = _split_records(manifest_or_records, split)
    labels = [label for _, label in records]
    by_class: dict[int, list[int]] = {}
    for idx, label in enumerate(labels):
        by_class.setdefault(label, []).append(idx)

    for cls in order.class_order:
        if cls not in by_class:
            raise ProtocolError(f"class {cls} in stream order has no samples in split")

    if order.kind == "IID":
        rng = np.random.default_rng(
            np.random.SeedSequence([order.global_seed & 0xFFFFFFFFFFFFFFFF, 1])
        )
        perm = rng.permutation(len(labels))
        return [(int(i), labels[i]) for i in perm]

    stream = []
    for pos, cls in enumerate(order.class_order):
        rng = np.random.default_rng(
            np.random.SeedSequence([order.class_seeds[pos] & 0xFFFFFFFFFFFFFFFF])
        )
        idxs = np.asarray(by_class[cls])
        for i in rng.permutation(idxs.size):
            stream.append((int(idxs[i]), cls))
    return stream


def _split_records(manifest_or_records, split: str):
    if isinstance(manifest_or_records, DatasetManifest):
        return manifest_or_records.load_split(split)
    return manifest_or_records


def _task_partition(order: StreamOrder) -> list[list[int]]:
    if order.kind == "IID":
        return [sorted(order.class_order)]
    return [[cls] for cls in order.class_order]


def run_online(plan: RunPlan, train_records=None, eval_records=None,
               learner: Learner | None = None, pooler: Pooler | None = None) -> RunResult:
    """Run one ordering of the plan; returns the accuracy matrix and state.

    `train_records`, `eval_records`, `learner`, and `pooler` may be supplied
    directly (useful for caching and for test doubles); by default they are
    built from the plan.
    """
    train_records = _split_records(plan.manifest if train_records is None else train_records,
                                   plan.train_split)
    eval_records = _split_records(plan.manifest if eval_records is None else eval_records,
                                  plan.eval_split)
    pooler = pooler if pooler is not None else make_pooler(plan.pooler)
    if learner is None:
        dim = pooled_dim(plan.pooler, plan.manifest.d)
        learner = plan.learner.build(dim)

    stream = build_stream(train_records, plan.order, plan.train_split)
    tasks = _task_partition(plan.order)

    # Stream positions grouped per task, preserving order.
    task_of_class = {}
    for t_idx, classes in enumerate(tasks):
        for cls in classes:
            task_of_class[cls] = t_idx
    per_task_stream: list[list[tuple[int, int, int]]] = [[] for _ in tasks]
    for pos, (sample_idx, label) in enumerate(stream):
        per_task_stream[task_of_class[label]].append((pos, sample_idx, label))

    eval_by_task: list[list[tuple[int, int]]] = [[] for _ in tasks]
    for idx, (_, label) in enumerate(eval_records):
        t_idx = task_of_class.get(label)
        if t_idx is not None:
            eval_by_task[t_idx].append((idx, label))

    pooled_eval_cache: dict[int, np.ndarray] = {}
    counters = {"fits": 0, "train_pools": 0, "eval_predictions": 0}

    rows = []
    for t_idx in range(len(tasks)):
        for pos, sample_idx, label in per_task_stream[t_idx]:
            try:
                vec = pooler(train_records[sample_idx][0], salt=pos)
                counters["train_pools"] += 1
                learner.fit_one(vec, label)
                counters["fits"] += 1
            except Exception as exc:
                raise RunFailure(pos, exc) from exc

        row = np.zeros(t_idx + 1)
        for j in range(t_idx + 1):
            correct = 0
            for idx, label in eval_by_task[j]:
                if idx not in pooled_eval_cache:
                    pooled_eval_cache[idx] = np.asarray(
                        pooler(eval_records[idx][0], salt=-(idx + 1)).values
                    )
                if learner.predict(pooled_eval_cache[idx]) == label:
                    correct += 1
                counters["eval_predictions"] += 1
            row[j] = 100.0 * correct / len(eval_by_task[j]) if eval_by_task[j] else 0.0
        rows.append(row)

    weights = np.array([len(eval_by_task[j]) for j in range(len(tasks))], dtype=np.float64)
    if hasattr(learner, "replay_reads"):
        counters["replay_reads"] = learner.replay_reads
    return RunResult(AccMatrix(rows), learner, tasks, weights, counters)


@dataclasses.dataclass
class ReportRow:
    method: str
    pooler: str
    dataset: str
    ordering_seed: int | str
    acc: float
    bwt: float
    forg: float
    pla: float
    delta_p: float
    delta_fs: float

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclasses.dataclass
class SuiteReport:
    rows: list[ReportRow]
    aggregates: list[ReportRow]
    errors: list[dict]


def _row_from_result(plan: RunPlan, order: StreamOrder, result: RunResult) -> ReportRow:
    backbone = plan.manifest.backbone_param_count or 1
    return ReportRow(
        method=plan.learner.tag,
        pooler=plan.pooler.tag,
        dataset=plan.manifest.backbone_tag or "dataset",
        ordering_seed=order.global_seed,
        acc=metrics.final_acc(result.matrix, result.eval_weights),
        bwt=metrics.backward_transfer(result.matrix),
        forg=metrics.forgetting(result.matrix),
        pla=metrics.plasticity(result.matrix),
        delta_p=metrics.delta_p(result.learner, backbone),
        delta_fs=pooled_dim(plan.pooler, plan.manifest.d) / plan.manifest.d,
    )


def _aggregate(rows: list[ReportRow]) -> list[ReportRow]:
    grouped: dict[tuple, list[ReportRow]] = {}
    for row in rows:
        grouped.setdefault((row.method, row.pooler, row.dataset), []).append(row)

    out = []
    for (method, pooler, dataset), members in grouped.items():
        for stat in ("mean", "std"):
            vals = {}
            for field in ("acc", "bwt", "forg", "pla", "delta_p", "delta_fs"):
                data = np.array([getattr(m, field) for m in members])
                if stat == "mean":
                    vals[field] = float(data.mean())
                else:
                    vals[field] = float(data.std(ddof=1)) if data.size > 1 else 0.0
            out.append(ReportRow(method=method, pooler=pooler, dataset=dataset,
                                 ordering_seed=stat, **vals))
    return out


def expand_orderings(plan: RunPlan) -> list[StreamOrder]:
    k = len(plan.order.class_order)
    return [
        StreamOrder.build(plan.order.kind, k, plan.order.global_seed + i)
        for i in range(plan.num_orderings)
    ]


def run_suite(plans: list[RunPlan], jobs: int = 1) -> SuiteReport:
    """Run every (plan, ordering) cell; aggregate mean/std across orderings.

    Per-cell failures are collected, not raised; each plan's learner is
    private to its cell so cells may run in parallel.
    """
    cells = []
    for p_idx, plan in enumerate(plans):
        train = _split_records(plan.manifest, plan.train_split)
        evalr = _split_records(plan.manifest, plan.eval_split)
        for order in expand_orderings(plan):
            cells.append((p_idx, plan, order, train, evalr))

    def _run_cell(cell):
        p_idx, plan, order, train, evalr = cell
        concrete = dataclasses.replace(plan, order=order, num_orderings=1)
        result = run_online(concrete, train_records=train, eval_records=evalr)
        return _row_from_result(concrete, order, result)

    rows: list[ReportRow] = []
    errors: list[dict] = []
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_cell, c) for c in cells]
            outcomes = []
            for fut, cell in zip(futures, cells):
                try:
                    outcomes.append(fut.result())
                except Exception as exc:
                    outcomes.append(exc)
    else:
        outcomes = []
        for cell in cells:
            try:
                outcomes.append(_run_cell(cell))
            except Exception as exc:
                outcomes.append(exc)

    for cell, outcome in zip(cells, outcomes):
        _, plan, order, _, _ = cell
        if isinstance(outcome, Exception):
            errors.append({
                "method": plan.learner.tag,
                "pooler": plan.pooler.tag,
                "ordering_seed": order.global_seed,
                "error": str(outcome),
            })
        else:
            rows.append(outcome)

    return SuiteReport(rows=rows, aggregates=_aggregate(rows), errors=errors)
