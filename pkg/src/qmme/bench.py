"""Benchmark protocol: splits, metrics, paired comparisons, synthetic data.

Each split puts 80 percent of the positives (floor) plus an equal number of
random unlabeled nodes into the labeled reference set; every remaining node
is a test node, held-out positives labeled 1 and everything else 0.  Methods
under comparison share the identical split plans so per-split metric
differences are paired, and the paired two-sided t-test summarizes them.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from . import embed
from .classify import LabeledSet, classify_all
from .graph import AttributedGraph, build_graph

METRIC_NAMES = ("accuracy", "precision", "recall", "f1", "auprc")

DEFAULT_TRAIN_FRACTION = 0.8


class BenchError(ValueError):
    """Benchmark protocol violation (degenerate inputs, infeasible configs)."""


@dataclass(frozen=True)
class Dataset:
    """An attributed graph plus the index set of known positives."""

    graph: AttributedGraph
    positives: frozenset

    def __post_init__(self):
        for v in self.positives:
            self.graph._check_node(v)

    @property
    def unlabeled(self) -> tuple:
        return tuple(
            v for v in range(self.graph.node_count) if v not in self.positives
        )

    @classmethod
    def from_graph(cls, g: AttributedGraph) -> "Dataset":
        return cls(g, frozenset(g.positives))


@dataclass(frozen=True)
class SplitPlan:
    split_id: int
    seed: int
    train_positives: tuple
    train_negatives: tuple
    test_nodes: tuple
    test_labels: tuple

    def labeled_set(self) -> LabeledSet:
        return LabeledSet.from_sets(self.train_positives, self.train_negatives)


def make_split(
    dataset: Dataset,
    seed: int,
    split_id: int = 0,
    train_fraction: float = DEFAULT_TRAIN_FRACTION,
) -> SplitPlan:
    """Sample one labeled/test partition; train and test exactly cover the nodes."""
    positives = np.array(sorted(dataset.positives), dtype=np.int64)
    if len(positives) < 5:
        raise BenchError(f"at least 5 positives required, got {len(positives)}")
    n_train = int(math.floor(train_fraction * len(positives)))
    pool = np.array(dataset.unlabeled, dtype=np.int64)
    if len(pool) < n_train:
        raise BenchError(
            f"unlabeled pool ({len(pool)}) smaller than required negatives ({n_train})"
        )
    rng = np.random.default_rng(seed)
    train_pos = np.sort(rng.choice(positives, size=n_train, replace=False))
    train_neg = np.sort(rng.choice(pool, size=n_train, replace=False))
    in_train = np.zeros(dataset.graph.node_count, dtype=bool)
    in_train[train_pos] = True
    in_train[train_neg] = True
    test_nodes = np.flatnonzero(~in_train)
    test_labels = tuple(
        1 if int(v) in dataset.positives else 0 for v in test_nodes
    )
    return SplitPlan(
        split_id=split_id,
        seed=int(seed),
        train_positives=tuple(int(v) for v in train_pos),
        train_negatives=tuple(int(v) for v in train_neg),
        test_nodes=tuple(int(v) for v in test_nodes),
        test_labels=test_labels,
    )


# ---------------------------------------------------------------------------
# metrics


@dataclass(frozen=True)
class SplitMetrics:
    method: str
    split_id: int
    seed: int
    accuracy: float
    precision: float
    recall: float
    f1: float
    auprc: float
    no_positive_predictions: bool = False


def confusion_metrics(predicted, truth) -> dict:
    """Accuracy, precision, recall, F1 from binary predictions.

    With no predicted positives the precision is reported as 0.0 together
    with the ``no_positive_predictions`` warning flag.
    """
    predicted = np.asarray(predicted, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if predicted.shape != truth.shape or predicted.size == 0:
        raise BenchError("predictions and truth must be equal-length and nonempty")
    tp = int(np.sum((predicted == 1) & (truth == 1)))
    fp = int(np.sum((predicted == 1) & (truth == 0)))
    fn = int(np.sum((predicted == 0) & (truth == 1)))
    tn = int(np.sum((predicted == 0) & (truth == 0)))
    degenerate = (tp + fp) == 0
    precision = 0.0 if degenerate else tp / (tp + fp)
    recall = 0.0 if (tp + fn) == 0 else tp / (tp + fn)
    f1 = 0.0 if (precision + recall) == 0 else 2 * precision * recall / (precision + recall)
    return {
        "accuracy": (tp + tn) / predicted.size,
        "precision": precision,
        "recall": recall,
        "f1": f1,
        "no_positive_predictions": degenerate,
    }


def average_precision(scores, labels) -> float:
    """Step-wise average precision over the descending score ranking.

    Tied scores are consumed as one block: the block's positives all receive
    the precision evaluated at the end of the block.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if scores.shape != labels.shape or scores.size == 0:
        raise BenchError("scores and labels must be equal-length and nonempty")
    total_pos = int(labels.sum())
    if total_pos == 0:
        raise BenchError("average precision needs at least one positive")
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    y = labels[order]
    boundaries = np.flatnonzero(np.diff(s)) + 1
    ap = 0.0
    tp = 0
    seen = 0
    for block in np.split(np.arange(s.size), boundaries):
        block_pos = int(y[block].sum())
        tp += block_pos
        seen += block.size
        if block_pos:
            ap += block_pos * (tp / seen)
    return ap / total_pos


@dataclass(frozen=True)
class TTestResult:
    metric: str
    t: float
    p: float
    dof: int


def paired_t_test(a, b, metric: str = "") -> TTestResult:
    """Two-sided paired t-test on per-split metric pairs, dof = n - 1."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise BenchError("paired samples must be equal-length vectors")
    if a.size < 2:
        raise BenchError("paired t-test needs at least two pairs")
    diff = a - b
    if np.var(diff) == 0.0:
        raise BenchError("degenerate t-test: zero difference variance")
    result = stats.ttest_rel(a, b)
    return TTestResult(metric=metric, t=float(result.statistic), p=float(result.pvalue), dof=a.size - 1)


# ---------------------------------------------------------------------------
# per-split evaluation


def _resolve_kernel_mode(method: str, kernel_mode: str) -> str:
    # the baseline's raw vectors are not sub-normalized, so its states are
    # amplitude-encoded on the unit sphere; moment scaling is circuit-specific
    if method == "mopro":
        return "moment-normalized"
    return kernel_mode


def split_scores(
    split: SplitPlan, embeddings: np.ndarray, kernel_mode: str
) -> tuple:
    """Prediction scores, predicted labels, and truth labels for one split."""
    outcomes = classify_all(
        split.test_nodes, split.labeled_set(), embeddings, mode=kernel_mode
    )
    scores = np.array([o.score for o in outcomes])
    predicted = np.array([o.label for o in outcomes], dtype=np.int64)
    return scores, predicted, np.asarray(split.test_labels, dtype=np.int64)


def evaluate_split(
    dataset: Dataset,
    split: SplitPlan,
    embeddings: np.ndarray,
    method: str,
    kernel_mode: str = "moment-scaled",
) -> SplitMetrics:
    """Classify the split's test nodes and score the predictions."""
    mode = _resolve_kernel_mode(method, kernel_mode)
    scores, predicted, truth = split_scores(split, embeddings, mode)
    parts = confusion_metrics(predicted, truth)
    return SplitMetrics(
        method=method,
        split_id=split.split_id,
        seed=split.seed,
        accuracy=parts["accuracy"],
        precision=parts["precision"],
        recall=parts["recall"],
        f1=parts["f1"],
        auprc=average_precision(scores, truth),
        no_positive_predictions=parts["no_positive_predictions"],
    )


# ---------------------------------------------------------------------------
# experiments


@dataclass(frozen=True)
class ExperimentConfig:
    n_splits: int = 50
    seed: int = 0
    methods: tuple = ("qmme", "mopro")
    kernel_mode: str = "moment-scaled"
    train_fraction: float = DEFAULT_TRAIN_FRACTION
    threads: int = 1

    def __post_init__(self):
        if self.n_splits < 1:
            raise BenchError("n_splits must be positive")
        if self.kernel_mode == "full-state":
            raise BenchError(
                "full-state kernels are a per-pair verification tool for small "
                "graphs; experiments use the embedding kernels"
            )
        for m in self.methods:
            if m not in embed.METHODS:
                raise BenchError(f"unknown method {m!r}")
        if self.threads < 1:
            raise BenchError("threads must be positive")


@dataclass
class ExperimentReport:
    config: dict
    per_split: list
    aggregate: dict
    t_tests: list
    warnings: list = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "config": self.config,
            "per_split": [asdict(m) for m in self.per_split],
            "aggregate": self.aggregate,
            "t_tests": [asdict(t) for t in self.t_tests],
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)


def split_seeds(seed: int, n_splits: int) -> list:
    """Deterministic per-split seeds derived from the experiment seed."""
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(n_splits)]


def run_experiment(dataset: Dataset, config: ExperimentConfig) -> ExperimentReport:
    """Run every method over shared split plans and aggregate the metrics.

    The report is a pure function of (dataset, config): split seeds derive
    from the experiment seed, splits are shared across methods, and rows are
    emitted in (method, split) order regardless of the worker count.
    """
    plans = [
        make_split(dataset, s, i, config.train_fraction)
        for i, s in enumerate(split_seeds(config.seed, config.n_splits))
    ]
    embeddings = {m: embed.embed_all(dataset.graph, m) for m in config.methods}

    def run_one(task):
        method, plan = task
        return evaluate_split(
            dataset, plan, embeddings[method], method, config.kernel_mode
        )

    tasks = [(m, plan) for m in config.methods for plan in plans]
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            per_split = list(pool.map(run_one, tasks))
    else:
        per_split = [run_one(t) for t in tasks]

    aggregate: dict = {}
    warnings: list = []
    for method in config.methods:
        rows = [r for r in per_split if r.method == method]
        aggregate[method] = {
            name: {
                "mean": float(np.mean([getattr(r, name) for r in rows])),
                "std": float(np.std([getattr(r, name) for r in rows], ddof=1))
                if len(rows) > 1
                else 0.0,
            }
            for name in METRIC_NAMES
        }
        flagged = sum(r.no_positive_predictions for r in rows)
        if flagged:
            warnings.append(
                f"{method}: {flagged} split(s) predicted no positives; "
                "precision reported as 0"
            )

    t_tests: list = []
    if len(config.methods) >= 2 and config.n_splits >= 2:
        first, second = config.methods[0], config.methods[1]
        a_rows = [r for r in per_split if r.method == first]
        b_rows = [r for r in per_split if r.method == second]
        for name in METRIC_NAMES:
            try:
                t_tests.append(
                    paired_t_test(
                        [getattr(r, name) for r in a_rows],
                        [getattr(r, name) for r in b_rows],
                        metric=name,
                    )
                )
            except BenchError as exc:
                warnings.append(f"t-test on {name} skipped: {exc}")
    elif config.n_splits < 2:
        warnings.append("single split: no t-tests computed")

    return ExperimentReport(
        config={
            "n_splits": config.n_splits,
            "seed": config.seed,
            "methods": list(config.methods),
            "kernel_mode": config.kernel_mode,
            "train_fraction": config.train_fraction,
            "threads": config.threads,
        },
        per_split=per_split,
        aggregate=aggregate,
        t_tests=t_tests,
        warnings=warnings,
    )


def write_per_split_csv(report: ExperimentReport, path) -> None:
    """Flatten the per-split rows to CSV."""
    fields = [
        "method", "split_id", "seed", "accuracy", "precision", "recall",
        "f1", "auprc", "no_positive_predictions",
    ]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in report.per_split:
            writer.writerow(asdict(row))


# ---------------------------------------------------------------------------
# synthetic datasets


@dataclass(frozen=True)
class SynthConfig:
    n_nodes: int
    mean_degree: float = 8.0
    effect_size: float = 2.0
    positive_fraction: float = 0.05
    feature_scale: float = 1.0
    seed: int = 0
    max_retries: int = 20

    def __post_init__(self):
        if self.n_nodes < 10:
            raise BenchError("synthetic graphs need at least 10 nodes")
        if self.mean_degree < 1.0:
            raise BenchError("mean degree must be at least 1")
        if not 0.0 < self.positive_fraction < 1.0:
            raise BenchError("positive fraction must lie in (0, 1)")
        if self.effect_size < 0.0:
            raise BenchError("effect size must be nonnegative")
        if self.feature_scale <= 0.0:
            raise BenchError("feature scale must be positive")


def synth_generate(config: SynthConfig) -> Dataset:
    """Planted-signal dataset on a configuration-model-style random graph.

    Node degrees are Poisson draws (shifted to keep them positive), stubs are
    paired uniformly, and self-loops or duplicate pairs are discarded; the
    pairing is resampled when that leaves an isolated node.  Positive nodes
    and their one-hop neighborhoods draw raw features whose mean sits
    ``effect_size`` standard deviations above the background.
    """
    rng = np.random.default_rng(config.seed)
    n = config.n_nodes
    edges = None
    for _ in range(config.max_retries):
        degrees = rng.poisson(config.mean_degree - 1.0, size=n) + 1
        if degrees.sum() % 2:
            degrees[0] += 1
        stubs = np.repeat(np.arange(n), degrees)
        rng.shuffle(stubs)
        pairs = stubs.reshape(-1, 2)
        keep = pairs[:, 0] != pairs[:, 1]
        candidate = {
            (int(min(a, b)), int(max(a, b))) for a, b in pairs[keep]
        }
        touched = {u for e in candidate for u in e}
        if len(touched) == n:
            edges = sorted(candidate)
            break
    if edges is None:
        raise BenchError(
            f"could not realize a simple graph covering all {n} nodes "
            f"after {config.max_retries} attempts"
        )

    n_pos = max(1, int(round(config.positive_fraction * n)))
    positives = np.sort(rng.choice(n, size=n_pos, replace=False))
    neighbor_map: dict = {v: set() for v in range(n)}
    for a, b in edges:
        neighbor_map[a].add(b)
        neighbor_map[b].add(a)
    planted = set(int(p) for p in positives)
    for p in positives:
        planted.update(neighbor_map[int(p)])
    planted_idx = np.array(sorted(planted), dtype=np.int64)

    features = rng.normal(0.0, config.feature_scale, size=n)
    features[planted_idx] = rng.normal(
        config.effect_size * config.feature_scale,
        config.feature_scale,
        size=len(planted_idx),
    )

    g = build_graph(edges, {i: float(features[i]) for i in range(n)},
                    positive_ids=[int(p) for p in positives])
    return Dataset(g, frozenset(int(p) for p in positives))
