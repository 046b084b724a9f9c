"""Fidelity-kernel swap-test classification.

The classifier compares a test node's embedding against a labeled reference
set through squared-overlap kernels.  The signed average of kernel values,
negatives contributing +K and positives -K, is the parity expectation the
swap-test pipeline would measure; its sign picks the label and its negation
ranks nodes as prediction scores.  Shot-based estimation replaces the exact
expectation with the empirical counts estimator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KERNEL_MODES = ("moment-scaled", "moment-normalized", "full-state")


@dataclass(frozen=True)
class LabeledSet:
    """Reference nodes with binary labels, 1 for positive and 0 for negative."""

    nodes: tuple
    labels: tuple

    def __post_init__(self):
        if not self.nodes:
            raise ValueError("labeled set is empty")
        if len(self.nodes) != len(self.labels):
            raise ValueError("labels do not align with nodes")
        if len(set(self.nodes)) != len(self.nodes):
            raise ValueError("duplicate node in labeled set")
        if any(y not in (0, 1) for y in self.labels):
            raise ValueError("labels must be 0 or 1")

    @classmethod
    def from_sets(cls, positives, negatives) -> "LabeledSet":
        # sorted within each group so set-valued inputs build the same tuple
        positives = tuple(sorted(positives))
        negatives = tuple(sorted(negatives))
        return cls(positives + negatives, (1,) * len(positives) + (0,) * len(negatives))

    def label_of(self, node) -> int:
        try:
            return self.labels[self.nodes.index(node)]
        except ValueError:
            raise ValueError(f"node {node} is not in the labeled set") from None

    @property
    def sign_weights(self) -> np.ndarray:
        """+1 for negatives, -1 for positives, aligned with ``nodes``."""
        return 1.0 - 2.0 * np.asarray(self.labels, dtype=np.float64)


@dataclass(frozen=True)
class KernelMatrix:
    """Squared-overlap kernel block between test rows and labeled columns."""

    values: np.ndarray
    mode: str
    test_nodes: tuple
    labeled_nodes: tuple

    def row(self, test_node) -> np.ndarray:
        try:
            i = self.test_nodes.index(test_node)
        except ValueError:
            raise ValueError(f"node {test_node} has no kernel row") from None
        return self.values[i]


@dataclass(frozen=True)
class PredictionOutcome:
    node: int
    expectation: float
    score: float
    label: int
    shots_used: int | None = None


def _normalize_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    # an all-zero embedding stays zero and contributes zero overlap
    return np.divide(matrix, norms, out=np.zeros_like(matrix), where=norms > 0)


def kernel(e_t, e_l, mode: str = "moment-scaled") -> float:
    """Squared overlap of two embedding vectors.

    moment-scaled and full-state use the vectors as given (the former are the
    circuit's moment amplitudes, the latter entire simulator statevectors);
    moment-normalized projects both onto the unit sphere first.
    """
    if mode not in KERNEL_MODES:
        raise ValueError(f"unknown kernel mode {mode!r}")
    a = np.asarray(e_t, dtype=np.float64).ravel()
    b = np.asarray(e_l, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ValueError(f"embedding dimensions differ: {a.shape} vs {b.shape}")
    if mode == "moment-normalized":
        a = _normalize_rows(a[None, :])[0]
        b = _normalize_rows(b[None, :])[0]
    return float(np.dot(a, b) ** 2)


def kernel_matrix(
    test_embeddings: np.ndarray,
    labeled_embeddings: np.ndarray,
    mode: str,
    test_nodes,
    labeled_nodes,
) -> KernelMatrix:
    """Kernel block for every test/labeled pair at once."""
    if mode not in KERNEL_MODES:
        raise ValueError(f"unknown kernel mode {mode!r}")
    t = np.asarray(test_embeddings, dtype=np.float64)
    l = np.asarray(labeled_embeddings, dtype=np.float64)
    if t.shape[1] != l.shape[1]:
        raise ValueError(f"embedding dimensions differ: {t.shape[1]} vs {l.shape[1]}")
    if mode == "moment-normalized":
        t = _normalize_rows(t)
        l = _normalize_rows(l)
    values = (t @ l.T) ** 2
    return KernelMatrix(values, mode, tuple(test_nodes), tuple(labeled_nodes))


def expectation_value(test_node, labeled: LabeledSet, K: KernelMatrix) -> float:
    """Signed mean (1/|V_l|) sum of (-1)^y * K over the labeled set."""
    if K.labeled_nodes != tuple(labeled.nodes):
        raise ValueError("kernel columns do not match the labeled set")
    row = K.row(test_node)
    return float(row @ labeled.sign_weights / len(labeled.nodes))


def predict(expectation: float) -> int:
    """Sign rule: nonnegative expectation predicts 0, negative predicts 1."""
    if not np.isfinite(expectation):
        raise ValueError(f"expectation must be finite, got {expectation!r}")
    return 0 if expectation >= 0.0 else 1


def shot_estimate(
    test_node, labeled: LabeledSet, K: KernelMatrix, shots: int, seed
) -> PredictionOutcome:
    """Estimate the expectation from ``shots`` simulated measurement pairs.

    Each shot draws a labeled branch uniformly, then the swap ancilla with
    P(0) = (1 + K)/2, and tallies the parity counts
    (c00 - c01 - c10 + c11) / shots.
    """
    if shots < 1:
        raise ValueError(f"shots must be positive, got {shots}")
    if K.labeled_nodes != tuple(labeled.nodes):
        raise ValueError("kernel columns do not match the labeled set")
    row = K.row(test_node)
    rng = np.random.default_rng(seed)
    picks = rng.integers(0, len(labeled.nodes), size=shots)
    p_zero = (1.0 + row[picks]) / 2.0
    ancilla = (rng.random(shots) >= p_zero).astype(np.int64)
    label_bits = np.asarray(labeled.labels, dtype=np.int64)[picks]
    estimate = float(np.mean((1 - 2 * ancilla) * (1 - 2 * label_bits)))
    return PredictionOutcome(
        node=test_node,
        expectation=estimate,
        score=-estimate,
        label=predict(estimate),
        shots_used=shots,
    )


def classify_all(
    test_nodes,
    labeled: LabeledSet,
    embeddings: np.ndarray,
    mode: str = "moment-scaled",
    shots: int | None = None,
    seed=None,
) -> list:
    """Classify every test node against the labeled set.

    ``embeddings`` is a full matrix indexed by node id (embedding rows or
    simulator statevector rows for full-state mode).  Without ``shots`` the
    expectations are exact; with ``shots`` each node is estimated from its own
    deterministic stream seeded by (seed, node).
    """
    test_nodes = tuple(int(v) for v in test_nodes)
    labeled_idx = np.asarray(labeled.nodes, dtype=np.int64)
    K = kernel_matrix(
        embeddings[np.asarray(test_nodes, dtype=np.int64)],
        embeddings[labeled_idx],
        mode,
        test_nodes,
        labeled.nodes,
    )
    if shots is not None:
        base = 0 if seed is None else seed
        return [
            shot_estimate(v, labeled, K, shots, seed=(base, v)) for v in test_nodes
        ]
    expectations = K.values @ labeled.sign_weights / len(labeled.nodes)
    return [
        PredictionOutcome(v, float(e), float(-e), predict(float(e)))
        for v, e in zip(test_nodes, expectations)
    ]


def write_predictions_tsv(path, outcomes, node_names, config_line=None) -> None:
    """Export predictions as gene<TAB>expectation<TAB>score<TAB>label."""
    lines = []
    if config_line is not None:
        lines.append(f"# config: {config_line}")
    lines.append("gene\texpectation\tscore\tlabel")
    for o in outcomes:
        lines.append(
            f"{node_names[o.node]}\t{o.expectation:.17g}\t{o.score:.17g}\t{o.label}"
        )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
