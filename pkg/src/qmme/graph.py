"""Attributed interaction network with adjacency-list oracle queries.

The container fixes the conventions every other module relies on: contiguous
node indices in ascending original-id order, undirected deduplicated edges,
min-max normalized scalar features, and a power-of-two bound ``s`` on the
maximum degree.  Neighbor lookups mirror the oracle access model: a query
``(v, slot)`` returns the slot-th neighbor or an out-of-range flag, and degree
queries cover both the direct degree and the two-hop walk count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

LABEL_POSITIVE = 1
LABEL_UNLABELED = -1

_CANONICAL_MAGIC = "#qmme-graph\tv1"

_EDGE_HEADER_NAMES = {"source", "target", "from", "to", "gene1", "gene2", "node1", "node2"}
_FEATURE_HEADER_NAMES = {"gene", "node", "id", "value", "score", "feature", "weight"}


class GraphError(ValueError):
    """Malformed graph input or an out-of-contract query."""


@dataclass(frozen=True)
class NeighborResult:
    """Outcome of a neighbor slot query: a node index, or the out-of-range flag."""

    node: int | None

    @property
    def out_of_range(self) -> bool:
        return self.node is None


OUT_OF_RANGE = NeighborResult(None)


def _id_sort_key(node_id):
    # ints order numerically, everything else by string; ints sort first
    if isinstance(node_id, bool):
        return (1, 0, str(node_id))
    if isinstance(node_id, int):
        return (0, node_id, "")
    return (1, 0, str(node_id))


def normalize_features(raw: np.ndarray) -> np.ndarray:
    """Min-max rescale raw scores to [0, 1]; a constant input maps to all 0.5."""
    raw = np.asarray(raw, dtype=np.float64)
    if raw.size == 0:
        raise GraphError("no feature values to normalize")
    if not np.all(np.isfinite(raw)):
        raise GraphError("non-finite feature value")
    lo = float(raw.min())
    hi = float(raw.max())
    if hi == lo:
        return np.full(raw.shape, 0.5)
    return (raw - lo) / (hi - lo)


@dataclass(frozen=True, eq=False)
class AttributedGraph:
    """Undirected attributed network with oracle-style neighbor access.

    ``adjacency[v]`` is an ascending int64 array of neighbor indices.
    ``features`` holds the normalized per-node scalar in [0, 1];
    ``raw_features`` keeps the value as ingested.  ``labels`` marks each node
    positive (1), negative (0), or unlabeled (-1).
    """

    node_ids: tuple
    adjacency: tuple
    raw_features: np.ndarray
    features: np.ndarray
    max_degree_bound: int
    labels: np.ndarray
    degrees: np.ndarray = field(repr=False, default=None)
    walk_counts: np.ndarray = field(repr=False, default=None)
    csr_indptr: np.ndarray = field(repr=False, default=None)
    csr_indices: np.ndarray = field(repr=False, default=None)

    @property
    def node_count(self) -> int:
        return len(self.node_ids)

    @property
    def edge_count(self) -> int:
        return int(self.degrees.sum()) // 2

    @property
    def degree_bits(self) -> int:
        """Number of qubits needed for one neighbor-slot register, log2(s)."""
        return self.max_degree_bound.bit_length() - 1

    @property
    def positives(self) -> tuple:
        return tuple(int(v) for v in np.flatnonzero(self.labels == LABEL_POSITIVE))

    def _check_node(self, v: int) -> None:
        if not 0 <= v < self.node_count:
            raise GraphError(f"node index {v} out of range [0, {self.node_count})")

    def neighbor_query(self, v: int, slot: int) -> NeighborResult:
        """Return the slot-th neighbor of v, or the out-of-range flag for slot >= degree."""
        self._check_node(v)
        if slot < 0:
            raise GraphError(f"neighbor slot must be nonnegative, got {slot}")
        neighbors = self.adjacency[v]
        if slot >= len(neighbors):
            return OUT_OF_RANGE
        return NeighborResult(int(neighbors[slot]))

    def degree_query(self, v: int, hops: int = 1) -> int:
        """Degree of v (hops=1) or its two-hop walk count sum(deg(u), u ~ v) (hops=2)."""
        self._check_node(v)
        if hops == 1:
            return int(self.degrees[v])
        if hops == 2:
            return int(self.walk_counts[v])
        raise GraphError(f"hop order must be 1 or 2, got {hops}")

    def two_hop_walk_endpoints(self, v: int) -> np.ndarray:
        """Multiset of two-hop walk endpoints from v, backtracking walks included."""
        self._check_node(v)
        return self.csr_indices[
            np.concatenate(
                [
                    np.arange(self.csr_indptr[u], self.csr_indptr[u + 1])
                    for u in self.adjacency[v]
                ]
            )
        ]

    def index_of(self, node_id) -> int:
        try:
            return self._id_index[node_id]
        except KeyError:
            raise GraphError(f"unknown node id {node_id!r}") from None

    @property
    def _id_index(self) -> dict:
        cached = getattr(self, "_id_index_cache", None)
        if cached is None:
            cached = {nid: i for i, nid in enumerate(self.node_ids)}
            object.__setattr__(self, "_id_index_cache", cached)
        return cached


def build_graph(
    edges: Iterable[tuple],
    raw_features: Mapping,
    positive_ids: Iterable | None = None,
    *,
    normalize: bool = True,
) -> AttributedGraph:
    """Assemble an AttributedGraph from an edge list and a per-node feature map.

    Self-loops are dropped, duplicate and reversed edges collapse to one
    undirected edge, nodes without a feature value are removed, and nodes left
    isolated are removed.  Surviving nodes get contiguous indices in ascending
    original-id order.  With ``normalize=False`` the supplied features are used
    as-is and must already lie in [0, 1].
    """
    for node_id, value in raw_features.items():
        if not math.isfinite(float(value)):
            raise GraphError(f"non-finite feature for node {node_id!r}")

    featured = set(raw_features)
    kept_edges = set()
    for u, v in edges:
        if u == v:
            continue
        if u in featured and v in featured:
            a, b = sorted((u, v), key=_id_sort_key)
            kept_edges.add((a, b))

    nodes = sorted({u for e in kept_edges for u in e}, key=_id_sort_key)
    if not nodes:
        raise GraphError("no usable nodes")

    index = {nid: i for i, nid in enumerate(nodes)}
    neighbor_sets: list[set] = [set() for _ in nodes]
    for u, v in kept_edges:
        iu, iv = index[u], index[v]
        neighbor_sets[iu].add(iv)
        neighbor_sets[iv].add(iu)

    adjacency = tuple(np.array(sorted(s), dtype=np.int64) for s in neighbor_sets)
    degrees = np.array([len(a) for a in adjacency], dtype=np.int64)

    raw = np.array([float(raw_features[nid]) for nid in nodes], dtype=np.float64)
    if normalize:
        features = normalize_features(raw)
    else:
        if np.any(raw < 0.0) or np.any(raw > 1.0):
            raise GraphError("features must lie in [0, 1] when normalize=False")
        features = raw.copy()

    labels = np.full(len(nodes), LABEL_UNLABELED, dtype=np.int8)
    if positive_ids is not None:
        for pid in positive_ids:
            i = index.get(pid)
            if i is not None:
                labels[i] = LABEL_POSITIVE

    max_degree = int(degrees.max())
    s = 1 << (max_degree - 1).bit_length()

    indptr = np.zeros(len(nodes) + 1, dtype=np.int64)
    np.cumsum(degrees, out=indptr[1:])
    indices = np.concatenate(adjacency) if adjacency else np.empty(0, np.int64)
    walk_counts = np.add.reduceat(degrees[indices], indptr[:-1])

    return AttributedGraph(
        node_ids=tuple(nodes),
        adjacency=adjacency,
        raw_features=raw,
        features=features,
        max_degree_bound=s,
        labels=labels,
        degrees=degrees,
        walk_counts=walk_counts.astype(np.int64),
        csr_indptr=indptr,
        csr_indices=indices,
    )


# ---------------------------------------------------------------------------
# file formats


def _split_row(line: str, path, lineno: int, n_fields: int) -> list[str]:
    parts = line.rstrip("\n").split("\t")
    if len(parts) != n_fields:
        raise GraphError(
            f"{path}:{lineno}: expected {n_fields} tab-separated fields, got {len(parts)}"
        )
    return parts


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def _normalize_id(text: str):
    text = text.strip()
    if not text:
        raise ValueError("empty id")
    return int(text) if text.isdigit() else text


def _looks_like_header(fields: Sequence[str], names: set, rest_numeric: bool) -> bool:
    lowered = [f.strip().lower() for f in fields]
    if all(f in names for f in lowered):
        return True
    # a non-numeric first row over otherwise numeric ids is a header
    return rest_numeric and not any(_is_number(f) for f in lowered)


def read_edge_tsv(path) -> list:
    """Parse a two-column source/target TSV; a header row is auto-detected."""
    path = Path(path)
    rows: list[tuple[int, list[str]]] = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip() or line.startswith("#"):
                continue
            rows.append((lineno, _split_row(line, path, lineno, 2)))
    if not rows:
        return []
    rest_numeric = len(rows) > 1 and all(
        _is_number(f) for _, fields in rows[1:] for f in fields
    )
    if _looks_like_header(rows[0][1], _EDGE_HEADER_NAMES, rest_numeric):
        rows = rows[1:]
    edges = []
    for lineno, fields in rows:
        try:
            edges.append((_normalize_id(fields[0]), _normalize_id(fields[1])))
        except ValueError:
            raise GraphError(f"{path}:{lineno}: empty node id") from None
    return edges


def read_feature_tsv(path) -> dict:
    """Parse a gene<TAB>value TSV into an id -> float map; header auto-detected."""
    path = Path(path)
    rows: list[tuple[int, list[str]]] = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip() or line.startswith("#"):
                continue
            rows.append((lineno, _split_row(line, path, lineno, 2)))
    if rows and not _is_number(rows[0][1][1]):
        lowered = rows[0][1][0].strip().lower()
        if lowered in _FEATURE_HEADER_NAMES or len(rows) == 1 or _is_number(rows[1][1][1]):
            rows = rows[1:]
    features = {}
    for lineno, fields in rows:
        try:
            node_id = _normalize_id(fields[0])
        except ValueError:
            raise GraphError(f"{path}:{lineno}: empty node id") from None
        try:
            value = float(fields[1])
        except ValueError:
            raise GraphError(f"{path}:{lineno}: not a number: {fields[1]!r}") from None
        if node_id in features:
            raise GraphError(f"{path}:{lineno}: duplicate feature row for {node_id!r}")
        features[node_id] = value
    return features


def read_label_lines(path) -> set:
    """Parse a one-id-per-line label file into a set of node ids."""
    path = Path(path)
    labels = set()
    with path.open() as fh:
        for line in fh:
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            labels.add(_normalize_id(text))
    return labels


def save_canonical(g: AttributedGraph, path) -> None:
    """Write the deterministic single-file TSV form: node rows, then ascending edges."""
    path = Path(path)
    lines = [_CANONICAL_MAGIC]
    for i, nid in enumerate(g.node_ids):
        mark = "1" if g.labels[i] == LABEL_POSITIVE else "-"
        lines.append(f"node\t{nid}\t{g.raw_features[i]:.17g}\t{mark}")
    for i in range(g.node_count):
        for j in g.adjacency[i]:
            if i < j:
                lines.append(f"edge\t{g.node_ids[i]}\t{g.node_ids[j]}")
    path.write_text("\n".join(lines) + "\n")


def load_canonical(path) -> AttributedGraph:
    """Rebuild a graph from its canonical TSV; round-trips save_canonical exactly."""
    path = Path(path)
    features: dict = {}
    positives = set()
    edges = []
    with path.open() as fh:
        first = fh.readline().rstrip("\n")
        if first != _CANONICAL_MAGIC:
            raise GraphError(f"{path}: not a canonical graph file")
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if parts[0] == "node":
                if len(parts) != 4:
                    raise GraphError(f"{path}:{lineno}: malformed node row")
                nid = _normalize_id(parts[1])
                features[nid] = float(parts[2])
                if parts[3] == "1":
                    positives.add(nid)
            elif parts[0] == "edge":
                if len(parts) != 3:
                    raise GraphError(f"{path}:{lineno}: malformed edge row")
                edges.append((_normalize_id(parts[1]), _normalize_id(parts[2])))
            else:
                raise GraphError(f"{path}:{lineno}: unknown row kind {parts[0]!r}")
    return build_graph(edges, features, positives)
