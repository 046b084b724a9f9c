"""Algebraic moment embeddings of node neighborhoods.

A node's embedding stacks the first four raw moments of the feature values
seen from its one-hop neighborhood and from the multiset of its two-hop walk
endpoints.  The scaled variant multiplies in the amplitude prefactors
2^(-3/2) / s^c, which makes the vector coincide with the basis amplitudes the
encoding circuit prepares (so its Euclidean norm never exceeds 1).  The MoPro
baseline keeps the node's own feature plus its one-hop moments.
"""

from __future__ import annotations

import numpy as np

from .graph import AttributedGraph

MOMENT_ORDERS = 4
QMME_DIM = 8
MOPRO_DIM = 5

METHODS = ("qmme", "mopro")

_POWERS = np.arange(1, MOMENT_ORDERS + 1)


def raw_moments(sample) -> np.ndarray:
    """First four raw sample moments (1/k) sum(x**i) of a nonempty sample."""
    values = np.asarray(sample, dtype=np.float64).ravel()
    if values.size == 0:
        raise ValueError("empty neighborhood")
    if not np.all(np.isfinite(values)):
        raise ValueError("non-finite sample value")
    return (values[:, None] ** _POWERS).mean(axis=0)


def neighborhood_moments(g: AttributedGraph, v: int, hops: int) -> np.ndarray:
    """Moments of the feature values over the one- or two-hop neighborhood of v.

    hops=2 averages over walk endpoints, so features reachable along several
    walks (including backtracking to v itself) count with multiplicity.
    """
    if hops == 1:
        sample = g.features[g.adjacency[v]]
    elif hops == 2:
        sample = g.features[g.two_hop_walk_endpoints(v)]
    else:
        raise ValueError(f"hop order must be 1 or 2, got {hops}")
    return raw_moments(sample)


def moment_feature_embedding(g: AttributedGraph, v: int) -> np.ndarray:
    """Concatenated one-hop and two-hop moment vectors, length 8."""
    return np.concatenate(
        [neighborhood_moments(g, v, 1), neighborhood_moments(g, v, 2)]
    )


def scale_vector(s: int) -> np.ndarray:
    """Amplitude prefactors 2^(-3/2)/s for the one-hop block, 2^(-3/2)/s^2 for two-hop."""
    if s < 1:
        raise ValueError(f"degree bound must be positive, got {s}")
    c = 2.0**-1.5
    return np.array([c / s] * MOMENT_ORDERS + [c / s**2] * MOMENT_ORDERS)


def scaled_embedding(g: AttributedGraph, v: int) -> np.ndarray:
    """Element-wise product of the scale vector and the moment embedding."""
    return scale_vector(g.max_degree_bound) * moment_feature_embedding(g, v)


def mopro_embedding(g: AttributedGraph, v: int) -> np.ndarray:
    """Baseline 5-vector: own feature followed by the one-hop moments."""
    return np.concatenate(
        [[g.features[v]], neighborhood_moments(g, v, 1)]
    )


def embed_all(g: AttributedGraph, method: str = "qmme") -> np.ndarray:
    """Embedding matrix with one row per node.

    qmme rows equal scaled_embedding(g, v); mopro rows equal
    mopro_embedding(g, v).  Two-hop moments are accumulated through per-node
    neighbor power sums, which keeps the cost linear in the edge count instead
    of materializing every walk-endpoint multiset.
    """
    if method not in METHODS:
        raise ValueError(f"unknown embedding method {method!r}")
    powers = g.features[:, None] ** _POWERS
    starts = g.csr_indptr[:-1]
    hop1_sums = np.add.reduceat(powers[g.csr_indices], starts, axis=0)
    hop1 = hop1_sums / g.degrees[:, None]
    if method == "mopro":
        return np.concatenate([g.features[:, None], hop1], axis=1)
    hop2_sums = np.add.reduceat(hop1_sums[g.csr_indices], starts, axis=0)
    hop2 = hop2_sums / g.walk_counts[:, None]
    return np.concatenate([hop1, hop2], axis=1) * scale_vector(g.max_degree_bound)


def write_embeddings_tsv(path, g: AttributedGraph, matrix: np.ndarray, method: str,
                         config_line: str | None = None) -> None:
    """Export an embedding matrix as node<TAB>a1..a8 (or z1..z5) at 17 significant digits."""
    prefix = "a" if matrix.shape[1] == QMME_DIM else "z"
    header = "node\t" + "\t".join(f"{prefix}{j + 1}" for j in range(matrix.shape[1]))
    lines = []
    if config_line is not None:
        lines.append(f"# config: {config_line}")
    lines.append(header)
    for i in range(g.node_count):
        row = "\t".join(f"{x:.17g}" for x in matrix[i])
        lines.append(f"{g.node_ids[i]}\t{row}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_embeddings_tsv(path) -> dict:
    """Parse an embedding TSV back into an id -> vector map."""
    out: dict = {}
    with open(path) as fh:
        for line in fh:
            if not line.strip() or line.startswith("#") or line.startswith("node\t"):
                continue
            parts = line.rstrip("\n").split("\t")
            key = parts[0]
            out[int(key) if key.isdigit() else key] = np.array(
                [float(x) for x in parts[1:]]
            )
    return out
