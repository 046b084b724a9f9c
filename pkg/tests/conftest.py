import numpy as np
import pytest

from qmme import graph


def random_graph(rng: np.random.Generator, n_nodes: int, deg_cap: int = 4) -> graph.AttributedGraph:
    """Connected random graph: a degree-capped tree plus a few extra edges."""
    degree = np.zeros(n_nodes, dtype=np.int64)
    edges = []
    for i in range(1, n_nodes):
        candidates = [p for p in range(i) if degree[p] < deg_cap]
        parent = int(rng.choice(candidates))
        edges.append((parent, i))
        degree[parent] += 1
        degree[i] += 1
    for _ in range(n_nodes):
        a, b = (int(x) for x in rng.integers(0, n_nodes, 2))
        if a == b or degree[a] >= deg_cap or degree[b] >= deg_cap:
            continue
        if (min(a, b), max(a, b)) in edges:
            continue
        edges.append((min(a, b), max(a, b)))
        degree[a] += 1
        degree[b] += 1
    features = {i: float(rng.random()) for i in range(n_nodes)}
    return graph.build_graph(edges, features, normalize=False)


@pytest.fixture
def path_graph() -> graph.AttributedGraph:
    # 0 - 1 - 2 with features kept as given; the embed tests rely on the
    # hand-derived moment values for this graph
    return graph.build_graph(
        [(0, 1), (1, 2)], {0: 0.2, 1: 0.5, 2: 1.0}, normalize=False
    )
