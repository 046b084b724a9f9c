import math

import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import given

from qmme import classify, embed, graph, qsim

from conftest import random_graph


def _basis_state(layout, **values):
    st_ = qsim.zero_state(layout)
    st_.amplitudes[(0,) * st_.amplitudes.ndim] = 0.0
    idx = tuple(int(values.get(r.name, 0)) for r in layout.registers)
    st_.amplitudes[idx] = 1.0
    return st_


# ---------------------------------------------------------------------------
# oracles


def test_neighbor_oracle_maps_slots_and_flags(path_graph):
    layout = qsim.embedding_layout(path_graph)
    # node 1 has neighbors [0, 2]; slot 0 -> node 0
    state = _basis_state(layout, hop1=0)
    out = qsim.apply_neighbor_oracle(state, path_graph, 1, "hop1", "flag1")
    assert out.basis_amplitude(hop1=0, flag1=0) == 1.0
    # slot 1 -> node 2
    state = _basis_state(layout, hop1=1)
    out = qsim.apply_neighbor_oracle(state, path_graph, 1, "hop1", "flag1")
    assert out.basis_amplitude(hop1=2, flag1=0) == 1.0
    # node 0 has degree 1: slot 1 is out of range and keeps its value, flag set
    state = _basis_state(layout, hop1=1)
    out = qsim.apply_neighbor_oracle(state, path_graph, 0, "hop1", "flag1")
    assert out.basis_amplitude(hop1=1, flag1=1) == 1.0


def test_neighbor_oracle_inverse_is_exact(path_graph):
    rng = np.random.default_rng(0)
    layout = qsim.embedding_layout(path_graph)
    state = qsim.zero_state(layout)
    state.amplitudes = rng.normal(size=layout.shape)
    state.amplitudes /= np.linalg.norm(state.amplitudes)
    fwd = qsim.apply_neighbor_oracle(state, path_graph, 1, "hop1", "flag1")
    back = qsim.apply_neighbor_oracle(fwd, path_graph, 1, "hop1", "flag1", inverse=True)
    assert np.allclose(back.amplitudes, state.amplitudes, atol=0)
    assert fwd.norm() == pytest.approx(1.0, abs=1e-12)


def test_sourced_neighbor_oracle_reads_source_register(path_graph):
    layout = qsim.embedding_layout(path_graph)
    # hop1 holds node 2 (its single neighbor is node 1), hop_select=1 arms the control
    state = _basis_state(layout, hop1=2, hop2=0, hop_select=1)
    out = qsim.apply_neighbor_oracle(
        state, path_graph, "hop1", "hop2", "flag2", control=("hop_select", 1)
    )
    assert out.basis_amplitude(hop1=2, hop2=1, hop_select=1) == 1.0
    # with the control off nothing moves
    state = _basis_state(layout, hop1=2, hop2=0, hop_select=0)
    out = qsim.apply_neighbor_oracle(
        state, path_graph, "hop1", "hop2", "flag2", control=("hop_select", 1)
    )
    assert out.basis_amplitude(hop1=2, hop2=0, hop_select=0) == 1.0


def test_feature_oracle_rotates_order_plus_one_ancillas(path_graph):
    layout = qsim.embedding_layout(path_graph)
    x1 = path_graph.features[1]
    for order in range(4):
        state = _basis_state(layout, hop1=1, order=order)
        out = qsim.apply_feature_oracle(
            state, path_graph, "hop1", ("flag1",), control=("hop_select", 0)
        )
        amp = out.basis_amplitude(hop1=1, order=order)
        assert amp == pytest.approx(x1 ** (order + 1), abs=1e-15)
    # flagged branch: the rotation uses x = 0, so every armed ancilla flips
    state = _basis_state(layout, hop1=1, order=1, flag1=1)
    out = qsim.apply_feature_oracle(
        state, path_graph, "hop1", ("flag1",), control=("hop_select", 0)
    )
    assert out.basis_amplitude(hop1=1, order=1, flag1=1) == 0.0
    assert out.basis_amplitude(hop1=1, order=1, flag1=1, feat1=1, feat2=1) == 1.0


def test_degree_inverse_oracle_scales_by_reciprocal_counts(path_graph):
    layout = qsim.embedding_layout(path_graph)
    state = _basis_state(layout, hop_select=0)
    out = qsim.apply_degree_inverse_oracle(state, path_graph, 1, "hop_select", "deg")
    assert out.basis_amplitude(hop_select=0, deg=0) == pytest.approx(1 / 2)
    state = _basis_state(layout, hop_select=1)
    out = qsim.apply_degree_inverse_oracle(state, path_graph, 1, "hop_select", "deg")
    assert out.basis_amplitude(hop_select=1, deg=0) == pytest.approx(1 / 2)
    assert out.norm() == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------------------
# the encoding circuit


def test_circuit_matches_algebra_on_path_graph(path_graph):
    state = qsim.run_embedding_circuit(path_graph, 1)
    amps = qsim.extract_moment_amplitudes(state)
    assert amps[0] == pytest.approx(0.10606601717798213, abs=1e-12)
    assert np.allclose(amps, embed.scaled_embedding(path_graph, 1), atol=1e-12)
    assert state.norm() == pytest.approx(1.0, abs=1e-12)


def test_circuit_is_deterministic(path_graph):
    a = qsim.run_embedding_circuit(path_graph, 0).flat()
    b = qsim.run_embedding_circuit(path_graph, 0).flat()
    assert np.array_equal(a, b)


def test_circuit_saturated_single_edge_has_no_remainder():
    g = graph.build_graph([(0, 1)], {0: 1.0, 1: 1.0}, normalize=False)
    state = qsim.run_embedding_circuit(g, 0)
    amps = qsim.extract_moment_amplitudes(state)
    assert np.allclose(amps, 2.0**-1.5, atol=1e-12)
    # with all features 1 and s = 1 the moment block carries the whole norm
    flat = state.flat()
    assert np.count_nonzero(np.abs(flat) > 1e-9) == 8


def test_circuit_matches_algebra_on_random_graphs():
    rng = np.random.default_rng(23)
    for _ in range(10):
        g = random_graph(rng, int(rng.integers(3, 12)))
        for v in range(g.node_count):
            amps = qsim.extract_moment_amplitudes(qsim.run_embedding_circuit(g, v))
            assert np.allclose(amps, embed.scaled_embedding(g, v), atol=1e-12)


def test_circuit_respects_qubit_budget():
    rng = np.random.default_rng(1)
    g = random_graph(rng, 20)
    with pytest.raises(qsim.SimulationError, match="algebraic embedding path"):
        qsim.run_embedding_circuit(g, 0, max_qubits=12)


def test_quantized_circuit_stays_normalized_and_close(path_graph):
    exact = qsim.extract_moment_amplitudes(qsim.run_embedding_circuit(path_graph, 1))
    state = qsim.run_embedding_circuit(path_graph, 1, dprime=8)
    q = qsim.extract_moment_amplitudes(state)
    assert state.norm() == pytest.approx(1.0, abs=1e-12)
    assert np.max(np.abs(q - exact)) < 0.02
    # 53-bit grids cannot move a double in [0, 1]
    q53 = qsim.extract_moment_amplitudes(qsim.run_embedding_circuit(path_graph, 1, dprime=53))
    assert np.array_equal(q53, exact)


# ---------------------------------------------------------------------------
# quantization


def test_quantize_examples():
    assert qsim.quantize(0.3, 2) == 0.25
    assert qsim.quantize(0.3, 3) == 0.25
    assert qsim.quantize(0.2, 3) == 0.25
    assert qsim.quantize(0.5, 1) == 0.5
    # ties round to even multiples of the grid
    assert qsim.quantize(0.25, 1) == 0.0
    assert qsim.quantize(0.75, 1) == 1.0
    assert qsim.quantize(0.3, 53) == 0.3
    arr = qsim.quantize(np.array([0.1, 0.9]), 4)
    assert np.allclose(arr, [0.125, 0.875], atol=0)


def test_quantize_rejects_bad_inputs():
    with pytest.raises(ValueError, match="positive integer"):
        qsim.quantize(0.5, 0)
    with pytest.raises(ValueError, match="positive integer"):
        qsim.quantize(0.5, 2.0)
    with pytest.raises(ValueError, match="values in"):
        qsim.quantize(1.5, 4)


@given(st.floats(0.0, 1.0), st.integers(1, 40))
def test_quantize_lands_on_grid_within_half_step(x, dprime):
    q = qsim.quantize(x, dprime)
    scale = 2.0**dprime
    assert q * scale == np.round(q * scale)
    assert abs(q - x) <= 0.5 / scale + 1e-18
    assert qsim.quantize(q, dprime) == q


# ---------------------------------------------------------------------------
# swap-test pipeline


def _pipeline_expectation(g, test_node, labeled):
    p = qsim.run_swap_test_pipeline(g, test_node, labeled)
    return qsim.expectation_from_distribution(qsim.joint_measurement_distribution(p))


def test_pipeline_self_match_hits_expectation_extremes(path_graph):
    # identical embeddings give kernel 1; the label sign decides the parity
    assert _pipeline_expectation(
        path_graph, 1, classify.LabeledSet((1,), (1,))
    ) == pytest.approx(-1.0, abs=1e-12)
    assert _pipeline_expectation(
        path_graph, 1, classify.LabeledSet((1,), (0,))
    ) == pytest.approx(1.0, abs=1e-12)


def test_pipeline_distribution_is_normalized(path_graph):
    labeled = classify.LabeledSet((0, 2), (1, 0))
    p = qsim.run_swap_test_pipeline(path_graph, 1, labeled)
    dist = qsim.joint_measurement_distribution(p)
    assert dist.shape == (2, 2)
    assert np.all(dist >= 0.0)
    assert dist.sum() == pytest.approx(1.0, abs=1e-12)


def test_pipeline_requires_power_of_two_labeled_set(path_graph):
    labeled = classify.LabeledSet((0, 1, 2), (1, 0, 0))
    with pytest.raises(qsim.SimulationError, match="power of two"):
        qsim.run_swap_test_pipeline(path_graph, 0, labeled)


def test_pipeline_matches_kernel_formula_on_random_cases():
    rng = np.random.default_rng(31)
    for _ in range(6):
        g = random_graph(rng, int(rng.integers(4, 9)))
        n = g.node_count
        size = int(rng.choice([2, 4]))
        nodes = tuple(int(v) for v in rng.choice(n, size=min(size, n - 1), replace=False))
        if len(nodes) not in (2, 4):
            continue
        labels = tuple(int(b) for b in rng.integers(0, 2, len(nodes)))
        labeled = classify.LabeledSet(nodes, labels)
        test_node = next(v for v in range(n) if v not in nodes)
        states = qsim.embedding_state_matrix(g)
        K = classify.kernel_matrix(
            states[[test_node]], states[list(nodes)], "full-state", (test_node,), nodes
        )
        expected = classify.expectation_value(test_node, labeled, K)
        assert _pipeline_expectation(g, test_node, labeled) == pytest.approx(
            expected, abs=1e-12
        )


def test_pipeline_swap_moves_orthogonal_terms():
    # two orthogonal labeled vectors against a test vector equal to the first:
    # kernels are 1 and 0, labels 1 and 0, so the parity expectation is
    # (1/2) * (+0 - 1) = -1/2
    g = graph.build_graph([(0, 1), (1, 2), (2, 3)], {0: 0.1, 1: 0.4, 2: 0.7, 3: 1.0})
    dim = 2 ** qsim.embedding_layout(g).total_qubits
    e0 = np.zeros(dim)
    e0[0] = 1.0
    e1 = np.zeros(dim)
    e1[1] = 1.0
    terms = [
        qsim.PipelineTerm(1 / math.sqrt(2), 0, 0, 0, e0, e0),
        qsim.PipelineTerm(1 / math.sqrt(2), 0, 0, 1, e0, e1),
    ]
    labeled = classify.LabeledSet((0, 1), (1, 0))
    terms = qsim._apply_label_oracle(terms, labeled)
    terms = qsim._apply_ancilla_hadamard(terms)
    terms = qsim._apply_controlled_swap(terms)
    terms = qsim._apply_ancilla_hadamard(terms)
    p = qsim.PipelineState(qsim.pipeline_layout(g), g, 0, labeled, terms)
    dist = qsim.joint_measurement_distribution(p)
    assert qsim.expectation_from_distribution(dist) == pytest.approx(-0.5, abs=1e-12)


# ---------------------------------------------------------------------------
# resources


def test_resource_estimate_register_widths():
    assert qsim.resource_estimate(1024)["m_qubits"] == 28
    assert qsim.resource_estimate(2)["total_qubits"] == 24
    r = qsim.resource_estimate(1000, max_degree_bound=16, epsilon=0.03, n_labeled=6)
    assert r["m_qubits"] == 2 * 10 + 8
    assert r["total_qubits"] == 2 * r["m_qubits"] + 2 * 10 + 2
    assert r["oracle_calls"] == {"neighbor": 4, "feature": 2, "degree_inverse": 1}
    assert r["shots_for_epsilon"] == math.ceil(1 / 0.03**2)
    assert r["labeled_superposition_qubits"] == 3


def test_resource_estimate_validates_inputs():
    with pytest.raises(ValueError):
        qsim.resource_estimate(0)
    with pytest.raises(ValueError):
        qsim.resource_estimate(4, epsilon=0.0)
    with pytest.raises(ValueError):
        qsim.resource_estimate(4, dprime=0)


def test_feature_oracle_leaves_unit_feature_alone(path_graph):
    # node 2 has feature 1.0, so the rotation is the identity on the zero sector
    layout = qsim.embedding_layout(path_graph)
    state = _basis_state(layout, hop1=2, order=3)
    out = qsim.apply_feature_oracle(
        state, path_graph, "hop1", ("flag1",), control=("hop_select", 0)
    )
    assert out.basis_amplitude(hop1=2, order=3) == 1.0


def test_degree_inverse_oracle_identity_and_squared_counts(path_graph):
    # degree-1 node: nothing to undo
    layout = qsim.embedding_layout(path_graph)
    state = _basis_state(layout, hop_select=0)
    out = qsim.apply_degree_inverse_oracle(state, path_graph, 0, "hop_select", "deg")
    assert out.basis_amplitude(hop_select=0, deg=0) == 1.0
    # triangle: degree 2 everywhere, so each node has 4 two-hop walks
    tri = graph.build_graph([(0, 1), (1, 2), (0, 2)], {0: 0.2, 1: 0.5, 2: 0.8},
                            normalize=False)
    layout = qsim.embedding_layout(tri)
    state = _basis_state(layout, hop_select=1)
    out = qsim.apply_degree_inverse_oracle(state, tri, 0, "hop_select", "deg")
    assert out.basis_amplitude(hop_select=1, deg=0) == pytest.approx(0.25, abs=1e-15)


def test_circuit_zero_features_zero_moment_sector():
    g = graph.build_graph([(0, 1), (1, 2)], {v: 0.0 for v in range(3)},
                          normalize=False)
    for v in range(3):
        amps = qsim.extract_moment_amplitudes(qsim.run_embedding_circuit(g, v))
        assert np.array_equal(amps, np.zeros(8))


def test_pipeline_equidistant_pair_cancels(path_graph):
    # nodes 0 and 2 mirror each other, so opposite labels cancel exactly
    labeled = classify.LabeledSet((0, 2), (0, 1))
    assert _pipeline_expectation(path_graph, 1, labeled) == pytest.approx(
        0.0, abs=1e-12
    )


def test_joint_distribution_extremes(path_graph):
    # perfect overlap with label 1 puts all mass on (ancilla 0, label 1)
    p = qsim.run_swap_test_pipeline(path_graph, 1, classify.LabeledSet((1,), (1,)))
    dist = qsim.joint_measurement_distribution(p)
    assert dist[0, 1] == pytest.approx(1.0, abs=1e-12)
    assert dist[0, 0] == pytest.approx(0.0, abs=1e-12)
    assert dist[1, 0] == pytest.approx(0.0, abs=1e-12)
    # an orthogonal pair splits evenly between the ancilla outcomes
    g = graph.build_graph([(0, 1), (1, 2), (2, 3)], {0: 0.1, 1: 0.4, 2: 0.7, 3: 1.0})
    dim = 2 ** qsim.embedding_layout(g).total_qubits
    e0 = np.zeros(dim)
    e0[0] = 1.0
    e1 = np.zeros(dim)
    e1[1] = 1.0
    labeled = classify.LabeledSet((0,), (0,))
    terms = [qsim.PipelineTerm(1.0, 0, 0, 0, e0, e1)]
    terms = qsim._apply_label_oracle(terms, labeled)
    terms = qsim._apply_ancilla_hadamard(terms)
    terms = qsim._apply_controlled_swap(terms)
    terms = qsim._apply_ancilla_hadamard(terms)
    p = qsim.PipelineState(qsim.pipeline_layout(g), g, 0, labeled, terms)
    dist = qsim.joint_measurement_distribution(p)
    assert dist[0, 0] == pytest.approx(0.5, abs=1e-12)
    assert dist[1, 0] == pytest.approx(0.5, abs=1e-12)


def test_resource_estimate_shot_budget_percent_error():
    assert qsim.resource_estimate(16, epsilon=0.01)["shots_for_epsilon"] == 10_000
