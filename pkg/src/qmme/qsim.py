"""Exact statevector simulation of the moment-encoding circuit and swap-test pipeline.

The circuit walks a node's one- and two-hop neighborhoods with superposed
slot registers, rotates feature ancillas by the visited nodes' values, then
uncomputes the walk so that the surviving all-zero-ancilla amplitudes equal
the scaled neighborhood moments.  Everything here is plain linear algebra on
numpy arrays: oracles are basis permutations or block rotations, so every
amplitude stays real.

Register model for the encoding circuit (node index held classically, since
no gate ever moves the node register off its basis state):

    hop1, hop2     neighbor-slot / neighbor-index registers, n qubits each
    hop_select     1 qubit choosing the one- or two-hop moment block
    order          2 qubits selecting how many feature ancillas rotate
    feat1..feat4   feature ancillas
    deg            degree ancilla
    flag1, flag2   out-of-range work flags (returned to 0 by the uncompute)

The swap-test pipeline over (ancilla, test data, test index, label, labeled
data, labeled index) is too wide for one dense array at any graph size, but
the state is always a short sum of products of register states.  The pipeline
simulator evolves that sum stage by stage and reads measurement marginals off
the exact Gram matrix of the product factors.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import hadamard

from .classify import LabeledSet
from .graph import AttributedGraph

DEFAULT_MAX_QUBITS = 26
NORM_TOL = 1e-12

ORACLE_CALLS_PER_CIRCUIT = {"neighbor": 4, "feature": 2, "degree_inverse": 1}

_FEATURE_ANCILLAS = ("feat1", "feat2", "feat3", "feat4")


class SimulationError(RuntimeError):
    """Simulator contract violation (size limits, non-unitary tables, norm drift)."""


# ---------------------------------------------------------------------------
# registers and states


@dataclass(frozen=True)
class Register:
    name: str
    width: int


@dataclass(frozen=True)
class RegisterLayout:
    """Ordered named registers; axis i of a state array belongs to registers[i]."""

    registers: tuple

    def __post_init__(self):
        names = [r.name for r in self.registers]
        if len(set(names)) != len(names):
            raise SimulationError("duplicate register name in layout")

    @property
    def shape(self) -> tuple:
        return tuple(2**r.width for r in self.registers)

    @property
    def total_qubits(self) -> int:
        return sum(r.width for r in self.registers)

    def axis(self, name: str) -> int:
        for i, r in enumerate(self.registers):
            if r.name == name:
                return i
        raise SimulationError(f"no register named {name!r}")

    def width(self, name: str) -> int:
        return self.registers[self.axis(name)].width


@dataclass
class PureState:
    """Statevector over a register layout, one array axis per register.

    Amplitudes are float64; the gate set (Hadamards, basis permutations,
    real rotations) never produces a complex phase.
    """

    layout: RegisterLayout
    amplitudes: np.ndarray
    node: int | None = None

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def basis_amplitude(self, **values) -> float:
        index = tuple(
            int(values.get(r.name, 0)) for r in self.layout.registers
        )
        return float(self.amplitudes[index])

    def flat(self) -> np.ndarray:
        return self.amplitudes.reshape(-1)


def zero_state(layout: RegisterLayout) -> PureState:
    amplitudes = np.zeros(layout.shape)
    amplitudes[(0,) * len(layout.shape)] = 1.0
    return PureState(layout, amplitudes)


def embedding_layout(g: AttributedGraph) -> RegisterLayout:
    n = max(1, (g.node_count - 1).bit_length())
    return RegisterLayout(
        (
            Register("hop1", n),
            Register("hop2", n),
            Register("hop_select", 1),
            Register("order", 2),
            Register("feat1", 1),
            Register("feat2", 1),
            Register("feat3", 1),
            Register("feat4", 1),
            Register("deg", 1),
            Register("flag1", 1),
            Register("flag2", 1),
        )
    )


# ---------------------------------------------------------------------------
# gate plumbing


def _control_parts(arr: np.ndarray, layout: RegisterLayout, control):
    """View of the controlled slice plus a name->axis map valid inside it."""
    axes = {r.name: i for i, r in enumerate(layout.registers)}
    if control is None:
        return arr, axes
    name, value = control
    caxis = axes[name]
    if layout.width(name) != 1 and value >= 2 ** layout.width(name):
        raise SimulationError(f"control value {value} exceeds register {name!r}")
    index = [slice(None)] * arr.ndim
    index[caxis] = int(value)
    view = arr[tuple(index)]
    axes = {n: (a - 1 if a > caxis else a) for n, a in axes.items() if n != name}
    return view, axes


def _apply_joint_permutation(view, axes, names, perm) -> None:
    """Apply the basis permutation |k> -> |perm[k]> on the joint (names) axes."""
    pos = [axes[n] for n in names]
    nd = view.ndim
    tail = list(range(nd - len(pos), nd))
    moved = np.moveaxis(view, pos, tail)
    lead = moved.shape[: nd - len(pos)]
    joint = moved.reshape(lead + (-1,))
    out = joint[..., np.argsort(perm)]
    view[...] = np.moveaxis(out.reshape(moved.shape), tail, pos)


def _rotate_ancilla(view, axes, ancilla, cos, sin, lead_registers=()) -> None:
    """In-place y-rotation of one ancilla qubit.

    cos/sin are scalars, or arrays indexed by the basis contents of
    ``lead_registers`` (moved, in order, directly before the ancilla axis).
    """
    pos = [axes[r] for r in lead_registers] + [axes[ancilla]]
    nd = view.ndim
    moved = np.moveaxis(view, pos, range(nd - len(pos), nd))
    b0 = moved[..., 0].copy()
    b1 = moved[..., 1].copy()
    moved[..., 0] = cos * b0 - sin * b1
    moved[..., 1] = sin * b0 + cos * b1


_HADAMARD_CACHE: dict = {}


def _hadamard_matrix(nbits: int) -> np.ndarray:
    got = _HADAMARD_CACHE.get(nbits)
    if got is None:
        got = hadamard(2**nbits).astype(np.float64) / math.sqrt(2**nbits)
        _HADAMARD_CACHE[nbits] = got
    return got


def apply_hadamards(state: PureState, register: str, nbits: int, *, control=None) -> PureState:
    """Hadamard transform on the low ``nbits`` qubits of a register."""
    width = state.layout.width(register)
    if not 0 <= nbits <= width:
        raise SimulationError(f"cannot apply {nbits} Hadamards to {width}-qubit register")
    arr = state.amplitudes.copy()
    if nbits > 0:
        view, axes = _control_parts(arr, state.layout, control)
        ax = axes[register]
        nd = view.ndim
        moved = np.moveaxis(view, ax, nd - 1)
        lead = moved.shape[: nd - 1]
        blocks = moved.reshape(lead + (2 ** (width - nbits), 2**nbits))
        transformed = blocks @ _hadamard_matrix(nbits)
        view[...] = np.moveaxis(transformed.reshape(moved.shape), nd - 1, ax)
    return PureState(state.layout, arr, state.node)


# ---------------------------------------------------------------------------
# oracles

_GRAPH_CACHE: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def _graph_cache(g: AttributedGraph) -> dict:
    cache = _GRAPH_CACHE.get(g)
    if cache is None:
        cache = {}
        _GRAPH_CACHE[g] = cache
    return cache


def _neighbor_perm_fixed(g: AttributedGraph, source_node: int, target_width: int) -> np.ndarray:
    """Permutation over the joint (target, flag) basis for one source node.

    In-range slots map to the neighbor index with the flag clear; out-of-range
    slots keep their value and set the flag.  The remaining basis states are
    paired up in ascending index order, which is what makes the table total.
    """
    key = ("fixed", source_node, target_width)
    cache = _graph_cache(g)
    perm = cache.get(key)
    if perm is not None:
        return perm
    tdim = 2**target_width
    if source_node < g.node_count:
        neighbors = g.adjacency[source_node]
    else:
        neighbors = np.empty(0, np.int64)
    if len(neighbors) and int(neighbors.max()) >= tdim:
        raise SimulationError("target register too narrow for neighbor indices")
    k = len(neighbors)
    perm = np.full(2 * tdim, -1, dtype=np.int64)
    used = np.zeros(2 * tdim, dtype=bool)
    for t in range(tdim):
        out = (int(neighbors[t]) << 1) if t < k else ((t << 1) | 1)
        perm[t << 1] = out
        used[out] = True
    remaining_out = np.flatnonzero(~used)
    perm[1::2] = remaining_out
    if np.any(perm < 0) or len(np.unique(perm)) != perm.size:
        raise SimulationError("internal: neighbor oracle table is not a permutation")
    cache[key] = perm
    return perm


def _neighbor_perm_sourced(g: AttributedGraph, source_width: int, target_width: int) -> np.ndarray:
    """Permutation over the joint (source, target, flag) basis; source is preserved."""
    key = ("sourced", source_width, target_width)
    cache = _graph_cache(g)
    perm = cache.get(key)
    if perm is not None:
        return perm
    block = 2 ** (target_width + 1)
    parts = []
    for u in range(2**source_width):
        parts.append(_neighbor_perm_fixed(g, u, target_width) + u * block)
    perm = np.concatenate(parts)
    cache[key] = perm
    return perm


def apply_neighbor_oracle(
    state: PureState,
    g: AttributedGraph,
    source,
    target: str,
    flag: str,
    *,
    control=None,
    inverse: bool = False,
) -> PureState:
    """Map |slot> to |neighbor(source, slot)>, flagging out-of-range slots.

    ``source`` is either a fixed node index or the name of a register whose
    basis content selects the row of the adjacency list.  The inverse undoes
    the map and clears the flags it set.
    """
    arr = state.amplitudes.copy()
    view, axes = _control_parts(arr, state.layout, control)
    if isinstance(source, (int, np.integer)):
        perm = _neighbor_perm_fixed(g, int(source), state.layout.width(target))
        names = (target, flag)
    else:
        perm = _neighbor_perm_sourced(
            g, state.layout.width(source), state.layout.width(target)
        )
        names = (source, target, flag)
    if inverse:
        perm = np.argsort(perm)
    _apply_joint_permutation(view, axes, names, perm)
    return PureState(state.layout, arr, state.node)


def _feature_table(g: AttributedGraph, source_dim: int, dprime) -> np.ndarray:
    x = np.zeros(source_dim)
    x[: g.node_count] = g.features
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise SimulationError("feature values must lie in [0, 1]")
    if dprime is not None:
        x = quantize(x, dprime)
    return x


def apply_feature_oracle(
    state: PureState,
    g: AttributedGraph,
    source: str,
    flags: tuple,
    *,
    order: str = "order",
    ancillas: tuple = _FEATURE_ANCILLAS,
    control=None,
    dprime=None,
) -> PureState:
    """Rotate the first (order value + 1) feature ancillas by the source node's feature.

    Each selected ancilla undergoes |0> -> x|0> + sqrt(1 - x^2)|1> with x read
    from the feature of the node held in ``source``; branches with any listed
    flag set (or garbage source content) use x = 0.
    """
    arr = state.amplitudes.copy()
    view, axes = _control_parts(arr, state.layout, control)
    sdim = 2 ** state.layout.width(source)
    x = _feature_table(g, sdim, dprime)
    shape = (sdim,) + (2,) * len(flags)
    cos = np.zeros(shape)
    cos[(slice(None),) + (0,) * len(flags)] = x
    sin = np.sqrt(1.0 - cos**2)
    order_axis = axes[order]
    for j in range(len(ancillas)):
        index = [slice(None)] * view.ndim
        index[order_axis] = slice(j, None)
        _rotate_ancilla(
            view[tuple(index)], axes, ancillas[j], cos, sin,
            lead_registers=(source, *flags),
        )
    return PureState(state.layout, arr, state.node)


def apply_degree_inverse_oracle(
    state: PureState,
    g: AttributedGraph,
    source,
    hop_register: str,
    ancilla: str,
    *,
    dprime=None,
) -> PureState:
    """Rotate the degree ancilla so its |0> amplitude becomes 1/k, with k the
    degree (hop_select basis 0) or two-hop walk count (basis 1) of the source node."""
    arr = state.amplitudes.copy()
    layout = state.layout
    for hop_value, hops in ((0, 1), (1, 2)):
        view, axes = _control_parts(arr, layout, (hop_register, hop_value))
        if isinstance(source, (int, np.integer)):
            alpha = 1.0 / g.degree_query(int(source), hops)
            if dprime is not None:
                alpha = quantize(alpha, dprime)
            cos, sin = alpha, math.sqrt(1.0 - alpha * alpha)
            lead = ()
        else:
            sdim = 2 ** layout.width(source)
            alpha = np.ones(sdim)
            for u in range(g.node_count):
                alpha[u] = 1.0 / g.degree_query(u, hops)
            if dprime is not None:
                alpha = quantize(alpha, dprime)
            cos, sin = alpha, np.sqrt(1.0 - alpha**2)
            lead = (source,)
        _rotate_ancilla(view, axes, ancilla, cos, sin, lead_registers=lead)
    return PureState(layout, arr, state.node)


# ---------------------------------------------------------------------------
# the encoding circuit


def run_embedding_circuit(
    g: AttributedGraph,
    v: int,
    dprime=None,
    *,
    max_qubits: int = DEFAULT_MAX_QUBITS,
) -> PureState:
    """Prepare the moment-encoding state for node v by exact gate simulation.

    The amplitude at basis (hop1=0, hop2=0, hop_select=c, order=b, all
    ancillas and flags 0) equals the (b+1)-th raw moment of the (c+1)-hop
    neighborhood features divided by 2^(3/2) * s^(c+1); everything else is
    the orthogonal remainder the uncompute leaves behind.
    """
    g._check_node(v)
    layout = embedding_layout(g)
    if layout.total_qubits > max_qubits:
        raise SimulationError(
            f"circuit needs {layout.total_qubits} simulated qubits, above the "
            f"{max_qubits}-qubit limit; use the algebraic embedding path instead"
        )
    s_bits = g.degree_bits
    state = zero_state(layout)
    state = apply_hadamards(state, "hop1", s_bits)
    state = apply_neighbor_oracle(state, g, v, "hop1", "flag1")
    state = apply_hadamards(state, "hop_select", 1)
    state = apply_hadamards(state, "hop2", s_bits, control=("hop_select", 1))
    state = apply_neighbor_oracle(
        state, g, "hop1", "hop2", "flag2", control=("hop_select", 1)
    )
    state = apply_hadamards(state, "order", 2)
    state = apply_feature_oracle(
        state, g, "hop1", ("flag1",), control=("hop_select", 0), dprime=dprime
    )
    state = apply_feature_oracle(
        state, g, "hop2", ("flag1", "flag2"), control=("hop_select", 1), dprime=dprime
    )
    state = apply_neighbor_oracle(
        state, g, "hop1", "hop2", "flag2", control=("hop_select", 1), inverse=True
    )
    state = apply_hadamards(state, "hop2", s_bits, control=("hop_select", 1))
    state = apply_neighbor_oracle(state, g, v, "hop1", "flag1", inverse=True)
    state = apply_hadamards(state, "hop1", s_bits)
    state = apply_degree_inverse_oracle(state, g, v, "hop_select", "deg", dprime=dprime)
    state.node = v
    norm = state.norm()
    if abs(norm - 1.0) > NORM_TOL:
        raise SimulationError(f"state norm drifted to {norm!r}")
    return state


def extract_moment_amplitudes(state: PureState) -> np.ndarray:
    """The eight moment amplitudes: hop_select=0 block then 1, order ascending."""
    out = np.empty(8)
    for c in (0, 1):
        for b in range(4):
            out[4 * c + b] = state.basis_amplitude(hop_select=c, order=b)
    return out


_STATE_CACHE: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def _embedding_amplitudes(g, v, dprime, max_qubits) -> np.ndarray:
    """Cached flat statevector for (g, v); callers must not mutate the result."""
    per_graph = _STATE_CACHE.get(g)
    if per_graph is None:
        per_graph = {}
        _STATE_CACHE[g] = per_graph
    key = (v, dprime)
    vec = per_graph.get(key)
    if vec is None:
        vec = run_embedding_circuit(g, v, dprime, max_qubits=max_qubits).flat()
        per_graph[key] = vec
    return vec


def embedding_state_matrix(
    g: AttributedGraph, dprime=None, *, max_qubits: int = DEFAULT_MAX_QUBITS
) -> np.ndarray:
    """Row v holds the full circuit statevector of node v (small graphs only)."""
    return np.stack(
        [_embedding_amplitudes(g, v, dprime, max_qubits) for v in range(g.node_count)]
    )


# ---------------------------------------------------------------------------
# fixed-point quantization


def quantize(x, dprime: int):
    """Round values in [0, 1] to the nearest multiple of 2^-dprime, ties to even.

    At dprime >= 53 a float64 in [0, 1] carries no deeper fractional
    information than the grid resolves, so the input is returned unchanged.
    """
    if not isinstance(dprime, (int, np.integer)) or dprime < 1:
        raise ValueError(f"dprime must be a positive integer, got {dprime!r}")
    values = np.asarray(x, dtype=np.float64)
    if np.any(values < 0.0) or np.any(values > 1.0):
        raise ValueError("quantize expects values in [0, 1]")
    if dprime >= 53:
        return x if isinstance(x, np.ndarray) else float(x)
    scale = 2.0**dprime
    out = np.round(values * scale) / scale
    return out if isinstance(x, np.ndarray) else float(out)


# ---------------------------------------------------------------------------
# swap-test pipeline


@dataclass(frozen=True)
class PipelineTerm:
    """One product component: coeff * |ancilla, label, labeled_index> (x) test (x) labeled."""

    coeff: float
    ancilla: int
    label: int
    labeled_node: int
    test_vec: np.ndarray
    labeled_vec: np.ndarray


@dataclass
class PipelineState:
    """Swap-test pipeline state as an exact sum of product terms.

    The classical-basis registers (ancilla, label, labeled index) are explicit
    per term; the two data registers appear as full circuit statevectors.  The
    dense joint array would need layout.total_qubits qubits, which is why the
    sum-of-products form is the representation.
    """

    layout: RegisterLayout
    graph: AttributedGraph
    test_node: int
    labeled: LabeledSet
    terms: list


def pipeline_layout(g: AttributedGraph) -> RegisterLayout:
    n = max(1, (g.node_count - 1).bit_length())
    data = 2 * n + 8 + 2  # moment-encoding registers plus the two work flags
    return RegisterLayout(
        (
            Register("swap_ancilla", 1),
            Register("test_data", data),
            Register("test_index", n),
            Register("label", 1),
            Register("labeled_data", data),
            Register("labeled_index", n),
        )
    )


def _prepare_labeled_superposition(labeled: LabeledSet, zero_vec: np.ndarray) -> list:
    amp = 1.0 / math.sqrt(len(labeled.nodes))
    return [
        PipelineTerm(amp, 0, 0, node, zero_vec, zero_vec) for node in labeled.nodes
    ]


def _apply_embedding_to_terms(terms, g, test_node, dprime, max_qubits) -> list:
    test_vec = _embedding_amplitudes(g, test_node, dprime, max_qubits)
    return [
        replace(
            t,
            test_vec=test_vec,
            labeled_vec=_embedding_amplitudes(g, t.labeled_node, dprime, max_qubits),
        )
        for t in terms
    ]


def _apply_label_oracle(terms, labeled: LabeledSet) -> list:
    return [replace(t, label=t.label ^ labeled.label_of(t.labeled_node)) for t in terms]


def _apply_ancilla_hadamard(terms) -> list:
    inv = 1.0 / math.sqrt(2.0)
    out = []
    for t in terms:
        if t.ancilla == 0:
            out.append(replace(t, coeff=t.coeff * inv, ancilla=0))
            out.append(replace(t, coeff=t.coeff * inv, ancilla=1))
        else:
            out.append(replace(t, coeff=t.coeff * inv, ancilla=0))
            out.append(replace(t, coeff=-t.coeff * inv, ancilla=1))
    return out


def _apply_controlled_swap(terms) -> list:
    return [
        replace(t, test_vec=t.labeled_vec, labeled_vec=t.test_vec)
        if t.ancilla == 1
        else t
        for t in terms
    ]


def run_swap_test_pipeline(
    g: AttributedGraph,
    test_node: int,
    labeled: LabeledSet,
    dprime=None,
    *,
    max_qubits: int = DEFAULT_MAX_QUBITS,
) -> PipelineState:
    """Evolve the full classification pipeline for one test node.

    Stages: uniform superposition over the labeled-index register, the
    encoding circuit on both data registers, the label oracle, then the
    Hadamard / controlled-swap / Hadamard swap test on the ancilla.
    """
    size = len(labeled.nodes)
    if size & (size - 1):
        raise SimulationError(
            f"labeled-set size must be a power of two in the simulated pipeline, got {size}"
        )
    g._check_node(test_node)
    layout = pipeline_layout(g)
    dim = 2 ** (embedding_layout(g).total_qubits)
    zero_vec = np.zeros(dim)
    zero_vec[0] = 1.0
    terms = _prepare_labeled_superposition(labeled, zero_vec)
    terms = _apply_embedding_to_terms(terms, g, test_node, dprime, max_qubits)
    terms = _apply_label_oracle(terms, labeled)
    terms = _apply_ancilla_hadamard(terms)
    terms = _apply_controlled_swap(terms)
    terms = _apply_ancilla_hadamard(terms)
    return PipelineState(layout, g, test_node, labeled, terms)


def joint_measurement_distribution(p: PipelineState) -> np.ndarray:
    """Exact joint Born distribution P[ancilla, label] of the final state.

    Probabilities come from the Gram matrix of the product terms: terms with
    different labeled-index values are orthogonal, terms sharing one combine
    through the inner products of their data-register factors.
    """
    groups: dict = {}
    for t in p.terms:
        groups.setdefault((t.ancilla, t.label, t.labeled_node), []).append(t)
    dots: dict = {}

    def dot(a: np.ndarray, b: np.ndarray) -> float:
        key = (id(a), id(b)) if id(a) <= id(b) else (id(b), id(a))
        got = dots.get(key)
        if got is None:
            got = float(np.dot(a, b))
            dots[key] = got
        return got

    prob = np.zeros((2, 2))
    for (ancilla, label, _node), group in groups.items():
        total = 0.0
        for tj in group:
            for tk in group:
                total += (
                    tj.coeff
                    * tk.coeff
                    * dot(tj.test_vec, tk.test_vec)
                    * dot(tj.labeled_vec, tk.labeled_vec)
                )
        prob[ancilla, label] += total
    if abs(prob.sum() - 1.0) > NORM_TOL:
        raise SimulationError(f"pipeline state norm drifted, sum(P) = {prob.sum()!r}")
    return np.clip(prob, 0.0, 1.0)


def expectation_from_distribution(prob: np.ndarray) -> float:
    """Parity expectation P00 - P01 - P10 + P11 of the ancilla and label bits."""
    return float(prob[0, 0] - prob[0, 1] - prob[1, 0] + prob[1, 1])


# ---------------------------------------------------------------------------
# resource accounting


def resource_estimate(
    n_nodes: int,
    max_degree_bound: int | None = None,
    dprime: int | None = None,
    n_labeled: int | None = None,
    epsilon: float | None = None,
) -> dict:
    """Concrete register widths, oracle counts, and shot requirements.

    The data register takes m = 2*ceil(log2 N) + 8 qubits; the two-state
    pipeline adds the mirror data register, both index registers, the label
    qubit and the swap ancilla for 2m + 2*ceil(log2 N) + 2 in total.
    """
    if n_nodes < 1:
        raise ValueError("n_nodes must be positive")
    for name, value in (("max_degree_bound", max_degree_bound), ("n_labeled", n_labeled)):
        if value is not None and value < 1:
            raise ValueError(f"{name} must be positive")
    if dprime is not None and dprime < 1:
        raise ValueError("dprime must be positive")
    if epsilon is not None and not 0 < epsilon:
        raise ValueError("epsilon must be positive")
    n = (n_nodes - 1).bit_length()
    m_qubits = 2 * n + 8
    report = {
        "inputs": {
            "n_nodes": n_nodes,
            "max_degree_bound": max_degree_bound,
            "dprime": dprime,
            "n_labeled": n_labeled,
            "epsilon": epsilon,
        },
        "m_qubits": m_qubits,
        "total_qubits": 2 * m_qubits + 2 * n + 2,
        "oracle_calls": dict(ORACLE_CALLS_PER_CIRCUIT),
        "asymptotics": {
            "gates": "O(polylog(N) + d')",
            "depth": "O(log N)",
            "oracle_queries": "O(log^2 s)",
        },
        "shots_for_epsilon": (
            None if epsilon is None else math.ceil(1.0 / (epsilon * epsilon))
        ),
    }
    if n_labeled is not None:
        report["labeled_superposition_qubits"] = max(1, (n_labeled - 1).bit_length())
    return report


def dump_state_tsv(state: PureState, path, threshold: float = 0.0) -> None:
    """Debug export: basis-index<TAB>amplitude rows for entries above threshold."""
    flat = state.flat()
    with open(path, "w") as fh:
        fh.write("basis_index\tamplitude\n")
        for idx in np.flatnonzero(np.abs(flat) > threshold):
            fh.write(f"{int(idx)}\t{flat[idx]:.17g}\n")
