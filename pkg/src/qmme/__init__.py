"""Quantum multi-order moment embeddings and swap-test classification.

The package turns an attributed interaction network into per-node moment
embeddings, simulates the amplitude-encoding circuit that prepares them,
and classifies nodes with a fidelity-kernel swap test.  Modules:

graph     network container, oracle-style queries, TSV ingestion
embed     algebraic moment embeddings (fast path)
qsim      exact statevector simulation of the circuit and pipeline
classify  fidelity kernels, expectation values, shot sampling
bench     splits, metrics, paired comparisons, synthetic data
cli       command-line entry points
"""

from . import bench, classify, embed, graph, qsim

__version__ = "0.1.0"

__all__ = ["graph", "embed", "qsim", "classify", "bench", "__version__"]
