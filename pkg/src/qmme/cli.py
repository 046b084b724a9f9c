"""Command-line interface.

Subcommands: ingest, embed, classify, experiment, simulate-verify, resources,
plus synth for generating planted-signal benchmark graphs.  Every report
embeds a JSON echo of the parsed configuration; errors exit nonzero with a
single ``error: ...`` line on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import bench, classify, embed, graph, qsim, report

_ERRORS = (graph.GraphError, bench.BenchError, qsim.SimulationError, ValueError, OSError)


@dataclass(frozen=True)
class RunConfig:
    """Parsed invocation; round-trips through its JSON echo."""

    command: str
    params: dict

    def to_json(self) -> str:
        return json.dumps({"command": self.command, **self.params}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        data = json.loads(text)
        command = data.pop("command")
        return cls(command, data)


def _config(args: argparse.Namespace, names: list) -> RunConfig:
    return RunConfig(args.command, {n: getattr(args, n.replace("-", "_")) for n in names})


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")


# ---------------------------------------------------------------------------
# commands


def _cmd_ingest(args) -> int:
    cfg = _config(args, ["edges", "features", "labels", "out"])
    edges = graph.read_edge_tsv(args.edges)
    features = graph.read_feature_tsv(args.features)
    positives = set()
    if args.labels is not None:
        positives = graph.read_label_lines(args.labels)
        if not positives:
            print("warning: label file has no entries", file=sys.stderr)
    g = graph.build_graph(edges, features, positives)
    graph.save_canonical(g, args.out)
    n_pos = len(g.positives)
    print(
        f"nodes={g.node_count} edges={g.edge_count} positives={n_pos} "
        f"s={g.max_degree_bound}"
    )
    print(f"# config: {cfg.to_json()}")
    return 0


def _cmd_embed(args) -> int:
    cfg = _config(args, ["graph", "method", "out"])
    g = graph.load_canonical(args.graph)
    matrix = embed.embed_all(g, args.method)
    if args.out is None:
        prefix = "a" if matrix.shape[1] == embed.QMME_DIM else "z"
        lines = [f"# config: {cfg.to_json()}",
                 "node\t" + "\t".join(f"{prefix}{j + 1}" for j in range(matrix.shape[1]))]
        for i in range(g.node_count):
            lines.append(f"{g.node_ids[i]}\t" + "\t".join(f"{x:.17g}" for x in matrix[i]))
        _emit("\n".join(lines), None)
    else:
        embed.write_embeddings_tsv(args.out, g, matrix, args.method, cfg.to_json())
    return 0


def _read_labeled_tsv(path, g: graph.AttributedGraph) -> classify.LabeledSet:
    nodes = []
    labels = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2:
                raise graph.GraphError(
                    f"{path}:{lineno}: expected 2 tab-separated fields, got {len(parts)}"
                )
            if lineno == 1 and parts[1].strip().lower() in ("label", "y"):
                continue
            if parts[1] not in ("0", "1"):
                raise graph.GraphError(f"{path}:{lineno}: label must be 0 or 1")
            nid = graph._normalize_id(parts[0])
            nodes.append(g.index_of(nid))
            labels.append(int(parts[1]))
    if not nodes:
        raise graph.GraphError(f"{path}: labeled set is empty")
    return classify.LabeledSet(tuple(nodes), tuple(labels))


def _cmd_classify(args) -> int:
    cfg = _config(args, ["graph", "labeled", "method", "kernel_mode", "shots", "seed",
                         "dprime", "out"])
    g = graph.load_canonical(args.graph)
    labeled = _read_labeled_tsv(args.labeled, g)
    if args.kernel_mode == "full-state":
        if args.method != "qmme":
            raise ValueError("full-state kernels apply to the circuit embedding only")
        embeddings = qsim.embedding_state_matrix(g, dprime=args.dprime)
        mode = "full-state"
    else:
        embeddings = embed.embed_all(g, args.method)
        # amplitude-encoded baseline vectors are not sub-normalized, so the
        # inner product is only a valid kernel after normalization
        mode = "moment-normalized" if args.method == "mopro" else args.kernel_mode
    test_nodes = [v for v in range(g.node_count) if v not in set(labeled.nodes)]
    if not test_nodes:
        raise ValueError("no test nodes: every node is in the labeled set")
    outcomes = classify.classify_all(
        test_nodes, labeled, embeddings, mode=mode, shots=args.shots, seed=args.seed
    )
    if args.out is None:
        lines = [f"# config: {cfg.to_json()}", "gene\texpectation\tscore\tlabel"]
        for o in outcomes:
            lines.append(
                f"{g.node_ids[o.node]}\t{o.expectation:.17g}\t{o.score:.17g}\t{o.label}"
            )
        _emit("\n".join(lines), None)
    else:
        classify.write_predictions_tsv(args.out, outcomes, g.node_ids, cfg.to_json())
    return 0


def _cmd_experiment(args) -> int:
    names = ["graph", "splits", "seed", "methods", "kernel_mode", "train_fraction",
             "threads", "out", "figures", "csv"]
    cfg = _config(args, names)
    g = graph.load_canonical(args.graph)
    dataset = bench.Dataset.from_graph(g)
    methods = tuple(args.methods.split(","))
    config = bench.ExperimentConfig(
        n_splits=args.splits,
        seed=args.seed,
        methods=methods,
        kernel_mode=args.kernel_mode,
        train_fraction=args.train_fraction,
        threads=args.threads,
    )
    result = bench.run_experiment(dataset, config)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = result.to_json_dict()
    payload["config"] = json.loads(cfg.to_json())
    (out_dir / "report.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    if args.csv:
        bench.write_per_split_csv(result, out_dir / "per_split.csv")
    if args.figures:
        plans = [bench.make_split(dataset, s, i, config.train_fraction)
                 for i, s in enumerate(bench.split_seeds(config.seed, 1))]
        curves = {}
        for m in methods:
            mode = bench._resolve_kernel_mode(m, config.kernel_mode)
            scores, _, truth = bench.split_scores(
                plans[0], embed.embed_all(g, m), mode
            )
            curves[m] = (scores, truth)
        report.render_report_figures(result, curves, out_dir)
    for method in methods:
        agg = result.aggregate[method]
        summary = " ".join(
            f"{name}={agg[name]['mean']:.4f}" for name in bench.METRIC_NAMES
        )
        print(f"{method}: {summary}")
    for warning in result.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print(f"report written to {out_dir}")
    return 0


def _cmd_synth(args) -> int:
    cfg = _config(args, ["nodes", "mean_degree", "effect_size", "positive_fraction",
                         "feature_scale", "seed", "out"])
    dataset = bench.synth_generate(
        bench.SynthConfig(
            n_nodes=args.nodes,
            mean_degree=args.mean_degree,
            effect_size=args.effect_size,
            positive_fraction=args.positive_fraction,
            feature_scale=args.feature_scale,
            seed=args.seed,
        )
    )
    graph.save_canonical(dataset.graph, args.out)
    g = dataset.graph
    print(
        f"nodes={g.node_count} edges={g.edge_count} positives={len(dataset.positives)} "
        f"s={g.max_degree_bound}"
    )
    print(f"# config: {cfg.to_json()}")
    return 0


def _cmd_simulate_verify(args) -> int:
    cfg = _config(args, ["graph", "tolerance", "dprime", "embeddings", "max_qubits"])
    print(f"# config: {cfg.to_json()}")
    g = graph.load_canonical(args.graph)
    if args.embeddings is not None:
        reference = embed.read_embeddings_tsv(args.embeddings)
        def algebraic_row(v):
            nid = g.node_ids[v]
            if nid not in reference:
                raise ValueError(f"embedding file has no row for node {nid!r}")
            return reference[nid]
    else:
        def algebraic_row(v):
            return embed.scaled_embedding(g, v)
    failures = 0
    checks = 0
    for v in range(g.node_count):
        state = qsim.run_embedding_circuit(g, v, args.dprime, max_qubits=args.max_qubits)
        circuit_amps = qsim.extract_moment_amplitudes(state)
        expected = algebraic_row(v)
        for c in (0, 1):
            for b in range(4):
                got = circuit_amps[4 * c + b]
                want = expected[4 * c + b]
                diff = abs(got - want)
                ok = diff <= args.tolerance
                checks += 1
                failures += 0 if ok else 1
                print(
                    f"v={v} hop={c + 1} moment={b + 1} circuit={got:+.12e} "
                    f"algebraic={want:+.12e} |diff|={diff:.3e} "
                    f"{'ok' if ok else 'MISMATCH'}"
                )
    print(f"simulate-verify: {checks - failures}/{checks} checks passed "
          f"(tolerance {args.tolerance:g})")
    return 0 if failures == 0 else 1


def _cmd_resources(args) -> int:
    cfg = _config(args, ["nodes", "max_degree", "dprime", "labeled", "epsilon", "out"])
    estimate = qsim.resource_estimate(
        args.nodes,
        max_degree_bound=args.max_degree,
        dprime=args.dprime,
        n_labeled=args.labeled,
        epsilon=args.epsilon,
    )
    estimate["config"] = json.loads(cfg.to_json())
    _emit(json.dumps(estimate, indent=2, sort_keys=True), args.out)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmme",
        description="moment embeddings and swap-test classification for attributed networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="build the canonical graph file from raw TSVs")
    p.add_argument("--edges", required=True, help="source<TAB>target edge TSV")
    p.add_argument("--features", required=True, help="gene<TAB>value feature TSV")
    p.add_argument("--labels", default=None, help="one positive gene id per line")
    p.add_argument("--out", required=True, help="canonical graph file to write")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("embed", help="write the embedding matrix as TSV")
    p.add_argument("--graph", required=True, help="canonical graph file")
    p.add_argument("--method", choices=embed.METHODS, default="qmme")
    p.add_argument("--out", default=None, help="output TSV (default stdout)")
    p.set_defaults(func=_cmd_embed)

    p = sub.add_parser("classify", help="classify unlabeled nodes against a labeled set")
    p.add_argument("--graph", required=True, help="canonical graph file")
    p.add_argument("--labeled", required=True, help="gene<TAB>label TSV, labels 0/1")
    p.add_argument("--method", choices=embed.METHODS, default="qmme")
    p.add_argument("--kernel-mode", choices=classify.KERNEL_MODES,
                   default="moment-scaled")
    p.add_argument("--dprime", type=int, default=None,
                   help="feature quantization bits for full-state kernels")
    p.add_argument("--shots", type=int, default=None,
                   help="estimate expectations from this many sampled shots")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output TSV (default stdout)")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("experiment", help="run the split/metric benchmark")
    p.add_argument("--graph", required=True, help="canonical graph file with labels")
    p.add_argument("--splits", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--methods", default="qmme,mopro", help="comma-separated methods")
    p.add_argument("--kernel-mode", choices=classify.KERNEL_MODES,
                   default="moment-scaled")
    p.add_argument("--train-fraction", type=float, default=bench.DEFAULT_TRAIN_FRACTION)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True, help="report directory")
    p.add_argument("--no-figures", dest="figures", action="store_false",
                   help="skip PNG figure rendering")
    p.add_argument("--no-csv", dest="csv", action="store_false",
                   help="skip the per-split CSV")
    p.set_defaults(func=_cmd_experiment, figures=True, csv=True)

    p = sub.add_parser("synth", help="generate a planted-signal benchmark graph")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--mean-degree", type=float, default=8.0)
    p.add_argument("--effect-size", type=float, default=2.0)
    p.add_argument("--positive-fraction", type=float, default=0.05)
    p.add_argument("--feature-scale", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="canonical graph file to write")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("simulate-verify",
                       help="check circuit amplitudes against the algebraic embeddings")
    p.add_argument("--graph", required=True, help="canonical graph file (small)")
    p.add_argument("--tolerance", type=float, default=1e-9)
    p.add_argument("--dprime", type=int, default=None,
                   help="quantize circuit features; compare with a looser --tolerance")
    p.add_argument("--embeddings", default=None,
                   help="verify against this embedding TSV instead of recomputing")
    p.add_argument("--max-qubits", type=int, default=qsim.DEFAULT_MAX_QUBITS)
    p.set_defaults(func=_cmd_simulate_verify)

    p = sub.add_parser("resources", help="register widths, oracle counts, shot budget")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--max-degree", type=int, default=None)
    p.add_argument("--dprime", type=int, default=None)
    p.add_argument("--labeled", type=int, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--out", default=None, help="output JSON (default stdout)")
    p.set_defaults(func=_cmd_resources)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
