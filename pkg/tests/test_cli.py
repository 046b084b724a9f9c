import json

import numpy as np
import pytest

from qmme import cli, graph
from qmme.cli import RunConfig, main


@pytest.fixture
def raw_inputs(tmp_path):
    (tmp_path / "edges.tsv").write_text(
        "source\ttarget\n"
        "a\tb\na\tc\nb\tc\nc\td\nd\te\ne\ta\nb\te\nd\tf\nf\tg\ng\ta\n"
    )
    (tmp_path / "features.tsv").write_text(
        "gene\tvalue\na\t0.9\nb\t0.4\nc\t0.7\nd\t0.2\ne\t0.8\nf\t0.1\ng\t0.5\n"
    )
    (tmp_path / "labels.txt").write_text("a\nd\n")
    return tmp_path


@pytest.fixture
def canonical(raw_inputs):
    out = raw_inputs / "graph.tsv"
    code = main([
        "ingest",
        "--edges", str(raw_inputs / "edges.tsv"),
        "--features", str(raw_inputs / "features.tsv"),
        "--labels", str(raw_inputs / "labels.txt"),
        "--out", str(out),
    ])
    assert code == 0
    return out


def test_run_config_round_trip():
    cfg = RunConfig("embed", {"graph": "g.tsv", "method": "qmme", "out": None})
    back = RunConfig.from_json(cfg.to_json())
    assert back == cfg


def test_ingest_summary_line(raw_inputs, capsys):
    out = raw_inputs / "g.tsv"
    code = main([
        "ingest",
        "--edges", str(raw_inputs / "edges.tsv"),
        "--features", str(raw_inputs / "features.tsv"),
        "--labels", str(raw_inputs / "labels.txt"),
        "--out", str(out),
    ])
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "nodes=7 edges=10 positives=2 s=4"
    assert lines[1].startswith("# config: ")
    cfg = RunConfig.from_json(lines[1].removeprefix("# config: "))
    assert cfg.command == "ingest"
    g = graph.load_canonical(out)
    assert g.node_ids == ("a", "b", "c", "d", "e", "f", "g")


def test_ingest_warns_on_empty_labels(raw_inputs, capsys):
    (raw_inputs / "empty.txt").write_text("")
    code = main([
        "ingest",
        "--edges", str(raw_inputs / "edges.tsv"),
        "--features", str(raw_inputs / "features.tsv"),
        "--labels", str(raw_inputs / "empty.txt"),
        "--out", str(raw_inputs / "g.tsv"),
    ])
    assert code == 0
    assert "no entries" in capsys.readouterr().err


def test_embed_writes_tsv_with_config_echo(canonical, tmp_path):
    out = tmp_path / "emb.tsv"
    assert main(["embed", "--graph", str(canonical), "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    cfg = RunConfig.from_json(lines[0].removeprefix("# config: "))
    assert cfg.params["method"] == "qmme"
    assert lines[1].split("\t") == ["node"] + [f"a{i}" for i in range(1, 9)]
    assert len(lines) == 2 + 7
    row = lines[2].split("\t")
    assert row[0] == "a"
    assert len(row) == 9
    float(row[1])


def test_embed_stdout_and_mopro(canonical, capsys):
    assert main(["embed", "--graph", str(canonical), "--method", "mopro"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[1].split("\t") == ["node"] + [f"z{i}" for i in range(1, 6)]


def test_classify_outputs_predictions(canonical, tmp_path, capsys):
    labeled = tmp_path / "labeled.tsv"
    labeled.write_text("a\t1\nd\t1\nb\t0\nf\t0\n")
    out = tmp_path / "preds.tsv"
    assert main([
        "classify", "--graph", str(canonical), "--labeled", str(labeled),
        "--out", str(out),
    ]) == 0
    lines = out.read_text().splitlines()
    assert lines[1] == "gene\texpectation\tscore\tlabel"
    genes = [l.split("\t")[0] for l in lines[2:]]
    assert genes == ["c", "e", "g"]
    for l in lines[2:]:
        _, e, s, y = l.split("\t")
        assert float(s) == -float(e)
        assert y in ("0", "1")


def test_classify_rejects_full_state_for_mopro(canonical, tmp_path, capsys):
    labeled = tmp_path / "labeled.tsv"
    labeled.write_text("a\t1\nb\t0\n")
    code = main([
        "classify", "--graph", str(canonical), "--labeled", str(labeled),
        "--method", "mopro", "--kernel-mode", "full-state",
    ])
    assert code == 1
    assert capsys.readouterr().err.startswith("error: ")


def test_classify_full_state_mode_runs(canonical, capsys, tmp_path):
    labeled = tmp_path / "labeled.tsv"
    labeled.write_text("a\t1\nb\t0\n")
    assert main([
        "classify", "--graph", str(canonical), "--labeled", str(labeled),
        "--kernel-mode", "full-state",
    ]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 2 + 5


def test_experiment_writes_report_csv_and_figures(tmp_path, capsys):
    g_path = tmp_path / "synth.tsv"
    assert main([
        "synth", "--nodes", "80", "--mean-degree", "5", "--seed", "2",
        "--positive-fraction", "0.1", "--out", str(g_path),
    ]) == 0
    out_dir = tmp_path / "report"
    assert main([
        "experiment", "--graph", str(g_path), "--splits", "4", "--seed", "3",
        "--out", str(out_dir),
    ]) == 0
    report = json.loads((out_dir / "report.json").read_text())
    assert report["config"]["command"] == "experiment"
    assert report["config"]["splits"] == 4
    assert set(report["aggregate"]) == {"qmme", "mopro"}
    assert len(report["per_split"]) == 8
    assert (out_dir / "per_split.csv").exists()
    assert (out_dir / "metrics_boxplot.png").stat().st_size > 1000
    assert (out_dir / "pr_curve_split0.png").stat().st_size > 1000
    stdout = capsys.readouterr().out
    assert "qmme:" in stdout and "mopro:" in stdout


def test_experiment_no_figures_flag(tmp_path):
    g_path = tmp_path / "synth.tsv"
    main(["synth", "--nodes", "80", "--seed", "2", "--positive-fraction", "0.1",
          "--out", str(g_path)])
    out_dir = tmp_path / "report"
    assert main([
        "experiment", "--graph", str(g_path), "--splits", "2", "--seed", "0",
        "--out", str(out_dir), "--no-figures", "--no-csv",
    ]) == 0
    assert (out_dir / "report.json").exists()
    assert not (out_dir / "metrics_boxplot.png").exists()
    assert not (out_dir / "per_split.csv").exists()


def test_simulate_verify_passes_on_small_graph(canonical, capsys):
    assert main(["simulate-verify", "--graph", str(canonical)]) == 0
    out = capsys.readouterr().out.splitlines()
    cfg = RunConfig.from_json(out[0].split("# config: ", 1)[1])
    assert cfg.command == "simulate-verify"
    assert out[-1].startswith("simulate-verify: 56/56 checks passed")
    assert all("ok" in l for l in out[1:-1])


def test_simulate_verify_fails_on_wrong_reference(canonical, tmp_path, capsys):
    emb = tmp_path / "emb.tsv"
    assert main(["embed", "--graph", str(canonical), "--out", str(emb)]) == 0
    lines = emb.read_text().splitlines()
    parts = lines[2].split("\t")
    parts[1] = str(float(parts[1]) + 0.5)
    lines[2] = "\t".join(parts)
    emb.write_text("\n".join(lines) + "\n")
    code = main([
        "simulate-verify", "--graph", str(canonical), "--embeddings", str(emb),
    ])
    assert code == 1
    assert "MISMATCH" in capsys.readouterr().out


def test_simulate_verify_rejects_oversized_graph(canonical, capsys):
    code = main(["simulate-verify", "--graph", str(canonical), "--max-qubits", "4"])
    assert code == 1
    err = capsys.readouterr().err.strip()
    assert err.startswith("error: ")
    assert len(err.splitlines()) == 1


def test_simulate_verify_dprime(canonical, capsys):
    # 53-bit quantization is the identity, so the circuit still matches exactly
    assert main(["simulate-verify", "--graph", str(canonical), "--dprime", "53"]) == 0
    capsys.readouterr()
    # 2-bit quantization moves the features the circuit sees off the reference
    code = main(["simulate-verify", "--graph", str(canonical), "--dprime", "2"])
    assert code == 1
    assert "MISMATCH" in capsys.readouterr().out


def test_classify_full_state_accepts_dprime(canonical, tmp_path, capsys):
    labeled = tmp_path / "labeled.tsv"
    labeled.write_text("a\t1\nb\t0\n")
    assert main([
        "classify", "--graph", str(canonical), "--labeled", str(labeled),
        "--kernel-mode", "full-state", "--dprime", "8",
    ]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 2 + 5


def test_experiment_rejects_full_state_kernel(tmp_path, capsys):
    g_path = tmp_path / "synth.tsv"
    main(["synth", "--nodes", "80", "--seed", "2", "--positive-fraction", "0.1",
          "--out", str(g_path)])
    code = main([
        "experiment", "--graph", str(g_path), "--splits", "2", "--kernel-mode",
        "full-state", "--out", str(tmp_path / "report"),
    ])
    assert code == 1
    err = capsys.readouterr().err.strip()
    assert err.startswith("error: ")
    assert "full-state" in err
    assert len(err.splitlines()) == 1


def test_resources_json(tmp_path, capsys):
    assert main(["resources", "--nodes", "1024", "--epsilon", "0.1"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["m_qubits"] == 28
    assert data["shots_for_epsilon"] == 100
    assert data["config"]["command"] == "resources"
    out = tmp_path / "r.json"
    assert main(["resources", "--nodes", "2", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["total_qubits"] == 24


def test_errors_are_single_line_exit_1(tmp_path, capsys):
    assert main(["embed", "--graph", str(tmp_path / "missing.tsv")]) == 1
    err = capsys.readouterr().err
    assert err.startswith("error: ")
    assert err.count("\n") == 1


def test_argparse_usage_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["embed"])  # --graph is required
    assert exc.value.code == 2


def test_labeled_tsv_validation(canonical, tmp_path, capsys):
    bad = tmp_path / "l.tsv"
    bad.write_text("a\t2\n")
    assert main(["classify", "--graph", str(canonical), "--labeled", str(bad)]) == 1
    assert "label must be 0 or 1" in capsys.readouterr().err
    bad.write_text("gene\tlabel\n")
    assert main(["classify", "--graph", str(canonical), "--labeled", str(bad)]) == 1
    assert "labeled set is empty" in capsys.readouterr().err
