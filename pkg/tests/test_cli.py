import json
import subprocess
import sys

import pytest

from sfcluster.cli import main, parse_count, parse_seeds
from sfcluster.graph import read_edge_list
from sfcluster.report import ClusterSizeStats, RunReport, load_schema


def test_parse_count():
    assert parse_count("1.4N", 1000) == 1400
    assert parse_count("2xN", 10) == 20
    assert parse_count("750", 1000) == 750
    for bad in ("N1.4", "-3", "abc"):
        with pytest.raises(ValueError):
            parse_count(bad, 10)


def test_parse_seeds():
    assert parse_seeds("0..3") == [0, 1, 2, 3]
    assert parse_seeds("5") == [5]
    with pytest.raises(ValueError):
        parse_seeds("4..1")


def test_report_stats_and_conservation():
    rep = RunReport("cluster", "centralized", 10, 2.5, 0, 9, 0.1, 0.9, threshold=3,
                    n_cores=2, n_isolated=2, cluster_sizes=[2, 4])
    st = rep.cluster_size_stats
    assert (st.mean, st.variance) == (3.0, 1.0) and st.std ** 2 == pytest.approx(st.variance)
    rep.check_conservation()
    rep.validate()
    bad = RunReport("cluster", "centralized", 11, 2.5, 0, 9, 0.1, 0.9, n_cores=2, n_isolated=2,
                    cluster_sizes=[2, 4])
    with pytest.raises(AssertionError):
        bad.check_conservation()
    assert ClusterSizeStats.of([]).mean == 0.0
    assert "wall_time" not in rep.to_dict()
    assert load_schema()["title"] == "RunReport"


def run(*args):
    return main([str(a) for a in args])


def test_build_cluster_stats(tmp_path, capsys):
    b = tmp_path / "b"
    assert run("build", "--n", 400, "--seed", 3, "--out", b, "--plot") == 0
    rep = json.loads((b / "report.json").read_text())
    assert rep["n_edges"] == 560 and rep["mode"] == "centralized"
    assert (b / "degree.png").stat().st_size > 0
    g = read_edge_list(b / "graph.csv")
    assert g.meta["seed"] == "3"

    c = tmp_path / "c"
    assert run("cluster", "--graph", b / "graph.csv", "--threshold", 8, "--out", c,
               "--format", "json", "--plot") == 0
    crep = json.loads((c / "report.json").read_text())
    sizes = json.loads((c / "cluster_sizes.json").read_text())
    assert crep["n_cores"] == len(sizes) == len(crep["cluster_sizes"])
    assert sum(crep["cluster_sizes"]) + crep["n_isolated"] + crep["n_cores"] == 400
    assert crep["cluster_size_stats"]["variance"] == pytest.approx(
        crep["cluster_size_stats"]["std"] ** 2)

    s = tmp_path / "s"
    assert run("stats", "--graph", b / "graph.csv", "--out", s) == 0
    lines = (s / "degree.csv").read_text().splitlines()
    assert lines[0] == "k,empirical,theoretical"
    m = json.loads((s / "metrics.json").read_text())
    assert m["trace_distance"] == pytest.approx(rep["trace_distance"])


def test_cross_mode_identical_assignments(tmp_path):
    b = tmp_path / "b"
    run("build", "--n", 500, "--seed", 1, "--out", b)
    for mode in ("centralized", "distributed"):
        assert run("cluster", "--graph", b / "graph.csv", "--threshold", 10, "--mode", mode,
                   "--out", tmp_path / mode, "--trace") == 0
    assert ((tmp_path / "centralized" / "clusters.json").read_bytes()
            == (tmp_path / "distributed" / "clusters.json").read_bytes())
    assert (tmp_path / "distributed" / "trace.jsonl").exists()
    state = json.loads((tmp_path / "distributed" / "state.json").read_text())
    assert {"cores", "isolated", "params"} <= state.keys()


def test_two_node_build(tmp_path):
    assert run("build", "--n", 2, "--out", tmp_path) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["n_edges"] == 1


def test_distributed_build(tmp_path):
    assert run("build", "--mode", "distributed", "--n", 500, "--seed", 2, "--out", tmp_path) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["build"]["rewired"] + rep["build"]["skipped"] == rep["n_edges"]


def test_errors_exit_nonzero(tmp_path, capsys):
    run("build", "--n", 200, "--out", tmp_path / "b")
    assert run("cluster", "--graph", tmp_path / "b" / "graph.csv", "--threshold", 999,
               "--out", tmp_path / "c") == 2
    assert "maximum degree" in capsys.readouterr().err
    assert run("build", "--n", 100, "--gamma", 0.5, "--out", tmp_path / "x") == 2
    assert run("stats", "--graph", tmp_path / "missing.csv", "--out", tmp_path / "y") == 2
    with pytest.raises(SystemExit):
        run("build", "--n", 100)   # --out is required


def test_sweep_and_experiment(tmp_path):
    assert run("sweep", "--n", 300, "--checkpoints", "0.5N,1N", "--out", tmp_path / "w",
               "--plot") == 0
    rows = (tmp_path / "w" / "distance_curve.csv").read_text().splitlines()
    assert rows[1].startswith("150,0.5,150,")
    assert run("experiment", "--n", 300, "--seeds", "0..2", "--threshold", "8,9",
               "--jobs", 2, "--out", tmp_path / "x", "--plot") == 0
    summary = json.loads((tmp_path / "x" / "summary.json").read_text())
    assert summary["seeds"] == [0, 1, 2]
    assert all(a >= b for a, b in zip(summary["n_cores"]["8"], summary["n_cores"]["9"]))


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "sfcluster", "stats", "--graph",
                          tmp_path / "none.csv", "--out", tmp_path], capture_output=True, text=True)
    assert out.returncode == 2 and "error" in out.stderr
