import json

import numpy as np
import pytest

from polopt import generators as gen
from polopt.cli import main
from polopt.graph import WeightedGraph
from polopt.io import InputError, read_graph, read_opinions, write_graph, write_opinions


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_read_path_graph(tmp_path):
    data = read_graph(write(tmp_path / "g.txt", "a b\nb c\n"))
    assert data.graph == WeightedGraph(3, ((0, 1, 1.0), (1, 2, 1.0)))
    assert data.labels == ("a", "b", "c")


def test_duplicate_pairs_are_summed(tmp_path):
    data = read_graph(write(tmp_path / "g.txt", "0 1 2.5\n1 0 0.5\n"))
    assert data.graph.edges == ((0, 1, 3.0),)
    assert data.duplicates == 1


def test_comments_and_self_loops(tmp_path):
    data = read_graph(write(tmp_path / "g.txt", "# header\nx y 2  # trailing\n\ny y\n"))
    assert data.graph.edges == ((0, 1, 2.0),)
    assert data.self_loops == 1


@pytest.mark.parametrize("text, where", [("a b c d\n", ":1:"), ("a b\nb c zz\n", ":2:"), ("a b -1\n", ":1:")])
def test_malformed_lines_report_line_number(tmp_path, text, where):
    with pytest.raises(InputError, match=where):
        read_graph(write(tmp_path / "g.txt", text))


def test_empty_graph_file(tmp_path):
    with pytest.raises(InputError):
        read_graph(write(tmp_path / "g.txt", "# nothing\n"))


def test_read_opinions(tmp_path):
    np.testing.assert_array_equal(read_opinions(write(tmp_path / "s.txt", "0.0\n0.0\n1.0\n")), [0, 0, 1])
    with pytest.raises(InputError, match="outside"):
        read_opinions(write(tmp_path / "bad.txt", "1.5\n"))
    with pytest.raises(InputError):
        read_opinions(write(tmp_path / "short.txt", "0.5\n"), labels=("a", "b"))


def test_labeled_opinions_follow_graph_labels(tmp_path):
    data = read_graph(write(tmp_path / "g.txt", "alice bob\nbob carol\n"))
    s = read_opinions(write(tmp_path / "s.txt", "carol 0.9\nalice 0.3\nbob 0.5\n"), data.labels)
    np.testing.assert_array_equal(s, [0.3, 0.5, 0.9])
    with pytest.raises(InputError, match="carol"):
        read_opinions(write(tmp_path / "s2.txt", "alice 0.3\nbob 0.5\n"), data.labels)


def test_graph_round_trip(tmp_path):
    g = gen.norros_reittu(40, 2.0, seed=3)
    g = WeightedGraph(g.n, tuple((u, v, w / 7.0) for u, v, w in g.edges))
    write_graph(tmp_path / "g.txt", g)
    assert read_graph(tmp_path / "g.txt").graph == g
    s = gen.uniform_opinions(40, seed=1)
    write_opinions(tmp_path / "s.txt", s)
    np.testing.assert_array_equal(read_opinions(tmp_path / "s.txt"), s)


@pytest.fixture
def table1_files(tmp_path):
    s = write(tmp_path / "s.txt", "0.0\n0.0\n1.0\n")
    files = {}
    for name, edge in [("12", "1 2"), ("13", "1 3"), ("23", "2 3")]:
        files[name] = write(tmp_path / f"g{name}.txt", f"1\n2\n3\n{edge}\n")
    return files, s


def test_cmd_index_table1(capsys, table1_files):
    files, s = table1_files
    expected = {"12": 0.667, "13": 0.333, "23": 0.333}
    for name, path in files.items():
        code, out, _ = run(capsys, "index", "--graph", path, "--opinions", s)
        assert code == 0
        assert json.loads(out)["outputs"]["index"] == pytest.approx(expected[name], abs=1e-3)


def test_cmd_index_writes_node_csv(capsys, table1_files, tmp_path):
    files, s = table1_files
    code, _, _ = run(capsys, "index", "--graph", files["13"], "--opinions", s, "--csv-dir", tmp_path / "csv")
    assert code == 0
    rows = (tmp_path / "csv" / "nodes.csv").read_text().splitlines()
    assert rows[0] == "label,s,z_star,z_bar,stress"
    assert len(rows) == 4


def test_optimize_opinions_zero_budget_matches_index(capsys, tmp_path):
    g = gen.norros_reittu(30, 2.0, seed=2)
    write_graph(tmp_path / "g.txt", g)
    write_opinions(tmp_path / "s.txt", gen.uniform_opinions(30, seed=2))
    _, out, _ = run(capsys, "index", "--graph", tmp_path / "g.txt", "--opinions", tmp_path / "s.txt")
    base = json.loads(out)["outputs"]["index"]
    code, out, _ = run(capsys, "optimize-opinions", "--graph", tmp_path / "g.txt",
                       "--opinions", tmp_path / "s.txt", "--alpha", 0, "--csv-dir", tmp_path / "csv")
    assert code == 0
    (row,) = json.loads(out)["outputs"]["sweep"]
    assert row["objective"] == base
    assert row["budget_used"] == 0.0 and row["nodes_changed"] == 0
    ds = np.loadtxt(tmp_path / "csv" / "opinions_alpha_0.csv", delimiter=",", skiprows=1, usecols=2)
    assert np.all(ds == 0)


def test_optimize_topology_generated_with_sparsify(capsys):
    code, out, _ = run(capsys, "optimize-topology", "--n", 100, "--sparsify", "--seed", 3)
    assert code == 0
    rows = json.loads(out)["outputs"]
    dense, sparse = rows["optimal"]["index"], rows["sparsified"]["index"]
    assert rows["optimal"]["converged"]
    assert dense < rows["original"]["index"]
    assert abs(sparse - dense) <= 1e-2 * dense
    assert rows["sparsified"]["edges"] < rows["optimal"]["edges"]


def test_sparsify_command(capsys, tmp_path):
    g = gen.erdos_renyi(40, 0.6, seed=1)
    write_graph(tmp_path / "g.txt", g)
    code, out, _ = run(capsys, "sparsify", "--graph", tmp_path / "g.txt", "--samples", 300,
                       "--graph-out", tmp_path / "sp.txt")
    assert code == 0
    rep = json.loads(out)["outputs"]["sparsified"]
    assert rep["total_weight"] == pytest.approx(g.total_weight())
    assert read_graph(tmp_path / "sp.txt").graph.m == rep["edges"] <= 300


def test_generate_command(capsys, tmp_path):
    code, out, _ = run(capsys, "generate", "--model", "nr", "--n", 50, "--seed", 4,
                       "--opinion-model", "degree", "--graph-out", tmp_path / "g.txt",
                       "--opinions-out", tmp_path / "s.txt")
    assert code == 0
    data = read_graph(tmp_path / "g.txt")
    assert data.graph == gen.norros_reittu(50, 2.0, seed=4)
    assert read_opinions(tmp_path / "s.txt").sum() == pytest.approx(1.0)


def test_reproduce_command(capsys):
    code, out, err = run(capsys, "reproduce")
    assert code == 0
    doc = json.loads(out)
    assert doc["outputs"]["all_passed"]
    assert "FAIL" not in err
    rows = {c["check"]: c for c in doc["outputs"]["checks"]}
    row = rows["three-node example, edge (1,3)"]
    assert (row["polarization"], row["disagreement"]) == pytest.approx((0.222, 0.111), abs=1e-3)
    assert rows["disagreement-only objective is non-convex"]["min_eigenvalue"] < 0


def test_input_error_exit_code(capsys, tmp_path):
    code, _, err = run(capsys, "index", "--graph", tmp_path / "missing.txt", "--opinions", tmp_path / "x")
    assert code == 1
    write(tmp_path / "g.txt", "a b\n")
    write(tmp_path / "s.txt", "0.2\n3\n")
    code, _, err = run(capsys, "index", "--graph", tmp_path / "g.txt", "--opinions", tmp_path / "s.txt")
    assert code == 1 and "outside" in err


def test_strict_nonconvergence_exit_code(capsys):
    code, _, err = run(capsys, "optimize-topology", "--n", 30, "--max-iters", 2, "--strict")
    assert code == 2
    assert "did not converge" in err


def test_thread_cap_env(capsys, monkeypatch):
    monkeypatch.setenv("POLOPT_THREADS", "1")
    assert run(capsys, "reproduce")[0] == 0
    monkeypatch.setenv("POLOPT_THREADS", "zero")
    assert run(capsys, "reproduce")[0] == 1


def test_report_written_to_file(capsys, tmp_path):
    assert run(capsys, "reproduce", "--out", tmp_path / "r.json")[0] == 0
    doc = json.loads((tmp_path / "r.json").read_text())
    assert set(doc) == {"command", "inputs", "outputs", "timing", "seed", "tool_version"}
