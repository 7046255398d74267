import json
import subprocess
import sys

import pytest

from hc2lab.cli import EXIT_AUDIT, EXIT_OK, EXIT_USAGE, dispatch
from hc2lab.graph_core import Graph, read_graph, write_graph


@pytest.fixture
def k5(tmp_path):
    path = tmp_path / "k5.txt"
    write_graph(Graph.complete(5), path)
    return path


def test_copies_prints_count(capsys):
    assert dispatch(["copies", "--n", "7"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "360"


def test_copies_export(tmp_path, capsys):
    out = tmp_path / "cat.csv"
    assert dispatch(["copies", "--n", "6", "--export", str(out)]) == EXIT_OK
    assert len(out.read_text().splitlines()) == 61


def test_solve_k5(k5, capsys):
    assert dispatch(["solve", "--input", str(k5), "--k", "2"]) == EXIT_OK
    res = json.loads(capsys.readouterr().out)
    assert res["status"] == "found"
    assert set(res) == {"status", "witness", "nodes", "seconds"}


def test_solve_missing_input(tmp_path, capsys):
    assert dispatch(["solve", "--input", str(tmp_path / "nope.txt")]) == EXIT_USAGE


def test_audit_prop_easy(tmp_path):
    out = tmp_path / "a.csv"
    code = dispatch(["audit", "--statement", "prop_easy", "--n", "9", "--exhaustive", "--max-l", "3", "--out", str(out)])
    assert code == EXIT_OK
    rows = [r for r in out.read_text().splitlines() if not r.startswith("#")]
    assert rows[0].startswith("statement,")
    assert len(rows) == 1 + 1 + 18 + 153 + 816
    assert all(r.endswith("True") for r in rows[1:])


def test_audit_spread_small_n_is_reported_not_failed(capsys):
    assert dispatch(["audit", "--statement", "spread", "--n", "7"]) == EXIT_OK


def test_audit_violation_exit_code(monkeypatch):
    from hc2lab import spread_audit

    real = spread_audit.audit_ivc

    def broken(*a, **kw):
        reps = real(*a, **kw)
        return reps[:1] + [spread_audit.AuditReport("ivc", {"n": 9}, 5, 1, False)]

    monkeypatch.setattr(spread_audit, "audit_ivc", broken)
    assert dispatch(["audit", "--statement", "ivc", "--n", "9"]) == EXIT_AUDIT


def test_gen_requires_seed(tmp_path, capsys):
    assert dispatch(["gen", "--n", "8", "--p", "0.5"]) == EXIT_USAGE
    assert "--seed" in capsys.readouterr().err


def test_gen_reproducible(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for path in (a, b):
        assert dispatch(["gen", "--n", "12", "--p", "0.4", "--seed", "3", "--out", str(path)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    assert read_graph(a).n == 12


def test_gen_gnm(tmp_path):
    path = tmp_path / "g.txt"
    assert dispatch(["gen", "--n", "10", "--m", "17", "--seed", "1", "--out", str(path)]) == EXIT_OK
    assert read_graph(path).num_edges() == 17


def test_threshold_byte_identical(tmp_path):
    grid, fit = tmp_path / "g.csv", tmp_path / "f.json"
    argv = ["threshold", "--n-list", "9,10", "--c-list", "1,2,3", "--trials", "8", "--seed", "5",
            "--coupled", "--no-timestamp", "--out", str(grid), "--fit-out", str(fit)]
    outs = []
    for _ in range(2):
        assert dispatch(argv) == EXIT_OK
        outs.append((grid.read_bytes(), fit.read_bytes()))
    assert outs[0] == outs[1]
    header = outs[0][0].decode().splitlines()
    assert header[1].startswith("# config:")
    assert "n,C,p,trials,successes,failures,unknowns,estimate,ci_lo,ci_hi" in header
    fits = json.loads(outs[0][1])
    assert [f["n"] for f in fits] == [9, 10]
    assert set(fits[0]) == {"n", "C_half", "slope", "flag"}


def test_timestamp_line_present_by_default(tmp_path):
    out = tmp_path / "g.csv"
    dispatch(["threshold", "--n-list", "9", "--c-list", "3", "--trials", "2", "--seed", "1", "--out", str(out)])
    assert any(line.startswith("# generated:") for line in out.read_text().splitlines())


def test_threshold_requires_seed():
    assert dispatch(["threshold", "--n-list", "9", "--c-list", "1,2", "--trials", "2"]) == EXIT_USAGE


def test_config_merged_under_flags(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n_list": [9], "c_list": [1.0, 3.0], "trials": 50, "master_seed": 2}))
    out = tmp_path / "g.csv"
    assert dispatch(["threshold", "--config", str(cfg), "--trials", "3", "--no-timestamp", "--out", str(out)]) == 0
    text = out.read_text()
    assert '"trials": 3' in text and '"seed": 2' in text
    assert text.splitlines()[-1].split(",")[3] == "3"


def test_bad_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text("[1, 2]")
    assert dispatch(["copies", "--n", "5", "--config", str(cfg)]) == EXIT_USAGE


def test_fragments_two_round(tmp_path):
    out = tmp_path / "t.csv"
    code = dispatch(["fragments", "two-round", "--n", "8", "--c0-surrogate", "1.6", "--C", "2", "--k", "12",
                     "--trials", "4", "--seed", "11", "--out", str(out)])
    assert code == EXIT_OK
    rows = [r for r in out.read_text().splitlines() if not r.startswith("#")]
    assert rows[0].startswith("trial,") and len(rows) == 5


def test_fragments_census_and_second_moment(tmp_path):
    out = tmp_path / "c.json"
    assert dispatch(["fragments", "census", "--n", "8", "--c0-surrogate", "1", "--C", "1", "--k", "6", "--trials", "5",
                     "--seed", "1", "--out", str(out)]) == EXIT_OK
    res = json.loads(out.read_text())
    assert res["census"]["trials"] == 5
    out2 = tmp_path / "m.json"
    assert dispatch(["fragments", "second-moment", "--n", "8", "--c0-surrogate", "1.2", "--k", "12",
                     "--seed", "3", "--simulations", "500", "--out", str(out2)]) == EXIT_OK
    rep = json.loads(out2.read_text())["report"]
    assert rep["variance_within_bound"]


def test_unknown_subcommand():
    assert dispatch(["bogus"]) == EXIT_USAGE


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "hc2lab", "copies", "--n", "5"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip() == "12"
