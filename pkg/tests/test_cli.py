import json
import subprocess
import sys

import pytest

from fmtkit.cli import main
from fmtkit.constructions import Report

from helpers import E_VOCAB, e_structure, linear_order


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return str(path)


@pytest.fixture
def cycle_file(tmp_path):
    return write(tmp_path, "cycle.json", e_structure(2, [(0, 1), (1, 0)]).to_dict())


@pytest.fixture
def chain_file(tmp_path):
    return write(tmp_path, "chain.json", linear_order(2).to_dict())


LINEAR = ("(forall x . !E(x,x)) & (forall x y z . E(x,y) & E(y,z) -> E(x,z))"
          " & (forall x y . x = y | E(x,y) | E(y,x))")


def test_eval_exit_codes(cycle_file, chain_file, capsys):
    assert main(["eval", "--structure", cycle_file, "--formula", "WF x y (E(x,y))"]) == 1
    assert main(["eval", "--structure", chain_file, "--formula", "WF x y (E(x,y))"]) == 0
    assert capsys.readouterr().out.split() == ["false", "true"]


def test_eval_with_assignment(chain_file, capsys):
    assert main(["eval", "--structure", chain_file, "--formula", "E(x,y)", "--assign", "x=0", "--assign", "y=1"]) == 0
    assert main(["eval", "--structure", chain_file, "--formula", "E(x,y)", "--assign", "x=1", "--assign", "y=0"]) == 1


def test_eval_formula_file(tmp_path, chain_file):
    f = write(tmp_path, "phi.txt", "exists x . E(x,x)")
    assert main(["eval", "--structure", chain_file, "--formula", "@" + f]) == 1


def test_eval_sort_error_reports_position(tmp_path, capsys):
    voc = {"sorts": ["s", "t"], "relations": {"R": ["s", "t"]}}
    doc = {"vocabulary": voc, "domains": {"s": [0], "t": [1]}, "relations": {"R": []}}
    path = write(tmp_path, "two.json", doc)
    assert main(["eval", "--structure", path, "--formula", "forall x:t . exists y:t . R(x,y)"]) == 2
    err = capsys.readouterr().err
    assert "SortError" in err and "position" in err


def test_eval_syntax_error(chain_file, capsys):
    assert main(["eval", "--structure", chain_file, "--formula", "forall x . (E(x,x)"]) == 2
    assert "position" in capsys.readouterr().err


def test_input_errors(tmp_path, chain_file):
    assert main(["eval", "--structure", str(tmp_path / "missing.json"), "--formula", "true"]) == 2
    assert main(["eval", "--structure", write(tmp_path, "bad.json", "{"), "--formula", "true"]) == 2
    assert main(["nonsense"]) == 2
    assert main(["verify", "HARTIG_HALF", "--max-size", "-1"]) == 2
    assert main(["verify", "HARTIG_HALF", "--workers", "0"]) == 2
    assert main(["verify", "HARTIG_HALF", "--cap", "0"]) == 2


def test_search(capsys):
    vocab = json.dumps(E_VOCAB.to_dict())
    assert main(["search", "--formula", LINEAR, "--vocab", vocab, "--max-size", "3", "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    # one linear order on 0 atoms, 1 on 1, 2 on 2, 6 on 3
    assert doc["count"] == 10
    assert main(["search", "--formula", LINEAR, "--vocab", vocab, "--max-size", "3", "--up-to-iso"]) == 0
    assert capsys.readouterr().out.startswith("4 model(s)")
    assert main(["search", "--formula", "exists x . x != x", "--vocab", vocab, "--max-size", "2"]) == 1


def test_project(tmp_path, capsys):
    from fmtkit.projection import alephbound_spec, two_sorted

    spec = write(tmp_path, "spec.json", alephbound_spec().to_dict())
    small = write(tmp_path, "a12.json", {"domains": {"A": [0], "B": [1, 2]}})
    big = write(tmp_path, "a13.json", two_sorted(1, 3).to_dict())
    assert main(["project", "--spec", spec, "--structure", small]) == 0
    assert main(["project", "--spec", spec, "--structure", big]) == 1


def test_collapse(tmp_path, chain_file, cycle_file, capsys):
    assert main(["collapse", "--structure", chain_file, "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["image"] == {"0": "{}", "1": "{{}}"}
    assert main(["collapse", "--structure", cycle_file]) == 1
    same = write(tmp_path, "same.json", e_structure(3, [(0, 2), (1, 2)]).to_dict())
    assert main(["collapse", "--structure", same]) == 1


def test_probe(chain_file, capsys):
    assert main(["probe-ulst", "--formula", LINEAR, "--structure", chain_file, "--target", "4"]) == 0
    assert main(["probe-ulst", "--formula", LINEAR, "--structure", chain_file, "--target", "1"]) == 2
    assert main(["probe-ulst", "--formula", "forall x y . x = y", "--structure", chain_file,
                 "--target", "3"]) == 2


def test_verify_human_output(capsys):
    assert main(["verify", "Q_EMPTY", "--max-size", "4", "--workers", "1"]) == 0
    out = capsys.readouterr().out
    assert "size 4: checked 65536" in out
    assert "Q_EMPTY: pass" in out


def test_verify_unknown_and_cap(capsys):
    assert main(["verify", "NOPE"]) == 2
    assert main(["verify", "Q_EMPTY", "--max-size", "4", "--cap", "10"]) == 3


def test_verify_json_round_trips_and_is_worker_independent(capsys):
    outputs = []
    for workers in ("1", "2"):
        assert main(["verify", "PHI_FIN", "--format", "json", "--workers", workers]) == 0
        outputs.append(capsys.readouterr().out)
    assert outputs[0] == outputs[1]
    report = Report.from_json(outputs[0])
    assert report.to_json() + "\n" == outputs[0]


def test_catalog(capsys):
    assert main(["catalog", "--format", "json"]) == 0
    rows = json.loads(capsys.readouterr().out)["constructions"]
    assert len(rows) >= 10 and any(r["name"] == "Q_EMPTY" for r in rows)


def test_analyze(capsys):
    vocab = json.dumps({"relations": {"P": 1}})
    assert main(["analyze", "--formula", "I x y (P(x)) (!P(y))", "--vocab", vocab]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["rank"] == 1 and doc["symbols"] == ["P"]


def test_console_script_exit_codes(tmp_path):
    env_cap = {"FMTKIT_CAP": "10"}
    import os

    env = dict(os.environ, **env_cap)
    out = subprocess.run([sys.executable, "-m", "fmtkit.cli", "verify", "Q_EMPTY", "--max-size", "4"],
                         capture_output=True, text=True, env=env)
    assert out.returncode == 3
    assert "resource cap" in out.stderr
    ok = subprocess.run([sys.executable, "-m", "fmtkit.cli", "verify", "HARTIG_HALF"], capture_output=True, text=True)
    assert ok.returncode == 0 and "pass" in ok.stdout
