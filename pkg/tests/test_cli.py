from __future__ import annotations

import json
import subprocess
import sys

import pytest

from talforge.cli import main
from talforge.textfmt import parse_file


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_validate(capsys, corpus_dir):
    assert run(capsys, "validate", corpus_dir / "weir.tal")[0] == 0


def test_enumerate_prints_counts(capsys, corpus_dir):
    code, out, _ = run(capsys, "enumerate", corpus_dir / "weir.tal", "G2oG1", "--max-len", 8)
    assert code == 0
    assert out.splitlines() == ["1\teps", "1\tabcd", "1\taabbccdd"]


def test_enumerate_reports_truncation(capsys, corpus_dir):
    code, out, err = run(capsys, "enumerate", corpus_dir / "weir.tal", "G2oG1", "--max-len", 12, "--budget", "10")
    assert code == 2
    assert "budget exhausted" in err


def test_budget_from_environment(capsys, corpus_dir, monkeypatch):
    monkeypatch.setenv("TALFORGE_BUDGET", "10")
    assert run(capsys, "enumerate", corpus_dir / "weir.tal", "G2oG1", "--max-len", 12)[0] == 2
    monkeypatch.setenv("TALFORGE_BUDGET", "not-a-number")
    code, _, err = run(capsys, "enumerate", corpus_dir / "weir.tal", "G2oG1", "--max-len", 4)
    assert code == 3 and "TALFORGE_BUDGET" in err


def test_check_exit_codes(capsys, corpus_dir):
    aa = corpus_dir / "aa.tal"
    assert run(capsys, "check", aa, "G_aa", "P_aa", "--mode", "dweak", "--max-len", 4) == (0, "equal\n", "")
    code, out, _ = run(capsys, "check", aa, "G_aa", "P_aa", "--mode", "dstrong", "--max-len", 4)
    assert (code, out) == (1, "unequal\twitness=aa\tcounts=1,1\n")
    code, out, _ = run(capsys, "check", corpus_dir / "weir.tal", "G2oG1", "TAGofWeir",
                       "--mode", "dweak", "--max-len", 12, "--budget", "10")
    assert code == 2 and out.rstrip().endswith("truncated")


def test_check_explain(capsys, corpus_dir):
    code, out, _ = run(capsys, "check", corpus_dir / "aa.tal", "G_aa", "P_aa", "--mode", "dstrong",
                       "--max-len", 4, "--explain")
    body = json.loads(out)
    assert code == 1 and body["verdict"] == "unequal" and body["witness"] == "aa"


def test_trees_json_and_dot(capsys, corpus_dir):
    code, out, _ = run(capsys, "trees", corpus_dir / "aa.tal", "G_aa", "--string", "aa")
    assert code == 0
    doc = json.loads(out)
    assert doc["label"] == "S" and [c["label"] for c in doc["children"]] == ["A", "A"]
    code, out, _ = run(capsys, "trees", corpus_dir / "aa.tal", "P_aa", "--string", "aa", "--format", "dot")
    assert code == 0 and out.startswith('digraph "derivation_1" {')
    assert out.count("->") == 3


def test_trees_with_spaced_symbols(capsys, corpus_dir):
    code, out, _ = run(capsys, "trees", corpus_dir / "weir.tal", "P2", "--string", "l1 l2 l3")
    assert code == 0 and len(out.splitlines()) == 1


def test_convert_writes_text_and_report(capsys, corpus_dir, tmp_path):
    report = tmp_path / "r.json"
    code, out, _ = run(capsys, "convert", corpus_dir / "weir.tal", "TAGofWeir", "--to", "lig",
                       "--as", "L", "--report", report)
    assert code == 0
    lig = parse_file(out)["L"]
    assert type(lig).__name__ == "Lig"
    body = json.loads(report.read_text())
    assert body["source_kind"] == "tag" and body["target_kind"] == "lig"


def test_normalize(capsys, corpus_dir):
    code, out, err = run(capsys, "normalize", corpus_dir / "weir.tal", "TAGofWeir")
    assert code == 0 and out.startswith("system tag TAGofWeir {")


def test_errors_exit_three(capsys, corpus_dir, tmp_path):
    code, _, err = run(capsys, "enumerate", corpus_dir / "weir.tal", "Nope", "--max-len", 3)
    assert code == 3 and "no system named 'Nope'" in err
    assert run(capsys, "validate", tmp_path / "missing.tal")[0] == 3
    bad = tmp_path / "bad.tal"
    bad.write_text("system cfg G { S -> ^S ; }\n")
    code, _, err = run(capsys, "validate", bad)
    assert code == 3 and "bad.tal:1:" in err
    code, _, err = run(capsys, "check", corpus_dir / "aa.tal", "G_aa", "P2", "--mode", "dweak", "--max-len", 2)
    assert code == 3


def test_usage_errors_exit_three(capsys):
    with pytest.raises(SystemExit) as info:
        main(["check"])
    assert info.value.code == 3
    capsys.readouterr()


def test_console_script_entry_point(corpus_dir):
    done = subprocess.run([sys.executable, "-m", "talforge.cli", "enumerate", str(corpus_dir / "aa.tal"),
                           "P_aa", "--max-len", "2"], capture_output=True, text=True)
    assert done.returncode == 0 and done.stdout == "1\taa\n"
