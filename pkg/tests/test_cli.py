from __future__ import annotations

import csv
import json
import subprocess
import sys

import pytest

from abducta.cli import EXIT_USAGE, main
from abducta.conformance import Verdict, VerdictKind


@pytest.fixture
def files(data_dir):
    return {p.stem: str(p) for p in data_dir.glob("*.json")}


@pytest.mark.parametrize(
    "trace, code",
    [("trace1", 0), ("trace4", 1), ("trace6", 1), ("trace9", 2)],
)
def test_check_exit_codes(files, capsys, trace, code):
    assert main(["check", files["pos"], files[trace], "--tml", "6"]) == code
    out = capsys.readouterr().out
    assert out.startswith("verdict: ")


def test_check_reports_hypothesised_pic(files, capsys):
    main(["check", files["pos"], files["trace6"], "--tml", "6"])
    out = capsys.readouterr().out
    assert "PIC    abduced at t=3 (range 3..8; " in out


def test_budget_exhaustion_exits_3(files, capsys):
    assert main(["check", files["pos"], files["trace1"], "--max-nodes", "2"]) == 3
    assert "unknown" in capsys.readouterr().out


def test_budget_from_environment(files, monkeypatch, capsys):
    monkeypatch.setenv("ABDUCTA_BUDGET_NODES", "2")
    assert main(["check", files["pos"], files["trace1"]]) == 3


def test_json_report_round_trips(files, capsys):
    main(["check", files["pos"], files["trace4"], "--json"])
    data = json.loads(capsys.readouterr().out)
    v = Verdict.from_dict(data)
    assert v.kind is VerdictKind.CONDITIONAL
    assert v.to_dict() == data
    (abduced,) = data["explanations"][0]["abduced"]
    assert (abduced["activity"], abduced["range"]) == ("GIC", [2, 4])


def test_usage_errors(files, tmp_path, capsys):
    assert main([]) == EXIT_USAGE
    assert main(["check", files["pos"], str(tmp_path / "missing.json")]) == EXIT_USAGE
    bad = tmp_path / "bad.json"
    bad.write_text('[["a",-1]]')
    assert main(["check", files["pos"], str(bad)]) == EXIT_USAGE
    assert "negative" in capsys.readouterr().err
    assert main(["check", files["pos"], files["trace1"], "--mode", "some"]) == EXIT_USAGE


def test_check_log_worst_code(files, capsys):
    assert main(["check-log", files["pos"], files["L1"]]) == 0
    assert main(["check-log", files["pos"], files["L2"], "--jobs", "2", "--json"]) == 1
    out = capsys.readouterr().out
    kinds = [v["kind"] for v in json.loads(out[out.index("{"):])["verdicts"]]
    assert kinds == ["conditional", "strong"]


def test_log_completeness(files, capsys):
    assert main(["log-completeness", files["pos"], files["L1"], "--tml", "6"]) == 0
    assert capsys.readouterr().out == "complete\n"
    assert main(["log-completeness", files["pos"], files["L1-minus-one"], "--tml", "6"]) == 1
    assert capsys.readouterr().out == "incomplete\nmissing: AI GIC PIC SI\n"
    assert main(["log-completeness", files["pos"], files["L1"], "--tml", "8"]) == 1
    assert "missing: AI FD CD FD CD PD RC SI" in capsys.readouterr().out
    assert main(["log-completeness", files["pos"], files["L2"]]) == EXIT_USAGE


def test_compile_seq(tmp_path, capsys):
    model = tmp_path / "ab.json"
    model.write_text(json.dumps({"type": "seq", "children": [
        {"type": "activity", "name": "a", "obs": "always"},
        {"type": "activity", "name": "b", "obs": "always"},
    ]}))
    assert main(["compile", str(model)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert "H(a,T0) -> E(b,T1) & T1>T0" in lines


def test_compile_pos_has_two_alternative_head(files, capsys):
    main(["compile", files["pos"]])
    lines = capsys.readouterr().out.splitlines()
    loop_exit = [l for l in lines if l.startswith("H(CD,T0)")]
    assert loop_exit and loop_exit[0].count(" | ") >= 1


def test_compile_all_never_has_no_h_or_e(files, tmp_path, capsys):
    data = json.loads(open(files["pos"]).read())

    def never(node):
        if node["type"] == "activity":
            node["obs"] = "never"
        for child in node.get("children", []) + ([node["body"]] if "body" in node else []):
            never(child)

    never(data)
    path = tmp_path / "never.json"
    path.write_text(json.dumps(data))
    main(["compile", str(path)])
    out = capsys.readouterr().out
    assert "ABD(" in out
    assert "H(" not in out and "E(" not in out.replace("ABD(", "")


def test_runs(files, capsys):
    assert main(["runs", files["pos"], "--tml", "6", "--json"]) == 0
    assert len(json.loads(capsys.readouterr().out)) == 3


def test_bench_writes_csv_and_figures(tmp_path, capsys):
    out = tmp_path / "bench"
    args = ["bench", "--pct-aoa", "0", "50", "--observed", "3", "--tml", "22", "23",
            "--repetitions", "1", "--out", str(out)]
    assert main(args) == 0
    printed = capsys.readouterr().out.split()
    assert printed[0].endswith("bench.csv")
    rows = list(csv.DictReader(open(out / "bench.csv")))
    assert len(rows) == 8
    for name in ("elapsed_vs_aoa.png", "solutions_vs_tml.png", "all_vs_first.png"):
        png = out / name
        assert png.read_bytes()[:4] == b"\x89PNG"


def test_bench_rejects_bad_config(capsys):
    assert main(["bench", "--pct-aoa", "150"]) == EXIT_USAGE


def test_module_entry_point(files):
    proc = subprocess.run(
        [sys.executable, "-m", "abducta", "check", files["pos"], files["trace9"], "--tml", "6"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 2
    assert "non-compliant" in proc.stdout
