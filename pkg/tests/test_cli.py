from __future__ import annotations

import json

import pytest

from randsentry.cli import main


@pytest.fixture()
def casino_file(tmp_path, fixture_source):
    path = tmp_path / "casino.sol"
    path.write_text(fixture_source("v08_hashed_cast_lottery.sol"), encoding="utf-8")
    return path


def test_analyze_text_reports_high_risk_and_exits_1(casino_file, capsys):
    code = main(["analyze", str(casino_file)])
    out = capsys.readouterr().out
    assert code == 1
    assert "HIGH_RISK" in out
    assert "G2" in out and "G3" in out


def test_analyze_json_emits_single_document(casino_file, capsys):
    code = main(["analyze", str(casino_file), "--format", "json"])
    out = capsys.readouterr().out
    assert code == 1
    doc = json.loads(out)  # would fail if anything but one JSON document
    assert doc["final_label"] == "vulnerable"
    assert doc["risk"]["level"] == "HIGH_RISK"


def test_analyze_safe_file_exits_0(tmp_path, fixture_source, capsys):
    path = tmp_path / "safe.sol"
    path.write_text(fixture_source("s01_vrf_raffle.sol"), encoding="utf-8")
    assert main(["analyze", str(path)]) == 0
    assert "safe" in capsys.readouterr().out


def test_analyze_missing_file_exits_2(tmp_path, capsys):
    code = main(["analyze", str(tmp_path / "ghost.sol")])
    assert code == 2
    err = capsys.readouterr().err
    assert "ghost.sol" in err


def test_corpus_empty_dir_exits_0(tmp_path, capsys):
    corpus = tmp_path / "empty"
    corpus.mkdir()
    code = main(["corpus", str(corpus), "--out", str(tmp_path / "out")])
    out = capsys.readouterr().out
    assert code == 0
    assert "0 file(s)" in out
    assert (tmp_path / "out" / "summary.csv").exists()


def test_corpus_exit_1_on_high_risk(tmp_path, ground_truth_dir, capsys):
    code = main(["corpus", str(ground_truth_dir), "--out", str(tmp_path / "out")])
    capsys.readouterr()
    assert code == 1


def test_corpus_missing_dir_exits_2(tmp_path, capsys):
    code = main(["corpus", str(tmp_path / "nope"), "--out", str(tmp_path / "out")])
    assert code == 2
    assert capsys.readouterr().err


def test_corpus_jobs_from_env(tmp_path, ground_truth_dir, capsys, monkeypatch):
    monkeypatch.setenv("RANDSENTRY_JOBS", "2")
    code = main(["corpus", str(ground_truth_dir), "--out", str(tmp_path / "out"),
                 "--format", "json"])
    out = capsys.readouterr().out
    assert code == 1
    assert json.loads(out)["total"] == 32


def test_corpus_rejects_bad_jobs(tmp_path, ground_truth_dir, capsys):
    code = main(["corpus", str(ground_truth_dir), "--out", str(tmp_path / "out"),
                 "--jobs", "0"])
    assert code == 2
    assert "--jobs" in capsys.readouterr().err


def test_eval_fixture_suite_prints_perfect_metrics(tmp_path, ground_truth_dir, capsys):
    main(["corpus", str(ground_truth_dir), "--out", str(tmp_path / "out")])
    capsys.readouterr()
    code = main(["eval", "--reports", str(tmp_path / "out"),
                 "--ground-truth", str(ground_truth_dir / "labels.csv")])
    out = capsys.readouterr().out
    assert code == 0
    assert "acc=1.000 prec=1.000 rec=1.000 f1=1.000" in out
    assert "tp=22 tn=10 fp=0 fn=0" in out


def test_eval_missing_report_exits_2(tmp_path, ground_truth_dir, capsys):
    out_dir = tmp_path / "out"
    out_dir.mkdir()
    code = main(["eval", "--reports", str(out_dir),
                 "--ground-truth", str(ground_truth_dir / "labels.csv")])
    assert code == 2
    assert capsys.readouterr().err


def test_patterns_list_prints_full_registry(capsys):
    code = main(["patterns", "list"])
    out = capsys.readouterr().out
    assert code == 0
    lines = [l for l in out.splitlines() if l.startswith("G")]
    assert len(lines) == 58
    counts: dict[str, int] = {}
    for line in lines:
        group = line.split()[1]
        counts[group] = counts.get(group, 0) + 1
    assert counts == {"G1": 10, "G2": 11, "G3": 15, "G4": 1, "G5": 4,
                      "G6": 10, "G7": 2, "G8": 3, "G9": 2}


def test_unknown_flag_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["analyze", "--bogus"])
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err
