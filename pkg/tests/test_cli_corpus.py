from __future__ import annotations

import io
import shutil

import pytest

import minik.corpus as corpus_pkg
from minik.cli import main, run_corpus


@pytest.fixture
def corpus_file():
    def _path(entry_id: str) -> str:
        return str(corpus_pkg.BY_ID[entry_id].source_path)

    return _path


def test_corpus_covers_the_full_id_set():
    expected = {"P1", "P2", "P3a", "P3b", "P5"} | {f"P4.{i}" for i in range(1, 11)}
    assert {e.id for e in corpus_pkg.ENTRIES} == expected
    assert all(e.source_path.exists() for e in corpus_pkg.ENTRIES)
    assert all(e.golden_path.exists() for e in corpus_pkg.ENTRIES)
    matrix_rows = [e for e in corpus_pkg.ENTRIES if e.matrix is not None]
    assert len(matrix_rows) == 10


def test_diagnostics_render_sorted_by_location():
    from minik.ast import SourceLoc
    from minik.diagnostics import Diagnostic, render_diagnostics

    out_of_order = [
        Diagnostic("E-TYPE", SourceLoc("z.mk", 1, 1), "later file"),
        Diagnostic("E-TYPE", SourceLoc("a.mk", 9, 2), "second"),
        Diagnostic("W-REDUNDANT-IS", SourceLoc("a.mk", 3, 7), "first"),
    ]
    lines = render_diagnostics(out_of_order).splitlines()
    assert [ln.split()[2] for ln in lines] == ["a.mk:3:7:", "a.mk:9:2:", "z.mk:1:1:"]


def test_check_clean_program_prints_nothing(capsys, corpus_file):
    assert main(["check", corpus_file("P1")]) == 0
    assert capsys.readouterr().out == ""


def test_check_strict_prints_the_prelude_warning(capsys, corpus_file):
    assert main(["check", corpus_file("P1"), "--strict"]) == 0
    out = capsys.readouterr().out
    assert "W-VARIANT-INHERITANCE" in out
    assert "<prelude>" in out


def test_check_errors_exit_nonzero(capsys, corpus_file):
    assert main(["check", corpus_file("P3a")]) == 1
    assert "E-VARIANCE-POSITION" in capsys.readouterr().out


def test_lint_reports_the_provenance_warning(capsys, corpus_file):
    assert main(["lint", corpus_file("P1")]) == 0
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 1
    assert "W-PROVENANCE-UNCHECKED-CAST" in out[0]
    assert "P1.mk:12:" in out[0]


def test_run_prints_stdout_then_outcome(capsys, corpus_file):
    assert main(["run", corpus_file("P5"), "--mode", "erased"]) == 0
    assert capsys.readouterr().out == "string\ncompleted\n"


def test_run_with_exception_still_exits_zero(capsys, corpus_file):
    assert main(["run", corpus_file("P1"), "--mode", "erased"]) == 0
    out = capsys.readouterr().out
    assert out == "ClassCastException: B cannot be cast to A at P1.mk:17:1\n"


def test_run_blocked_by_errors_exits_one(capsys, corpus_file):
    assert main(["run", corpus_file("P3a"), "--mode", "erased"]) == 1
    assert "E-VARIANCE-POSITION" in capsys.readouterr().out


def test_sites_listing(capsys, corpus_file):
    assert main(["sites", corpus_file("P1")]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert "P1.mk:17:1 CHECKCAST A (receiver)" in lines


def test_parse_error_exits_two(tmp_path, capsys):
    bad = tmp_path / "bad.mk"
    bad.write_text("val x =\n", encoding="utf-8")
    assert main(["check", str(bad)]) == 2
    assert "parse error" in capsys.readouterr().out


def test_full_corpus_passes(capsys):
    assert main(["corpus"]) == 0
    out = capsys.readouterr().out
    assert out.strip().endswith("total=90 failed=0")
    assert "FAIL" not in out


def test_corpus_report_is_deterministic():
    first = io.StringIO()
    second = io.StringIO()
    assert run_corpus(None, bless=False, out=first) == 0
    assert run_corpus(None, bless=False, out=second) == 0
    assert first.getvalue() == second.getvalue()


def test_corpus_filter_selects_matrix_entries(capsys):
    assert main(["corpus", "--filter", "P4"]) == 0
    out = capsys.readouterr().out
    ids = {line.split()[0] for line in out.splitlines() if line.startswith("P4")}
    assert len(ids) == 10
    assert out.strip().endswith("total=60 failed=0")


def test_injected_golden_mismatch_fails(tmp_path, monkeypatch):
    shutil.copytree(corpus_pkg.GOLDEN_DIR, tmp_path / "golden")
    p2 = tmp_path / "golden" / "P2.golden"
    text = p2.read_text(encoding="utf-8")
    mutated = "\n".join(
        line for line in text.splitlines() if "W-UNCHECKED-CAST" not in line
    )
    p2.write_text(mutated + "\n", encoding="utf-8")
    monkeypatch.setattr(corpus_pkg, "GOLDEN_DIR", tmp_path / "golden")
    report = io.StringIO()
    assert run_corpus("P2", bless=False, out=report) == 1
    out = report.getvalue()
    assert "P2 check FAIL" in out
    assert "P2 run-erased PASS" in out


def test_bless_writes_identical_goldens(tmp_path, monkeypatch):
    monkeypatch.setattr(corpus_pkg, "GOLDEN_DIR", tmp_path / "golden")
    report = io.StringIO()
    assert run_corpus(None, bless=True, out=report) == 0
    for entry in corpus_pkg.ENTRIES:
        fresh = (tmp_path / "golden" / (entry.source_path.stem + ".golden")).read_text()
        committed = (corpus_pkg.CORPUS_DIR / "golden" / (entry.source_path.stem + ".golden")).read_text()
        assert fresh == committed, entry.id
