"""Command-line driver.

Commands: `check` (diagnostics), `lint` (baseline plus provenance
diagnostics), `run` (evaluate under a runtime mode), `sites` (checkcast
placement), and `corpus` (diff every bundled program against its golden).
Exit codes: 2 on parse errors, 1 on error diagnostics or golden mismatches,
0 otherwise; warnings never affect the exit code.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import corpus as corpus_pkg
from .checker import CheckedProgram, check_program
from .diagnostics import Diagnostic, has_errors, render_diagnostics
from .parser import ParseError, parse
from .provenance import lint_program
from .runtime import ERASED, REIFIED, checkcast_sites, run_program
from .typesys import build_class_table

BLOCKED_MARKER = "<blocked by errors>"


def build(source: str, filename: str, strict: bool = False) -> tuple[CheckedProgram | None, list[Diagnostic]]:
    """Parse, build the class table, and check. Returns (checked, all
    diagnostics); checked is None when table construction already failed."""
    program = parse(source, filename)
    table, table_diags = build_class_table(program)
    if has_errors(table_diags):
        return None, table_diags
    checked = check_program(table, program, strict)
    return checked, table_diags + checked.diagnostics


def _column_output(source: str, filename: str, column: str) -> str:
    """The exact text a golden records for one driver column."""
    try:
        if column == "check":
            _, diags = build(source, filename, strict=False)
            return render_diagnostics(diags)
        if column == "check-strict":
            _, diags = build(source, filename, strict=True)
            return render_diagnostics(diags)
        if column == "lint":
            checked, diags = build(source, filename, strict=False)
            if checked is not None:
                diags = diags + lint_program(checked)
            return render_diagnostics(diags)
        if column in ("run-erased", "run-reified"):
            checked, diags = build(source, filename, strict=False)
            if checked is None or has_errors(diags):
                return render_diagnostics(diags) + BLOCKED_MARKER + "\n"
            mode = ERASED if column == "run-erased" else REIFIED
            outcome = run_program(checked, mode)
            return outcome.stdout + outcome.render() + "\n"
        if column == "sites":
            checked, diags = build(source, filename, strict=False)
            if checked is None or has_errors(diags):
                return render_diagnostics(diags) + BLOCKED_MARKER + "\n"
            return "".join(s.render() + "\n" for s in checkcast_sites(checked))
    except ParseError as e:
        return f"parse error {e.loc}: {e.message}\n"
    raise ValueError(f"unknown column {column}")


# ============================================================
# GOLDEN FILES
# ============================================================


def _golden_render(entry: corpus_pkg.CorpusEntry) -> str:
    lines = [f"# {entry.id}: {entry.title}"]
    source = entry.source()
    for column in corpus_pkg.COLUMNS:
        lines.append(f"== {column} ==")
        out = _column_output(source, entry.filename, column)
        lines.extend(out.splitlines())
    return "\n".join(lines) + "\n"


def _golden_sections(text: str) -> dict[str, list[str]]:
    # Lines starting with '#' are annotations and blank lines are layout;
    # corpus programs must not print either shape.
    sections: dict[str, list[str]] = {}
    current: list[str] | None = None
    for line in text.splitlines():
        if line.startswith("== ") and line.endswith(" =="):
            current = sections.setdefault(line[3:-3], [])
            continue
        if line.startswith("#") or not line.strip():
            continue
        if current is not None:
            current.append(line.rstrip())
    return sections


def _significant(text: str) -> list[str]:
    return [ln.rstrip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]


def run_corpus(filter_prefix: str | None, bless: bool, out=None) -> int:
    out = out if out is not None else sys.stdout
    entries = corpus_pkg.select(filter_prefix)
    if bless:
        corpus_pkg.GOLDEN_DIR.mkdir(exist_ok=True)
        for entry in entries:
            entry.golden_path.write_text(_golden_render(entry), encoding="utf-8")
            print(f"{entry.id} blessed", file=out)
        return 0
    total = 0
    failed = 0
    for entry in entries:
        golden = (
            _golden_sections(entry.golden_path.read_text(encoding="utf-8"))
            if entry.golden_path.exists()
            else {}
        )
        source = entry.source()
        for column in corpus_pkg.COLUMNS:
            total += 1
            actual = _significant(_column_output(source, entry.filename, column))
            expected = golden.get(column)
            if expected is None:
                failed += 1
                print(f"{entry.id} {column} FAIL", file=out)
                print(f"  missing golden section {column}", file=out)
                continue
            if actual == expected:
                print(f"{entry.id} {column} PASS", file=out)
            else:
                failed += 1
                print(f"{entry.id} {column} FAIL", file=out)
                for i, (a, b) in enumerate(_first_diff(expected, actual)):
                    print(f"  expected: {a}", file=out)
                    print(f"  actual:   {b}", file=out)
                    break
    print(f"total={total} failed={failed}", file=out)
    return 1 if failed else 0


def _first_diff(expected: list[str], actual: list[str]):
    for a, b in zip(expected + ["<end>"] * len(actual), actual + ["<end>"] * len(expected)):
        if a != b:
            yield a, b
            return


# ============================================================
# COMMANDS
# ============================================================


def _read_source(path: str) -> tuple[str, str]:
    p = Path(path)
    return p.read_text(encoding="utf-8"), p.name


def cmd_check(args: argparse.Namespace) -> int:
    source, name = _read_source(args.file)
    try:
        _, diags = build(source, name, strict=args.strict)
    except ParseError as e:
        print(f"parse error {e.loc}: {e.message}")
        return 2
    sys.stdout.write(render_diagnostics(diags))
    return 1 if has_errors(diags) else 0


def cmd_lint(args: argparse.Namespace) -> int:
    source, name = _read_source(args.file)
    try:
        checked, diags = build(source, name, strict=False)
    except ParseError as e:
        print(f"parse error {e.loc}: {e.message}")
        return 2
    if checked is not None:
        diags = diags + lint_program(checked)
    sys.stdout.write(render_diagnostics(diags))
    return 1 if has_errors(diags) else 0


def cmd_run(args: argparse.Namespace) -> int:
    source, name = _read_source(args.file)
    try:
        checked, diags = build(source, name, strict=False)
    except ParseError as e:
        print(f"parse error {e.loc}: {e.message}")
        return 2
    if checked is None or has_errors(diags):
        sys.stdout.write(render_diagnostics(diags))
        return 1
    outcome = run_program(checked, args.mode, eager_checkcast=args.eager_checkcast)
    sys.stdout.write(outcome.stdout)
    print(outcome.render())
    return 0


def cmd_sites(args: argparse.Namespace) -> int:
    source, name = _read_source(args.file)
    try:
        checked, diags = build(source, name, strict=False)
    except ParseError as e:
        print(f"parse error {e.loc}: {e.message}")
        return 2
    if checked is None or has_errors(diags):
        sys.stdout.write(render_diagnostics(diags))
        return 1
    for site in checkcast_sites(checked):
        print(site.render())
    return 0


def cmd_corpus(args: argparse.Namespace) -> int:
    return run_corpus(args.filter, args.bless)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="minik", description="miniK language driver")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="type-check a program and print diagnostics")
    p.add_argument("file")
    p.add_argument("--strict", action="store_true", help="enable the strict variance rules")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("lint", help="baseline diagnostics plus the provenance cast lint")
    p.add_argument("file")
    p.set_defaults(fn=cmd_lint)

    p = sub.add_parser("run", help="evaluate a program")
    p.add_argument("file")
    p.add_argument("--mode", choices=[ERASED, REIFIED], required=True)
    p.add_argument(
        "--eager-checkcast",
        action="store_true",
        help="erased mode: also verify every acquisition at its own location",
    )
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("sites", help="print the checkcast sites the erased runtime will verify")
    p.add_argument("file")
    p.set_defaults(fn=cmd_sites)

    p = sub.add_parser("corpus", help="diff every bundled program against its golden")
    p.add_argument("--filter", help="only entries whose id starts with this prefix")
    p.add_argument("--bless", action="store_true", help="regenerate the golden files")
    p.set_defaults(fn=cmd_corpus)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
