"""Checker and lint diagnostics.

Codes starting with W- are warnings, E- are errors. Errors block the `run`
command; warnings never affect the exit code.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ast import SourceLoc

WARNING_CODES = {
    "W-UNCHECKED-CAST",
    "W-REDUNDANT-IS",
    "W-VARIANT-INHERITANCE",
    "W-PROVENANCE-UNCHECKED-CAST",
}
ERROR_CODES = {
    "E-VARIANCE-POSITION",
    "E-GENERIC-IS",
    "E-TYPE",
    "E-TABLE",
}


@dataclass(frozen=True)
class Diagnostic:
    code: str
    loc: SourceLoc
    message: str

    @property
    def severity(self) -> str:
        return "warning" if self.code.startswith("W-") else "error"

    def render(self) -> str:
        return f"{self.severity} {self.code} {self.loc}: {self.message}"


def warning(code: str, loc: SourceLoc, message: str) -> Diagnostic:
    assert code in WARNING_CODES, code
    return Diagnostic(code, loc, message)


def error(code: str, loc: SourceLoc, message: str) -> Diagnostic:
    assert code in ERROR_CODES, code
    return Diagnostic(code, loc, message)


def sort_diagnostics(diags: list[Diagnostic]) -> list[Diagnostic]:
    return sorted(diags, key=lambda d: (d.loc.file, d.loc.line, d.loc.col, d.code))


def render_diagnostics(diags: list[Diagnostic]) -> str:
    return "".join(d.render() + "\n" for d in sort_diagnostics(diags))


def has_errors(diags) -> bool:
    return any(d.severity == "error" for d in diags)
