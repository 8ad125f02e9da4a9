"""miniK: a laboratory language for studying declaration-site variance and
erased-generics cast soundness.

The pipeline is parse -> build_class_table -> check_program, after which the
typed program can be linted (provenance cast lint), executed (erased or
reified mode), or inspected for checkcast sites.
"""

from .ast import Program, SourceLoc, TypeRef
from .checker import (
    CastClassification,
    CheckedProgram,
    check_inheritance_variance,
    check_program,
    check_variance_positions,
    classify_cast_baseline,
    complete_cast_target,
    infer_call_type_args,
)
from .diagnostics import Diagnostic, render_diagnostics
from .parser import ParseError, parse
from .printer import pretty_print
from .provenance import ProvenanceMap, compute_provenance, lint_function, lint_program
from .runtime import (
    ERASED,
    REIFIED,
    CheckcastSite,
    ClassCastException,
    Completed,
    RunOutcome,
    RuntimeFault,
    checkcast_sites,
    erased_instance_check,
    run_program,
)
from .typesys import ClassTable, build_class_table, lub, subtype, supertype_instantiation

__all__ = [
    "CastClassification",
    "CheckcastSite",
    "CheckedProgram",
    "ClassCastException",
    "ClassTable",
    "Completed",
    "Diagnostic",
    "ERASED",
    "ParseError",
    "Program",
    "ProvenanceMap",
    "REIFIED",
    "RunOutcome",
    "RuntimeFault",
    "SourceLoc",
    "TypeRef",
    "build_class_table",
    "check_inheritance_variance",
    "check_program",
    "check_variance_positions",
    "checkcast_sites",
    "classify_cast_baseline",
    "complete_cast_target",
    "compute_provenance",
    "erased_instance_check",
    "infer_call_type_args",
    "lint_function",
    "lint_program",
    "lub",
    "parse",
    "pretty_print",
    "render_diagnostics",
    "run_program",
    "subtype",
    "supertype_instantiation",
]
