"""Implicit-cast provenance analysis and the cast lint built on it.

A forward, intraprocedural, flow-sensitive pass tracks, per value, the set
of static types the value has held along its chain of implicit upcasts
(val bindings, argument passing, returns). Aliasing through val bindings
shares one history; if/else joins union the histories. Explicit casts are
then re-classified against every recorded origin type, which surfaces
unchecked casts the baseline classifier misses once an implicit upcast has
laundered the type arguments.

The analysis is local by design: a chain split across two functions is not
seen, and the lint stays silent on it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ast import (
    BOOLEAN,
    CallExpr,
    CastExpr,
    ClassDecl,
    ClassType,
    Expr,
    ExprStmt,
    FunDecl,
    If,
    Index,
    IsExpr,
    MethodCall,
    PropertyGet,
    Return,
    Stmt,
    StmtDecl,
    TypeRef,
    ValDecl,
    VarRef,
    walk_exprs,
    walk_stmts,
)
from .checker import CastClassification, CheckedProgram, classify_cast_baseline
from .diagnostics import Diagnostic, warning


@dataclass
class ProvenanceMap:
    """Per-occurrence provenance: for every expression occurrence, the
    ordered set of static types its value had held at that point (the
    current static type always included)."""

    occurrence_sets: dict[int, tuple[TypeRef, ...]] = field(default_factory=dict)
    # Snapshot of the operand's history taken at each explicit cast, before
    # the cast's own target type is appended.
    cast_snapshots: dict[int, tuple[TypeRef, ...]] = field(default_factory=dict)

    def at(self, e: Expr) -> tuple[TypeRef, ...]:
        return self.occurrence_sets.get(id(e), ())


def _append(history: tuple[TypeRef, ...], t: TypeRef) -> tuple[TypeRef, ...]:
    return history if t in history else history + (t,)


class _Analysis:
    def __init__(self, checked: CheckedProgram) -> None:
        self.checked = checked
        self.out = ProvenanceMap()
        self.values: dict[int, tuple[TypeRef, ...]] = {}
        self.next_value = 0
        self.coercion_to: dict[int, TypeRef] = {
            c.node_id: c.to_type for c in checked.coercions
        }

    def fresh(self, t: TypeRef) -> int:
        vid = self.next_value
        self.next_value += 1
        self.values[vid] = (t,)
        return vid

    def static_type(self, e: Expr) -> TypeRef:
        return self.checked.expr_types.get(id(e), BOOLEAN)

    # -- expressions -----------------------------------------------------

    def visit_expr(self, e: Expr, env: dict[str, int]) -> int:
        if isinstance(e, VarRef):
            vid = env.get(e.name)
            if vid is None:
                vid = self.fresh(self.static_type(e))
            # A narrowed occurrence reports its narrowed static type as part
            # of its own set without polluting the value's upcast history.
            self.out.occurrence_sets[id(e)] = _append(self.values[vid], self.static_type(e))
            return vid
        if isinstance(e, CastExpr):
            vid = self.visit_expr(e.expr, env)
            # The lint wants the history as it stood when the cast ran.
            self.out.cast_snapshots[id(e)] = self.values[vid]
            target = self.checked.cast_targets.get(id(e))
            if target is not None:
                self.values[vid] = _append(self.values[vid], target)
            self.out.occurrence_sets[id(e)] = self.values[vid]
            return vid
        if isinstance(e, IsExpr):
            self.visit_expr(e.expr, env)
            vid = self.fresh(BOOLEAN)
            self.out.occurrence_sets[id(e)] = self.values[vid]
            return vid
        if isinstance(e, (MethodCall, Index, CallExpr, PropertyGet)):
            if isinstance(e, (MethodCall, Index, PropertyGet)):
                self.visit_expr(e.receiver, env)
            args = e.args if isinstance(e, (MethodCall, CallExpr)) else ()
            if isinstance(e, Index):
                args = (e.index,)
            for a in args:
                avid = self.visit_expr(a, env)
                coerced = self.coercion_to.get(id(a))
                if coerced is not None:
                    self.values[avid] = _append(self.values[avid], coerced)
            # Call and container-read results start fresh: provenance does
            # not flow through element reads or out of callees.
            vid = self.fresh(self.static_type(e))
            self.out.occurrence_sets[id(e)] = self.values[vid]
            return vid
        # Literals
        vid = self.fresh(self.static_type(e))
        self.out.occurrence_sets[id(e)] = self.values[vid]
        return vid

    # -- statements --------------------------------------------------------

    def visit_stmt(self, s: Stmt, env: dict[str, int]) -> None:
        if isinstance(s, ValDecl):
            vid = self.visit_expr(s.init, env)
            bound = self.checked.decl_types.get(id(s))
            if bound is not None:
                self.values[vid] = _append(self.values[vid], bound)
            env[s.name] = vid
            return
        if isinstance(s, ExprStmt):
            self.visit_expr(s.expr, env)
            return
        if isinstance(s, Return):
            vid = self.visit_expr(s.expr, env)
            coerced = self.coercion_to.get(id(s.expr))
            if coerced is not None:
                self.values[vid] = _append(self.values[vid], coerced)
            return
        if isinstance(s, If):
            self.visit_expr(s.cond, env)
            before = dict(self.values)
            then_env = dict(env)
            for inner in s.then_body:
                self.visit_stmt(inner, then_env)
            after_then = self.values
            self.values = dict(before)
            else_env = dict(env)
            if s.else_body is not None:
                for inner in s.else_body:
                    self.visit_stmt(inner, else_env)
            after_else = self.values
            # Join: histories union, ordered as then-branch then else-only.
            merged: dict[int, tuple[TypeRef, ...]] = {}
            for vid in set(after_then) | set(after_else):
                a = after_then.get(vid, ())
                b = after_else.get(vid, ())
                joined = a
                for t in b:
                    joined = _append(joined, t)
                merged[vid] = joined
            self.values = merged
            return
        raise TypeError(f"unknown statement {s!r}")


def compute_provenance(
    checked: CheckedProgram,
    body: tuple[Stmt, ...],
    params: tuple[tuple[str, TypeRef], ...] = (),
) -> ProvenanceMap:
    """Run the forward analysis over one function body (or the top level).

    Parameters seed the environment with singleton histories of their
    declared types; every other value starts fresh at its producer.
    """
    analysis = _Analysis(checked)
    env: dict[str, int] = {}
    for name, t in params:
        env[name] = analysis.fresh(t)
    for s in body:
        analysis.visit_stmt(s, env)
    return analysis.out


def _render_set(types: tuple[TypeRef, ...]) -> str:
    return "{" + ", ".join(t.render() for t in types) + "}"


def lint_function(checked: CheckedProgram, body: tuple[Stmt, ...], prov: ProvenanceMap) -> list[Diagnostic]:
    """Re-classify every explicit cast against each origin type in its
    operand's provenance set; casts the baseline already warns about are
    skipped. One diagnostic per offending cast."""
    diags: list[Diagnostic] = []
    for s in walk_stmts(body):
        exprs: list[Expr] = []
        if isinstance(s, ValDecl):
            exprs.append(s.init)
        elif isinstance(s, (ExprStmt,)):
            exprs.append(s.expr)
        elif isinstance(s, Return):
            exprs.append(s.expr)
        elif isinstance(s, If):
            exprs.append(s.cond)
        for root in exprs:
            for e in walk_exprs(root):
                if not isinstance(e, CastExpr):
                    continue
                classification = checked.cast_class.get(id(e))
                target = checked.cast_targets.get(id(e))
                if classification is None or target is None:
                    continue
                generic_target = isinstance(target, ClassType) and bool(target.args)
                eligible = classification is CastClassification.UNCHECKED_SILENT or (
                    classification is CastClassification.FULLY_CHECKED and generic_target
                )
                if not eligible:
                    continue
                history = prov.cast_snapshots.get(id(e), ())
                culprits = [
                    origin
                    for origin in history
                    if classify_cast_baseline(checked.table, origin, target)
                    is CastClassification.UNCHECKED_WARNED
                ]
                if not culprits:
                    continue
                diags.append(
                    warning(
                        "W-PROVENANCE-UNCHECKED-CAST",
                        e.loc,
                        f"cast to {target.render()} is unchecked for a value whose "
                        f"implicit-cast history is {_render_set(history)} "
                        f"(unchecked from {culprits[0].render()})",
                    )
                )
    return diags


def lint_program(checked: CheckedProgram) -> list[Diagnostic]:
    """Provenance lint over every function, method body, and the top level."""
    if not checked.ok:
        return []
    diags: list[Diagnostic] = []
    table = checked.table

    for decl in checked.program.decls:
        if isinstance(decl, FunDecl):
            sig = table.functions.get(decl.name)
            if sig is None:
                continue
            params = tuple(zip(sig.param_names, sig.param_types))
            prov = compute_provenance(checked, decl.body, params)
            diags.extend(lint_function(checked, decl.body, prov))
        elif isinstance(decl, ClassDecl):
            entry = table.classes.get(decl.name)
            if entry is None or entry.decl is not decl:
                continue
            for msig in entry.methods.values():
                if msig.decl.body is None:
                    continue
                params = tuple(zip(msig.param_names, msig.param_types))
                prov = compute_provenance(checked, msig.decl.body, params)
                diags.extend(lint_function(checked, msig.decl.body, prov))

    top = tuple(d.stmt for d in checked.program.decls if isinstance(d, StmtDecl))
    prov = compute_provenance(checked, top)
    diags.extend(lint_function(checked, top, prov))
    return diags
