"""miniK type checker.

Assigns a static type to every expression, applies flow-sensitive narrowing
from `is` checks, enforces declaration-site variance positions (with
@UnsafeVariance), classifies explicit casts the way an erased-generics
compiler does, and records every implicit coercion for the provenance lint.

Strict mode adds two opt-in rules on top of the baseline diagnostics (it
never removes one): non-variant inheritance from a variant class is flagged,
and generic smart casts from a variant class to a non-variant class are
rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .ast import (
    ANY_NULLABLE,
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
    IntLit,
    IsExpr,
    MethodCall,
    ParamRef,
    PrimitiveType,
    Program,
    PropertyGet,
    Return,
    SourceLoc,
    Stmt,
    StmtDecl,
    StringLit,
    TypeRef,
    ValDecl,
    VarRef,
    Variance,
)
from .diagnostics import Diagnostic, error, has_errors, warning
from .typesys import (
    ClassEntry,
    ClassTable,
    TypeResolutionError,
    lub,
    resolve_type,
    substitute,
    subtype,
    supertype_instantiation,
)


class CastClassification(Enum):
    FULLY_CHECKED = "fully-checked"
    UNCHECKED_WARNED = "unchecked-warned"
    # The runtime cannot verify the type arguments, yet the argument
    # comparison sees no difference, so no warning is issued. This is the
    # soundness gap the corpus exploits.
    UNCHECKED_SILENT = "unchecked-silent"


@dataclass(frozen=True)
class CallInfo:
    """Resolution of one call-like expression, kept for the runtime."""

    kind: str  # "ctor" | "fun" | "builtin" | "method" | "index-get" | "property-get"
    class_name: str | None  # static class of the receiver (member kinds)
    declaring_class: str | None  # class that declares the member
    member: str | None
    type_args: tuple[TypeRef, ...]  # resolved function/ctor type arguments
    type_param_names: tuple[str, ...]
    declared_params: tuple[TypeRef, ...]  # as written at the declaration
    declared_return: TypeRef
    param_types: tuple[TypeRef, ...]  # substituted at this call
    return_type: TypeRef


@dataclass(frozen=True)
class Coercion:
    kind: str  # "decl" | "arg" | "return"
    node_id: int  # id() of the coerced expression
    from_type: TypeRef
    to_type: TypeRef
    loc: SourceLoc


@dataclass(frozen=True)
class Narrowing:
    var: str
    declared: TypeRef
    narrowed: TypeRef
    loc: SourceLoc


@dataclass
class CheckedProgram:
    program: Program
    table: ClassTable
    strict: bool
    diagnostics: list[Diagnostic]
    expr_types: dict[int, TypeRef] = field(default_factory=dict)
    call_info: dict[int, CallInfo] = field(default_factory=dict)
    cast_targets: dict[int, TypeRef] = field(default_factory=dict)
    cast_class: dict[int, CastClassification] = field(default_factory=dict)
    is_targets: dict[int, TypeRef] = field(default_factory=dict)
    decl_types: dict[int, TypeRef] = field(default_factory=dict)
    coercions: list[Coercion] = field(default_factory=list)
    narrowings: list[Narrowing] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not has_errors(self.diagnostics)

    def type_of(self, e: Expr) -> TypeRef:
        return self.expr_types[id(e)]


# ============================================================
# VARIANCE POSITION CHECKING
# ============================================================

_OUT_POS = "out"
_IN_POS = "in"
_INV_POS = "invariant"


def _param_occurrences(t: TypeRef, table: ClassTable, position: str, out: list[tuple[str, str]]) -> None:
    """Collect (parameter name, position) pairs for every ParamRef in `t`.

    Positions compose along the path: covariant arguments preserve the
    enclosing position, contravariant ones flip it, invariant ones pin it.
    """
    if isinstance(t, ParamRef):
        out.append((t.name, position))
        return
    if isinstance(t, ClassType) and t.args:
        entry = table.classes.get(t.name)
        params = entry.type_params if entry else ()
        for p, arg in zip(params, t.args):
            if p.variance is Variance.OUT:
                child = position
            elif p.variance is Variance.IN:
                child = {_OUT_POS: _IN_POS, _IN_POS: _OUT_POS, _INV_POS: _INV_POS}[position]
            else:
                child = _INV_POS
            _param_occurrences(arg, table, child, out)


def _conflicts(declared: Variance, position: str) -> bool:
    if declared is Variance.OUT:
        return position != _OUT_POS
    if declared is Variance.IN:
        return position != _IN_POS
    return False


def check_variance_positions(table: ClassTable, entry: ClassEntry) -> list[Diagnostic]:
    """Flag uses of a variant type parameter in a contradicting position:
    'out' parameters in parameter or mutable-property positions, 'in'
    parameters in return positions. @UnsafeVariance on a property type
    acknowledges and suppresses the violation."""
    diags: list[Diagnostic] = []
    variant = {p.name: p.variance for p in entry.type_params if p.variance is not Variance.INV}
    if not variant:
        return diags

    def scan(t: TypeRef, position: str, loc: SourceLoc, what: str, suppressed: bool) -> None:
        occs: list[tuple[str, str]] = []
        _param_occurrences(t, table, position, occs)
        for name, pos in occs:
            declared = variant.get(name)
            if declared is None or not _conflicts(declared, pos):
                continue
            if suppressed:
                continue
            diags.append(
                error(
                    "E-VARIANCE-POSITION",
                    loc,
                    f"type parameter {name} is declared '{declared.keyword()}' "
                    f"but occurs in {pos} position in {what}",
                )
            )

    for sig in entry.methods.values():
        m = sig.decl
        for ptype, pname in zip(sig.param_types, sig.param_names):
            scan(ptype, _IN_POS, m.loc, f"the type of parameter {pname} of {entry.name}.{m.name}", False)
        scan(sig.return_type, _OUT_POS, m.loc, f"the return type of {entry.name}.{m.name}", False)
    for prop in entry.properties.values():
        decl_loc = next(
            (m.loc for m in entry.decl.members if getattr(m, "name", None) == prop.name),
            entry.decl.loc,
        )
        if prop.mutable:
            # A var is readable and writable, so its type sits in both
            # positions at once, regardless of setter visibility.
            scan(prop.type, _INV_POS, decl_loc, f"the type of var property {entry.name}.{prop.name}", prop.unsafe_variance)
        else:
            scan(prop.type, _OUT_POS, decl_loc, f"the type of val property {entry.name}.{prop.name}", prop.unsafe_variance)
    return diags


def check_inheritance_variance(table: ClassTable, entry: ClassEntry, strict: bool) -> list[Diagnostic]:
    """Strict-mode rule: a type parameter that weakens the variance of the
    supertype parameter it instantiates (e.g. a non-variant T filling an
    'out' slot) must be acknowledged with @UnsafeVariance on the supertype
    reference."""
    if not strict:
        return []
    diags: list[Diagnostic] = []
    own = {p.name: p.variance for p in entry.type_params}
    for ref in entry.supertypes:
        sup = ref.type
        assert isinstance(sup, ClassType)
        sup_entry = table.classes.get(sup.name)
        if sup_entry is None or sup.args is None:
            continue
        for sup_param, arg in zip(sup_entry.type_params, sup.args):
            if sup_param.variance is Variance.INV or not isinstance(arg, ParamRef):
                continue
            filling = own.get(arg.name)
            if filling is None or filling is sup_param.variance:
                continue
            if ref.unsafe_variance:
                continue
            diags.append(
                warning(
                    "W-VARIANT-INHERITANCE",
                    ref.loc,
                    f"parameter {arg.name} of {entry.name} weakens the "
                    f"'{sup_param.variance.keyword()}' variance of {sup.name}.{sup_param.name}; "
                    f"acknowledge with @UnsafeVariance on the supertype reference",
                )
            )
    return diags


# ============================================================
# CAST TARGET COMPLETION AND CLASSIFICATION
# ============================================================


def _unify_down(table: ClassTable, target_class: str, source: ClassType) -> tuple[TypeRef, ...] | None:
    """Solve for target arguments so that `target_class<X...>` instantiates
    to `source` at source's class (the `List<B> as MutableList` case,
    giving MutableList<B>)."""
    entry = table.classes.get(target_class)
    if entry is None or source.args is None:
        return None
    holes = tuple(ParamRef(p.name) for p in entry.type_params)
    inst = supertype_instantiation(table, ClassType(target_class, holes), source.name)
    if inst is None or inst.args is None:
        return None
    bindings: dict[str, TypeRef] = {}

    def match(pattern: TypeRef, actual: TypeRef) -> bool:
        if isinstance(pattern, ParamRef):
            if pattern.name in bindings:
                return bindings[pattern.name] == actual
            bindings[pattern.name] = actual
            return True
        if isinstance(pattern, ClassType) and isinstance(actual, ClassType):
            if pattern.name != actual.name or pattern.args is None or actual.args is None:
                return pattern == actual
            return all(match(p, a) for p, a in zip(pattern.args, actual.args))
        return pattern == actual

    for p, a in zip(inst.args, source.args):
        if not match(p, a):
            return None
    return tuple(bindings.get(p.name, ANY_NULLABLE) for p in entry.type_params)


def complete_cast_target(
    table: ClassTable,
    source: TypeRef,
    target: TypeRef,
    expected: TypeRef | None = None,
) -> TypeRef:
    """Fill in the type arguments of a bare cast target like `as MutableList`.

    The expected type of the surrounding context wins when its class matches;
    otherwise the arguments are projected from the source along the
    hierarchy (in either direction); unrelated sources fill with Any?.
    """
    if not isinstance(target, ClassType) or target.args is not None:
        return target
    name = target.name
    if isinstance(expected, ClassType) and expected.name == name and expected.args is not None:
        return expected
    if isinstance(source, ClassType) and source.args is not None:
        up = supertype_instantiation(table, source, name)
        if up is not None:
            return up
        down = _unify_down(table, name, source)
        if down is not None:
            return ClassType(name, down)
    arity = table.arity(name)
    return ClassType(name, tuple(ANY_NULLABLE for _ in range(arity)))


def _projected_args(table: ClassTable, source: TypeRef, target_class: str) -> tuple[TypeRef, ...] | None:
    if not isinstance(source, ClassType) or source.args is None:
        return None
    up = supertype_instantiation(table, source, target_class)
    if up is not None:
        return up.args
    return _unify_down(table, target_class, source)


def classify_cast_baseline(table: ClassTable, source: TypeRef, target: TypeRef) -> CastClassification:
    """Replicate the baseline compiler's unchecked-cast reasoning.

    A cast is fully checked when the target carries no type arguments (the
    runtime class tag decides it completely) or when it is statically safe.
    Otherwise it is unchecked; it is *warned* only when the source's type
    arguments, viewed at the target's class, differ from the target's.
    A silent outcome means the runtime cannot verify the arguments and the
    compiler saw nothing to complain about.
    """
    if not isinstance(target, ClassType):
        return CastClassification.FULLY_CHECKED
    assert target.args is not None, "classify requires a completed target"
    if not target.args:
        return CastClassification.FULLY_CHECKED
    if subtype(table, source, target):
        return CastClassification.FULLY_CHECKED
    projected = _projected_args(table, source, target.name)
    if projected is None:
        return CastClassification.UNCHECKED_WARNED
    if tuple(projected) == tuple(target.args):
        return CastClassification.UNCHECKED_SILENT
    return CastClassification.UNCHECKED_WARNED


# ============================================================
# CALL TYPE-ARGUMENT INFERENCE
# ============================================================


def infer_call_type_args(
    table: ClassTable,
    type_params: tuple[str, ...],
    declared_params: tuple[TypeRef, ...],
    arg_types: tuple[TypeRef, ...],
) -> dict[str, TypeRef] | str:
    """Infer a substitution for a generic call: each type parameter becomes
    the least upper bound of every argument type constraining it. Returns an
    error string when some parameter is unconstrained."""
    constraints: dict[str, list[TypeRef]] = {p: [] for p in type_params}

    def collect(declared: TypeRef, actual: TypeRef) -> None:
        if isinstance(declared, ParamRef) and declared.name in constraints:
            constraints[declared.name].append(actual)
            return
        if isinstance(declared, ClassType) and declared.args and isinstance(actual, ClassType) and actual.args is not None:
            inst = supertype_instantiation(table, actual, declared.name)
            if inst is not None and inst.args is not None:
                for d, a in zip(declared.args, inst.args):
                    collect(d, a)

    for declared, actual in zip(declared_params, arg_types):
        collect(declared, actual)

    bindings: dict[str, TypeRef] = {}
    for p in type_params:
        found = constraints[p]
        if not found:
            return f"cannot infer type argument {p}"
        acc = found[0]
        for t in found[1:]:
            acc = lub(table, acc, t)
        bindings[p] = acc
    return bindings


# ============================================================
# THE CHECKER
# ============================================================


class _Scope:
    def __init__(self, parent: _Scope | None = None) -> None:
        self.parent = parent
        self.vars: dict[str, TypeRef] = {}
        self.narrowed: dict[str, TypeRef] = {}

    def lookup(self, name: str) -> TypeRef | None:
        s: _Scope | None = self
        while s is not None:
            if name in s.narrowed:
                return s.narrowed[name]
            if name in s.vars:
                return s.vars[name]
            s = s.parent
        return None

    def declared(self, name: str) -> bool:
        s: _Scope | None = self
        while s is not None:
            if name in s.vars:
                return True
            s = s.parent
        return False


class _Checker:
    def __init__(self, table: ClassTable, program: Program, strict: bool) -> None:
        self.table = table
        self.out = CheckedProgram(program, table, strict, diagnostics=[])
        self.strict = strict
        self.type_param_scope: frozenset[str] = frozenset()
        self.return_type: TypeRef | None = None
        self.current_class: str | None = None

    # -- plumbing --------------------------------------------------------

    def diag(self, d: Diagnostic) -> None:
        self.out.diagnostics.append(d)

    def e_type(self, loc: SourceLoc, message: str) -> None:
        self.diag(error("E-TYPE", loc, message))

    def resolve(self, t: TypeRef, loc: SourceLoc, allow_bare: bool = False) -> TypeRef | None:
        try:
            return resolve_type(self.table, t, self.type_param_scope, loc, allow_bare)
        except TypeResolutionError as e:
            self.e_type(e.loc, e.message)
            return None

    def record_coercion(self, kind: str, node: Expr, from_t: TypeRef, to_t: TypeRef, loc: SourceLoc) -> None:
        if from_t != to_t and subtype(self.table, from_t, to_t):
            self.out.coercions.append(Coercion(kind, id(node), from_t, to_t, loc))

    # -- program ----------------------------------------------------------

    def check(self) -> CheckedProgram:
        for entry in self.table.classes.values():
            self.out.diagnostics.extend(check_variance_positions(self.table, entry))
            self.out.diagnostics.extend(check_inheritance_variance(self.table, entry, self.strict))

        for decl in self.out.program.decls:
            if isinstance(decl, ClassDecl):
                self.check_class_bodies(decl)
            elif isinstance(decl, FunDecl):
                self.check_fun(decl)

        top = _Scope()
        for decl in self.out.program.decls:
            if isinstance(decl, StmtDecl):
                self.check_stmt(decl.stmt, top)
        return self.out

    def check_class_bodies(self, decl: ClassDecl) -> None:
        entry = self.table.classes.get(decl.name)
        if entry is None or entry.decl is not decl:
            return  # duplicate declaration; already reported
        self.current_class = decl.name
        self.type_param_scope = frozenset(p.name for p in decl.type_params)
        for sig in entry.methods.values():
            m = sig.decl
            if m.body is None:
                continue
            scope = _Scope()
            for pname, ptype in zip(sig.param_names, sig.param_types):
                scope.vars[pname] = ptype
            saved = self.return_type
            self.return_type = sig.return_type
            for s in m.body:
                self.check_stmt(s, scope)
            self.return_type = saved
        self.current_class = None
        self.type_param_scope = frozenset()

    def check_fun(self, decl: FunDecl) -> None:
        sig = self.table.functions.get(decl.name)
        if sig is None or sig.is_builtin:
            return
        self.type_param_scope = frozenset(decl.type_params)
        scope = _Scope()
        for pname, ptype in zip(sig.param_names, sig.param_types):
            scope.vars[pname] = ptype
        self.return_type = sig.return_type
        for s in decl.body:
            self.check_stmt(s, scope)
        self.return_type = None
        self.type_param_scope = frozenset()

    # -- statements --------------------------------------------------------

    def check_stmt(self, s: Stmt, scope: _Scope) -> None:
        if isinstance(s, ValDecl):
            declared: TypeRef | None = None
            if s.declared_type is not None:
                declared = self.resolve(s.declared_type, s.loc)
            init_t = self.check_expr(s.init, scope, expected=declared)
            if scope.declared(s.name):
                self.e_type(s.loc, f"redeclaration of {s.name}")
            if declared is not None:
                if not subtype(self.table, init_t, declared):
                    self.e_type(s.loc, f"{init_t.render()} is not a subtype of declared type {declared.render()}")
                else:
                    self.record_coercion("decl", s.init, init_t, declared, s.loc)
                bound = declared
            else:
                bound = init_t
            scope.vars[s.name] = bound
            self.out.decl_types[id(s)] = bound
            return
        if isinstance(s, ExprStmt):
            self.check_expr(s.expr, scope)
            return
        if isinstance(s, Return):
            if self.return_type is None:
                self.e_type(s.loc, "return outside of a function")
                self.check_expr(s.expr, scope)
                return
            t = self.check_expr(s.expr, scope, expected=self.return_type)
            if not subtype(self.table, t, self.return_type):
                self.e_type(s.loc, f"{t.render()} is not a subtype of return type {self.return_type.render()}")
            else:
                self.record_coercion("return", s.expr, t, self.return_type, s.loc)
            return
        if isinstance(s, If):
            cond_t = self.check_expr(s.cond, scope)
            if cond_t != BOOLEAN:
                self.e_type(s.loc, f"condition must be Boolean, got {cond_t.render()}")
            then_scope = _Scope(scope)
            self.apply_narrowing(s.cond, scope, then_scope)
            for inner in s.then_body:
                self.check_stmt(inner, then_scope)
            if s.else_body is not None:
                else_scope = _Scope(scope)
                for inner in s.else_body:
                    self.check_stmt(inner, else_scope)
            return
        raise TypeError(f"unknown statement {s!r}")

    def apply_narrowing(self, cond: Expr, scope: _Scope, branch: _Scope) -> None:
        # Only the `x is T` shape narrows, only for immutable locals and
        # parameters (all miniK bindings are), and never to a wider type.
        if not isinstance(cond, IsExpr) or not isinstance(cond.expr, VarRef):
            return
        current = scope.lookup(cond.expr.name)
        target = self.out.is_targets.get(id(cond))
        if current is None or target is None:
            return
        if subtype(self.table, target, current) and target != current:
            branch.narrowed[cond.expr.name] = target
            self.out.narrowings.append(Narrowing(cond.expr.name, current, target, cond.loc))

    # -- expressions --------------------------------------------------------

    def check_expr(self, e: Expr, scope: _Scope, expected: TypeRef | None = None) -> TypeRef:
        t = self._expr(e, scope, expected)
        self.out.expr_types[id(e)] = t
        return t

    def _expr(self, e: Expr, scope: _Scope, expected: TypeRef | None) -> TypeRef:
        if isinstance(e, IntLit):
            return PrimitiveType("Int")
        if isinstance(e, StringLit):
            return PrimitiveType("String")
        if isinstance(e, VarRef):
            t = scope.lookup(e.name)
            if t is None:
                self.e_type(e.loc, f"unknown name {e.name}")
                return ANY_NULLABLE
            return t
        if isinstance(e, CallExpr):
            return self.check_call(e, scope)
        if isinstance(e, MethodCall):
            return self.check_member_call(e, e.receiver, e.name, e.args, scope, kind="method")
        if isinstance(e, Index):
            return self.check_member_call(e, e.receiver, "get", (e.index,), scope, kind="index-get")
        if isinstance(e, PropertyGet):
            return self.check_property_get(e, scope)
        if isinstance(e, CastExpr):
            return self.check_cast(e, scope, expected)
        if isinstance(e, IsExpr):
            return self.check_is(e, scope)
        raise TypeError(f"unknown expression {e!r}")

    def check_call(self, e: CallExpr, scope: _Scope) -> TypeRef:
        if self.table.has_class(e.name):
            return self.check_ctor(e, scope)
        sig = self.table.functions.get(e.name)
        if sig is None:
            self.e_type(e.loc, f"unknown function {e.name}")
            for a in e.args:
                self.check_expr(a, scope)
            return ANY_NULLABLE
        arg_types = tuple(self.check_expr(a, scope) for a in e.args)
        if len(arg_types) != len(sig.param_types):
            self.e_type(e.loc, f"{e.name} expects {len(sig.param_types)} argument(s), got {len(arg_types)}")
            return ANY_NULLABLE

        bindings: dict[str, TypeRef] = {}
        if sig.type_params:
            if e.type_args is not None:
                if len(e.type_args) != len(sig.type_params):
                    self.e_type(e.loc, f"{e.name} expects {len(sig.type_params)} type argument(s)")
                    return ANY_NULLABLE
                resolved = [self.resolve(t, e.loc) for t in e.type_args]
                if any(t is None for t in resolved):
                    return ANY_NULLABLE
                bindings = dict(zip(sig.type_params, resolved))  # type: ignore[arg-type]
            else:
                inferred = infer_call_type_args(self.table, sig.type_params, sig.param_types, arg_types)
                if isinstance(inferred, str):
                    self.e_type(e.loc, f"{inferred} for call to {e.name}")
                    return ANY_NULLABLE
                bindings = inferred
        elif e.type_args is not None:
            self.e_type(e.loc, f"{e.name} is not generic")
            return ANY_NULLABLE

        param_types = tuple(substitute(t, bindings) for t in sig.param_types)
        return_type = substitute(sig.return_type, bindings)
        for arg, arg_t, want in zip(e.args, arg_types, param_types):
            if not subtype(self.table, arg_t, want):
                self.e_type(arg.loc, f"{arg_t.render()} is not a subtype of parameter type {want.render()}")
            else:
                self.record_coercion("arg", arg, arg_t, want, arg.loc)
        self.out.call_info[id(e)] = CallInfo(
            kind="builtin" if sig.is_builtin else "fun",
            class_name=None,
            declaring_class=None,
            member=e.name,
            type_args=tuple(bindings[p] for p in sig.type_params) if sig.type_params else (),
            type_param_names=sig.type_params,
            declared_params=sig.param_types,
            declared_return=sig.return_type,
            param_types=param_types,
            return_type=return_type,
        )
        return return_type

    def check_ctor(self, e: CallExpr, scope: _Scope) -> TypeRef:
        entry = self.table.classes[e.name]
        for a in e.args:
            self.check_expr(a, scope)
        if entry.is_interface:
            self.e_type(e.loc, f"cannot instantiate interface {e.name}")
            return ANY_NULLABLE
        if entry.ctor_private and self.current_class != e.name:
            self.e_type(e.loc, f"constructor of {e.name} is private")
            return ANY_NULLABLE
        if e.args:
            self.e_type(e.loc, f"constructor of {e.name} takes no arguments")
        args: tuple[TypeRef, ...] = ()
        if entry.type_params:
            if e.type_args is None:
                self.e_type(e.loc, f"constructor of {e.name} needs explicit type arguments")
                return ANY_NULLABLE
            if len(e.type_args) != len(entry.type_params):
                self.e_type(e.loc, f"{e.name} expects {len(entry.type_params)} type argument(s)")
                return ANY_NULLABLE
            resolved = [self.resolve(t, e.loc) for t in e.type_args]
            if any(t is None for t in resolved):
                return ANY_NULLABLE
            args = tuple(resolved)  # type: ignore[arg-type]
        elif e.type_args is not None:
            self.e_type(e.loc, f"{e.name} is not generic")
        result = ClassType(e.name, args)
        self.out.call_info[id(e)] = CallInfo(
            kind="ctor",
            class_name=e.name,
            declaring_class=e.name,
            member=None,
            type_args=args,
            type_param_names=tuple(p.name for p in entry.type_params),
            declared_params=(),
            declared_return=result,
            param_types=(),
            return_type=result,
        )
        return result

    def _find_method(self, cls: ClassType, name: str):
        """Walk the hierarchy for a method; returns (declaring class, sig,
        substituted params, substituted return) or None."""
        entry = self.table.classes.get(cls.name)
        if entry is None or cls.args is None:
            return None
        bindings = {p.name: a for p, a in zip(entry.type_params, cls.args)}
        sig = entry.methods.get(name)
        if sig is not None:
            return (
                entry.name,
                sig,
                tuple(substitute(t, bindings) for t in sig.param_types),
                substitute(sig.return_type, bindings),
            )
        for ref in entry.supertypes:
            sup = substitute(ref.type, bindings)
            assert isinstance(sup, ClassType)
            found = self._find_method(sup, name)
            if found is not None:
                return found
        return None

    def _find_property(self, cls: ClassType, name: str):
        entry = self.table.classes.get(cls.name)
        if entry is None or cls.args is None:
            return None
        bindings = {p.name: a for p, a in zip(entry.type_params, cls.args)}
        sig = entry.properties.get(name)
        if sig is not None:
            return entry.name, sig, substitute(sig.type, bindings)
        for ref in entry.supertypes:
            sup = substitute(ref.type, bindings)
            assert isinstance(sup, ClassType)
            found = self._find_property(sup, name)
            if found is not None:
                return found
        return None

    def check_member_call(self, e: Expr, receiver: Expr, name: str, args: tuple[Expr, ...], scope: _Scope, kind: str) -> TypeRef:
        recv_t = self.check_expr(receiver, scope)
        arg_types = tuple(self.check_expr(a, scope) for a in args)
        if not isinstance(recv_t, ClassType) or recv_t.args is None:
            self.e_type(e.loc, f"{recv_t.render()} has no member {name}")
            return ANY_NULLABLE
        found = self._find_method(recv_t, name)
        if found is None:
            self.e_type(e.loc, f"{recv_t.name} has no method {name}")
            return ANY_NULLABLE
        declaring, sig, param_types, return_type = found
        if len(arg_types) != len(param_types):
            self.e_type(e.loc, f"{recv_t.name}.{name} expects {len(param_types)} argument(s), got {len(arg_types)}")
            return return_type
        for arg, arg_t, want in zip(args, arg_types, param_types):
            if not subtype(self.table, arg_t, want):
                self.e_type(arg.loc, f"{arg_t.render()} is not a subtype of parameter type {want.render()}")
            else:
                self.record_coercion("arg", arg, arg_t, want, arg.loc)
        self.out.call_info[id(e)] = CallInfo(
            kind=kind,
            class_name=recv_t.name,
            declaring_class=declaring,
            member=name,
            type_args=(),
            type_param_names=(),
            declared_params=sig.param_types,
            declared_return=sig.return_type,
            param_types=param_types,
            return_type=return_type,
        )
        return return_type

    def check_property_get(self, e: PropertyGet, scope: _Scope) -> TypeRef:
        recv_t = self.check_expr(e.receiver, scope)
        if not isinstance(recv_t, ClassType) or recv_t.args is None:
            self.e_type(e.loc, f"{recv_t.render()} has no member {e.name}")
            return ANY_NULLABLE
        found = self._find_property(recv_t, e.name)
        if found is None:
            self.e_type(e.loc, f"{recv_t.name} has no property {e.name}")
            return ANY_NULLABLE
        declaring, sig, prop_type = found
        self.out.call_info[id(e)] = CallInfo(
            kind="property-get",
            class_name=recv_t.name,
            declaring_class=declaring,
            member=e.name,
            type_args=(),
            type_param_names=(),
            declared_params=(),
            declared_return=sig.type,
            param_types=(),
            return_type=prop_type,
        )
        return prop_type

    def check_cast(self, e: CastExpr, scope: _Scope, expected: TypeRef | None) -> TypeRef:
        source = self.check_expr(e.expr, scope)
        target = self.resolve(e.target, e.loc, allow_bare=True)
        if target is None:
            return ANY_NULLABLE
        completed = complete_cast_target(self.table, source, target, expected)
        self.out.cast_targets[id(e)] = completed
        classification = classify_cast_baseline(self.table, source, completed)
        self.out.cast_class[id(e)] = classification
        if classification is CastClassification.UNCHECKED_WARNED:
            self.diag(
                warning(
                    "W-UNCHECKED-CAST",
                    e.loc,
                    f"unchecked cast: {source.render()} to {completed.render()}",
                )
            )
        return completed

    def check_is(self, e: IsExpr, scope: _Scope) -> TypeRef:
        source = self.check_expr(e.expr, scope)
        target = self.resolve(e.target, e.loc, allow_bare=True)
        if target is None:
            return BOOLEAN
        completed = complete_cast_target(self.table, source, target, None)
        self.out.is_targets[id(e)] = completed
        erased_error = False
        if isinstance(target, ClassType) and target.args is not None and target.args:
            if any(not isinstance(a, ParamRef) for a in target.args):
                # Concrete type arguments can never be confirmed by the
                # erased runtime, so this check is rejected outright.
                self.diag(
                    error(
                        "E-GENERIC-IS",
                        e.loc,
                        f"cannot check for instance of erased type {target.render()}",
                    )
                )
                erased_error = True
            elif self.strict and isinstance(source, ClassType):
                src_entry = self.table.classes.get(source.name)
                tgt_entry = self.table.classes.get(target.name)
                if (
                    src_entry is not None
                    and tgt_entry is not None
                    and src_entry.is_variant
                    and not tgt_entry.is_variant
                ):
                    self.diag(
                        error(
                            "E-GENERIC-IS",
                            e.loc,
                            f"generic smart cast from variant class {source.name} "
                            f"to non-variant class {target.name} is not allowed in strict mode",
                        )
                    )
                    erased_error = True
        if not erased_error and subtype(self.table, source, completed):
            self.diag(warning("W-REDUNDANT-IS", e.loc, "check for instance is always 'true'"))
        return BOOLEAN


def check_program(table: ClassTable, program: Program, strict: bool = False) -> CheckedProgram:
    """Type-check a program against a built class table.

    Returns the typed program with its diagnostics; `strict` layers the
    opt-in variance rules on top of the baseline behavior.
    """
    return _Checker(table, program, strict).check()
