"""Class table, variance-aware subtyping, supertype instantiation, and LUB.

This module answers only "is S a subtype of T?"; whether a declaration or a
cast is *legal* is the checker's business. The table is immutable once built
and every query here is pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ast import (
    ANY,
    ANY_NULLABLE,
    UNIT,
    ClassDecl,
    ClassType,
    Method,
    NullableTopType,
    ParamRef,
    PrimitiveType,
    Program,
    Property,
    SourceLoc,
    SupertypeRef,
    TopType,
    TypeParam,
    TypeRef,
    Variance,
)
from .diagnostics import Diagnostic, error
from .parser import parse

PRELUDE_FILE = "<prelude>"

# The always-present collection hierarchy: a covariant read-only List with a
# non-variant MutableList below it, plus the backing ArrayList class.
PRELUDE_SOURCE = """\
interface List<out T> {
    fun get(idx: Int): T
    val size: Int
}

interface MutableList<T> : List<T> {
    fun add(elem: T)
    fun set(idx: Int, elem: T)
}

class ArrayList<T> : MutableList<T>
"""

LIST_CLASSES = {"List", "MutableList", "ArrayList"}

_prelude_cache: Program | None = None


def _prelude_program() -> Program:
    # Parsed once; table entries are rebuilt fresh per build, the AST is
    # only ever read.
    global _prelude_cache
    if _prelude_cache is None:
        _prelude_cache = parse(PRELUDE_SOURCE, PRELUDE_FILE)
    return _prelude_cache


@dataclass(frozen=True)
class MethodSig:
    name: str
    param_types: tuple[TypeRef, ...]
    param_names: tuple[str, ...]
    return_type: TypeRef
    decl: Method


@dataclass(frozen=True)
class PropertySig:
    name: str
    type: TypeRef
    mutable: bool
    unsafe_variance: bool


@dataclass(frozen=True)
class FunSig:
    name: str
    type_params: tuple[str, ...]
    param_types: tuple[TypeRef, ...]
    param_names: tuple[str, ...]
    return_type: TypeRef
    is_builtin: bool = False


@dataclass
class ClassEntry:
    name: str
    type_params: tuple[TypeParam, ...]
    is_interface: bool
    is_open: bool
    ctor_private: bool
    supertypes: tuple[SupertypeRef, ...]  # types resolved (ParamRefs bound)
    methods: dict[str, MethodSig]
    properties: dict[str, PropertySig]
    decl: ClassDecl
    is_prelude: bool = False

    @property
    def is_variant(self) -> bool:
        return any(p.variance is not Variance.INV for p in self.type_params)


@dataclass
class ClassTable:
    classes: dict[str, ClassEntry] = field(default_factory=dict)
    functions: dict[str, FunSig] = field(default_factory=dict)

    def entry(self, name: str) -> ClassEntry:
        return self.classes[name]

    def has_class(self, name: str) -> bool:
        return name in self.classes

    def arity(self, name: str) -> int:
        return len(self.classes[name].type_params)

    def prelude_entries(self) -> list[ClassEntry]:
        return [e for e in self.classes.values() if e.is_prelude]

    def user_entries(self) -> list[ClassEntry]:
        return [e for e in self.classes.values() if not e.is_prelude]


BUILTIN_FUNCTIONS = (
    FunSig("mutableListOf", ("T",), (), (), ClassType("MutableList", (ParamRef("T"),)), is_builtin=True),
    FunSig("println", (), (ANY_NULLABLE,), ("message",), UNIT, is_builtin=True),
)


# ============================================================
# TYPE RESOLUTION (syntactic -> semantic references)
# ============================================================


class TypeResolutionError(Exception):
    def __init__(self, message: str, loc: SourceLoc) -> None:
        super().__init__(message)
        self.message = message
        self.loc = loc


def resolve_type(
    table: ClassTable,
    t: TypeRef,
    type_params: frozenset[str],
    loc: SourceLoc,
    allow_bare: bool = False,
) -> TypeRef:
    """Resolve class names and bind type-parameter occurrences.

    Non-generic class references are normalized to empty argument tuples;
    bare generic references survive only where `allow_bare` holds (cast and
    instance-check targets).
    """
    if isinstance(t, (TopType, NullableTopType, PrimitiveType, ParamRef)):
        return t
    if isinstance(t, ClassType):
        if t.name in type_params:
            if t.args is not None:
                raise TypeResolutionError(f"type parameter {t.name} takes no type arguments", loc)
            return ParamRef(t.name)
        if not table.has_class(t.name):
            raise TypeResolutionError(f"unknown type {t.name}", loc)
        arity = table.arity(t.name)
        if t.args is None:
            if arity == 0:
                return ClassType(t.name, ())
            if allow_bare:
                return ClassType(t.name, None)
            raise TypeResolutionError(
                f"{t.name} expects {arity} type argument(s)", loc
            )
        if len(t.args) != arity:
            raise TypeResolutionError(
                f"{t.name} expects {arity} type argument(s), got {len(t.args)}", loc
            )
        args = tuple(resolve_type(table, a, type_params, loc) for a in t.args)
        return ClassType(t.name, args)
    raise TypeResolutionError(f"unsupported type reference {t!r}", loc)


# ============================================================
# TABLE CONSTRUCTION
# ============================================================


def build_class_table(program: Program) -> tuple[ClassTable, list[Diagnostic]]:
    """Build the class table for a program: prelude entries plus user
    declarations, rejecting duplicates, unknown/closed supertypes, arity
    mismatches, and inheritance cycles (all as E-TABLE diagnostics)."""
    table = ClassTable()
    diags: list[Diagnostic] = []
    for sig in BUILTIN_FUNCTIONS:
        table.functions[sig.name] = sig

    _collect_classes(table, _prelude_program(), diags, is_prelude=True)
    _collect_classes(table, program, diags, is_prelude=False)
    _collect_functions(table, program, diags)
    _validate_hierarchy(table, diags)
    _resolve_members(table, diags)
    return table, diags


def _collect_classes(table: ClassTable, program: Program, diags: list[Diagnostic], is_prelude: bool) -> None:
    from .ast import ClassDecl as CD

    for d in program.decls:
        if not isinstance(d, CD):
            continue
        if d.name in table.classes:
            diags.append(error("E-TABLE", d.loc, f"duplicate declaration of type {d.name}"))
            continue
        table.classes[d.name] = ClassEntry(
            name=d.name,
            type_params=d.type_params,
            is_interface=d.is_interface,
            is_open=d.is_open,
            ctor_private=d.ctor_private,
            supertypes=(),  # resolved later
            methods={},
            properties={},
            decl=d,
            is_prelude=is_prelude,
        )


def _collect_functions(table: ClassTable, program: Program, diags: list[Diagnostic]) -> None:
    from .ast import FunDecl as FD

    for d in program.decls:
        if not isinstance(d, FD):
            continue
        if d.name in table.functions:
            diags.append(error("E-TABLE", d.loc, f"duplicate declaration of function {d.name}"))
            continue
        scope = frozenset(d.type_params)
        try:
            param_types = tuple(resolve_type(table, p.type, scope, p.loc) for p in d.params)
            return_type = resolve_type(table, d.return_type, scope, d.loc)
        except TypeResolutionError as e:
            diags.append(error("E-TABLE", e.loc, e.message))
            continue
        table.functions[d.name] = FunSig(
            d.name, d.type_params, param_types, tuple(p.name for p in d.params), return_type
        )


def _validate_hierarchy(table: ClassTable, diags: list[Diagnostic]) -> None:
    for entry in list(table.classes.values()):
        scope = frozenset(p.name for p in entry.type_params)
        resolved: list[SupertypeRef] = []
        class_supers = 0
        for ref in entry.decl.supertypes:
            try:
                t = resolve_type(table, ref.type, scope, ref.loc)
            except TypeResolutionError as e:
                diags.append(error("E-TABLE", e.loc, e.message))
                continue
            if not isinstance(t, ClassType):
                diags.append(error("E-TABLE", ref.loc, f"{t.render()} cannot be used as a supertype"))
                continue
            sup = table.classes.get(t.name)
            if sup is None:
                continue
            if sup.is_interface and ref.has_ctor_call:
                diags.append(error("E-TABLE", ref.loc, f"interface {t.name} has no constructor to call"))
            if not sup.is_interface:
                class_supers += 1
                if not ref.has_ctor_call:
                    diags.append(error("E-TABLE", ref.loc, f"supertype class {t.name} must be initialized: {t.name}()"))
                if not sup.is_open:
                    diags.append(error("E-TABLE", ref.loc, f"class {t.name} is not open and cannot be inherited from"))
                if entry.is_interface:
                    diags.append(error("E-TABLE", ref.loc, f"interface {entry.name} cannot extend class {t.name}"))
            resolved.append(SupertypeRef(t, ref.has_ctor_call, ref.unsafe_variance, ref.loc))
        if class_supers > 1:
            diags.append(error("E-TABLE", entry.decl.loc, f"{entry.name} has more than one class supertype"))
        entry.supertypes = tuple(resolved)

    # Supertype cycles make every other query unreliable; report and cut.
    state: dict[str, int] = {}  # 0=visiting 1=done

    def visit(name: str, origin: ClassEntry) -> bool:
        if state.get(name) == 1:
            return False
        if state.get(name) == 0:
            return True
        state[name] = 0
        cyclic = False
        for ref in table.classes[name].supertypes:
            assert isinstance(ref.type, ClassType)
            if visit(ref.type.name, origin):
                cyclic = True
        state[name] = 1
        return cyclic

    for entry in list(table.classes.values()):
        state.clear()
        if visit(entry.name, entry):
            diags.append(error("E-TABLE", entry.decl.loc, f"inheritance cycle through {entry.name}"))
            entry.supertypes = ()


def _resolve_members(table: ClassTable, diags: list[Diagnostic]) -> None:
    for entry in table.classes.values():
        scope = frozenset(p.name for p in entry.type_params)
        for m in entry.decl.members:
            if isinstance(m, Method):
                if m.name in entry.methods or m.name in entry.properties:
                    diags.append(error("E-TABLE", m.loc, f"duplicate member {entry.name}.{m.name}"))
                    continue
                try:
                    params = tuple(resolve_type(table, p.type, scope, p.loc) for p in m.params)
                    ret = resolve_type(table, m.return_type, scope, m.loc)
                except TypeResolutionError as e:
                    diags.append(error("E-TABLE", e.loc, e.message))
                    continue
                entry.methods[m.name] = MethodSig(m.name, params, tuple(p.name for p in m.params), ret, m)
            else:
                assert isinstance(m, Property)
                if m.name in entry.methods or m.name in entry.properties:
                    diags.append(error("E-TABLE", m.loc, f"duplicate member {entry.name}.{m.name}"))
                    continue
                try:
                    t = resolve_type(table, m.type, scope, m.loc)
                except TypeResolutionError as e:
                    diags.append(error("E-TABLE", e.loc, e.message))
                    continue
                entry.properties[m.name] = PropertySig(m.name, t, m.mutable, m.unsafe_variance)


# ============================================================
# SUBSTITUTION AND SUPERTYPE INSTANTIATION
# ============================================================


def substitute(t: TypeRef, bindings: dict[str, TypeRef]) -> TypeRef:
    if isinstance(t, ParamRef):
        return bindings.get(t.name, t)
    if isinstance(t, ClassType) and t.args:
        return ClassType(t.name, tuple(substitute(a, bindings) for a in t.args))
    return t


def supertype_instantiation(table: ClassTable, t: ClassType, ancestor: str) -> ClassType | None:
    """The instantiation of `ancestor` reached from `t` by substituting type
    arguments up the declared supertypes, or None if `ancestor` is not above
    `t`'s class. E.g. MutableList<A> at List is List<A>."""
    assert t.args is not None, "bare reference has no instantiation"
    if t.name == ancestor:
        return t
    entry = table.classes.get(t.name)
    if entry is None:
        return None
    bindings = {p.name: a for p, a in zip(entry.type_params, t.args)}
    for ref in entry.supertypes:
        sup = substitute(ref.type, bindings)
        assert isinstance(sup, ClassType)
        found = supertype_instantiation(table, sup, ancestor)
        if found is not None:
            return found
    return None


def _args_conform(table: ClassTable, params: tuple[TypeParam, ...], s_args, t_args) -> bool:
    for p, sa, ta in zip(params, s_args, t_args):
        if p.variance is Variance.OUT:
            if not subtype(table, sa, ta):
                return False
        elif p.variance is Variance.IN:
            if not subtype(table, ta, sa):
                return False
        else:
            if sa != ta:  # invariant position: syntactic equality
                return False
    return True


def subtype(table: ClassTable, s: TypeRef, t: TypeRef) -> bool:
    """Variance-aware nominal subtyping.

    Reflexive; everything is below Any?; every non-nullable type is below
    Any; class heads compare per-parameter by declared variance.
    """
    if s == t:
        return True
    if isinstance(t, NullableTopType):
        return True
    if isinstance(s, NullableTopType):
        return False
    if isinstance(t, TopType):
        # Type parameters carry an implicit Any? bound, so they are not
        # known to be below Any.
        return not isinstance(s, ParamRef)
    if isinstance(s, TopType):
        return False
    if isinstance(s, ParamRef) or isinstance(t, ParamRef):
        return False  # equal ParamRefs already matched above
    if isinstance(s, PrimitiveType) or isinstance(t, PrimitiveType):
        return False  # distinct primitives are unrelated
    assert isinstance(s, ClassType) and isinstance(t, ClassType)
    if s.args is None or t.args is None:
        return False
    inst = supertype_instantiation(table, s, t.name)
    if inst is None:
        return False
    entry = table.classes[t.name]
    assert inst.args is not None
    return _args_conform(table, entry.type_params, inst.args, t.args)


def nominal_ancestors(table: ClassTable, t: TypeRef) -> list[TypeRef]:
    """All supertypes of `t` reachable nominally, `t` itself first,
    Any/Any? last. For class types this includes every instantiated
    ancestor up the declared hierarchy."""
    out: list[TypeRef] = []

    def add(x: TypeRef) -> None:
        if x not in out:
            out.append(x)

    if isinstance(t, ClassType) and t.args is not None:
        add(t)
        entry = table.classes.get(t.name)
        if entry is not None:
            bindings = {p.name: a for p, a in zip(entry.type_params, t.args)}
            for ref in entry.supertypes:
                sup = substitute(ref.type, bindings)
                for anc in nominal_ancestors(table, sup):
                    add(anc)
        add(ANY)
        add(ANY_NULLABLE)
        return out
    if isinstance(t, (PrimitiveType, TopType)):
        add(t)
        add(ANY)
        add(ANY_NULLABLE)
        return out
    if isinstance(t, ParamRef):
        add(t)
        add(ANY_NULLABLE)
        return out
    add(ANY_NULLABLE)
    return out


def lub(table: ClassTable, s: TypeRef, t: TypeRef) -> TypeRef:
    """Least upper bound among nominal ancestors.

    Candidates come from both sides' ancestor sets; of the common ones we
    keep the minimal elements and, if that is not a single type, fall back
    to Any (or Any? when one side is nullable).
    """
    candidates = nominal_ancestors(table, s) + nominal_ancestors(table, t)
    common = [c for c in candidates if subtype(table, s, c) and subtype(table, t, c)]
    minimal: list[TypeRef] = []
    for c in common:
        if any(d != c and subtype(table, d, c) for d in common):
            continue
        if c not in minimal:
            minimal.append(c)
    if len(minimal) == 1:
        return minimal[0]
    if subtype(table, s, ANY) and subtype(table, t, ANY):
        return ANY
    return ANY_NULLABLE


def erasure_class(t: TypeRef) -> str | None:
    """The runtime-checkable class of a static type, or None when erasure
    leaves nothing to check (tops, type parameters)."""
    if isinstance(t, ClassType):
        return t.name
    if isinstance(t, PrimitiveType):
        return t.kind
    return None
