"""miniK abstract syntax tree.

Every node carries a 1-based source location. Locations are excluded from
structural equality so that parse/pretty-print round trips compare cleanly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


@dataclass(frozen=True)
class SourceLoc:
    file: str
    line: int  # 1-based
    col: int  # 1-based

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}"


class Variance(Enum):
    OUT = "out"
    IN = "in"
    INV = ""

    def keyword(self) -> str:
        return self.value


# ============================================================
# TYPE REFERENCES
#
# Shared between the syntax and the type system. A ClassType with
# args=None is a *bare* reference (`as MutableList`); the checker
# completes or rejects it depending on position.
# ============================================================


@dataclass(frozen=True)
class TypeRef:
    """Base for static type references. Abstract."""

    def render(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class ClassType(TypeRef):
    name: str
    args: tuple[TypeRef, ...] | None = None

    def render(self) -> str:
        if self.args is None or not self.args:
            return self.name
        return f"{self.name}<{', '.join(a.render() for a in self.args)}>"


@dataclass(frozen=True)
class ParamRef(TypeRef):
    """Occurrence of a type parameter inside its binding declaration."""

    name: str

    def render(self) -> str:
        return self.name


@dataclass(frozen=True)
class TopType(TypeRef):
    """`Any`: supertype of every non-nullable type."""

    def render(self) -> str:
        return "Any"


@dataclass(frozen=True)
class NullableTopType(TypeRef):
    """`Any?`: the single top above everything, including `Any`."""

    def render(self) -> str:
        return "Any?"


@dataclass(frozen=True)
class PrimitiveType(TypeRef):
    kind: str  # "Int" | "String" | "Unit" | "Boolean"

    def render(self) -> str:
        return self.kind


ANY = TopType()
ANY_NULLABLE = NullableTopType()
INT = PrimitiveType("Int")
STRING = PrimitiveType("String")
UNIT = PrimitiveType("Unit")
# `Boolean` is the static type of `is` expressions. It is not nameable in
# the surface grammar; it only arises from checking.
BOOLEAN = PrimitiveType("Boolean")


# ============================================================
# EXPRESSIONS
# ============================================================


@dataclass
class Expr:
    pass


@dataclass
class IntLit(Expr):
    value: int
    loc: SourceLoc = field(compare=False, repr=False)


@dataclass
class StringLit(Expr):
    value: str
    loc: SourceLoc = field(compare=False, repr=False)


@dataclass
class VarRef(Expr):
    name: str
    loc: SourceLoc = field(compare=False, repr=False)


@dataclass
class CallExpr(Expr):
    """`name[<T,...>](args)`: a function call or a constructor call.

    The two forms are syntactically identical; the checker resolves which
    one it is from the class table.
    """

    name: str
    type_args: tuple[TypeRef, ...] | None
    args: tuple[Expr, ...]
    loc: SourceLoc = field(compare=False, repr=False)


@dataclass
class MethodCall(Expr):
    receiver: Expr
    name: str
    args: tuple[Expr, ...]
    loc: SourceLoc = field(compare=False, repr=False)


@dataclass
class PropertyGet(Expr):
    receiver: Expr
    name: str
    loc: SourceLoc = field(compare=False, repr=False)


@dataclass
class Index(Expr):
    """`receiver[index]`; checked as a call to `get`."""

    receiver: Expr
    index: Expr
    loc: SourceLoc = field(compare=False, repr=False)


@dataclass
class CastExpr(Expr):
    """`expr as Target`; `target` may be a bare generic class reference."""

    expr: Expr
    target: TypeRef
    loc: SourceLoc = field(compare=False, repr=False)


@dataclass
class IsExpr(Expr):
    expr: Expr
    target: TypeRef
    loc: SourceLoc = field(compare=False, repr=False)


# ============================================================
# STATEMENTS
# ============================================================


@dataclass
class Stmt:
    pass


@dataclass
class ValDecl(Stmt):
    name: str
    declared_type: TypeRef | None
    init: Expr
    loc: SourceLoc = field(compare=False, repr=False)


@dataclass
class ExprStmt(Stmt):
    expr: Expr
    loc: SourceLoc = field(compare=False, repr=False)


@dataclass
class Return(Stmt):
    expr: Expr
    loc: SourceLoc = field(compare=False, repr=False)


@dataclass
class If(Stmt):
    cond: Expr
    then_body: tuple[Stmt, ...]
    else_body: tuple[Stmt, ...] | None
    loc: SourceLoc = field(compare=False, repr=False)


# ============================================================
# DECLARATIONS
# ============================================================


@dataclass
class TypeParam:
    name: str
    variance: Variance
    loc: SourceLoc = field(compare=False, repr=False)


@dataclass
class SupertypeRef:
    """One entry of a declaration's supertype list.

    `has_ctor_call` distinguishes `B()` (class supertype) from `List<T>`
    (interface supertype). `unsafe_variance` is the `@UnsafeVariance`
    acknowledgement on the reference itself.
    """

    type: TypeRef
    has_ctor_call: bool
    unsafe_variance: bool
    loc: SourceLoc = field(compare=False, repr=False)


@dataclass
class Param:
    name: str
    type: TypeRef
    loc: SourceLoc = field(compare=False, repr=False)


@dataclass
class Method:
    name: str
    params: tuple[Param, ...]
    return_type: TypeRef
    body: tuple[Stmt, ...] | None  # None = abstract (interface member)
    loc: SourceLoc = field(compare=False, repr=False)


@dataclass
class Property:
    name: str
    type: TypeRef
    mutable: bool  # var vs val
    unsafe_variance: bool  # @UnsafeVariance on the property type
    loc: SourceLoc = field(compare=False, repr=False)


Member = Method | Property


@dataclass
class Decl:
    pass


@dataclass
class ClassDecl(Decl):
    name: str
    type_params: tuple[TypeParam, ...]
    is_interface: bool
    is_open: bool
    ctor_private: bool
    supertypes: tuple[SupertypeRef, ...]
    members: tuple[Member, ...]
    loc: SourceLoc = field(compare=False, repr=False)


@dataclass
class FunDecl(Decl):
    name: str
    type_params: tuple[str, ...]
    params: tuple[Param, ...]
    return_type: TypeRef
    body: tuple[Stmt, ...]
    loc: SourceLoc = field(compare=False, repr=False)


@dataclass
class StmtDecl(Decl):
    stmt: Stmt
    loc: SourceLoc = field(compare=False, repr=False)


@dataclass
class Program:
    decls: tuple[Decl, ...]


def walk_exprs(e: Expr):
    """Yield `e` and every sub-expression, preorder."""
    yield e
    if isinstance(e, CallExpr):
        for a in e.args:
            yield from walk_exprs(a)
    elif isinstance(e, MethodCall):
        yield from walk_exprs(e.receiver)
        for a in e.args:
            yield from walk_exprs(a)
    elif isinstance(e, PropertyGet):
        yield from walk_exprs(e.receiver)
    elif isinstance(e, Index):
        yield from walk_exprs(e.receiver)
        yield from walk_exprs(e.index)
    elif isinstance(e, (CastExpr, IsExpr)):
        yield from walk_exprs(e.expr)


def walk_stmts(stmts):
    """Yield every statement in a body, preorder, descending into ifs."""
    for s in stmts:
        yield s
        if isinstance(s, If):
            yield from walk_stmts(s.then_body)
            if s.else_body is not None:
                yield from walk_stmts(s.else_body)
