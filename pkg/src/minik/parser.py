"""Recursive-descent parser for miniK.

The grammar is a strict Kotlin subset: class/interface/fun declarations with
declaration-site variance marks, newline-terminated statements, and a small
expression language (calls, indexing, `as`, `is`). Function and constructor
calls share one syntactic form; the checker tells them apart.
"""

from __future__ import annotations

from .ast import (
    ANY,
    ANY_NULLABLE,
    INT,
    STRING,
    UNIT,
    CallExpr,
    CastExpr,
    ClassDecl,
    ClassType,
    Decl,
    Expr,
    ExprStmt,
    FunDecl,
    If,
    Index,
    IntLit,
    IsExpr,
    Member,
    Method,
    MethodCall,
    Param,
    Program,
    Property,
    PropertyGet,
    Return,
    SourceLoc,
    Stmt,
    StmtDecl,
    StringLit,
    SupertypeRef,
    TypeParam,
    TypeRef,
    ValDecl,
    VarRef,
    Variance,
)
from .lexer import KEYWORDS, LexError, Token, tokenize

_BUILTIN_TYPES = {"Int": INT, "String": STRING, "Unit": UNIT}


class ParseError(Exception):
    def __init__(self, message: str, loc: SourceLoc) -> None:
        super().__init__(f"{loc}: {message}")
        self.message = message
        self.loc = loc


class _Parser:
    def __init__(self, tokens: list[Token]) -> None:
        self.tokens = tokens
        self.pos = 0

    # -- token plumbing ------------------------------------------------

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def error(self, expected: str) -> ParseError:
        got = self.cur.kind if self.cur.kind != "name" else f"'{self.cur.text}'"
        if got == "newline":
            got = "end of line"
        return ParseError(f"expected {expected}, got {got}", self.cur.loc)

    def advance(self) -> Token:
        t = self.cur
        if t.kind != "eof":
            self.pos += 1
        return t

    def at(self, kind: str) -> bool:
        return self.cur.kind == kind

    def at_word(self, word: str) -> bool:
        return self.cur.kind == "name" and self.cur.text == word

    def eat(self, kind: str, expected: str | None = None) -> Token:
        if not self.at(kind):
            raise self.error(expected or f"'{kind}'")
        return self.advance()

    def eat_word(self, word: str) -> Token:
        if not self.at_word(word):
            raise self.error(f"'{word}'")
        return self.advance()

    def eat_ident(self) -> Token:
        if self.cur.kind != "name":
            raise self.error("an identifier")
        if self.cur.text in KEYWORDS:
            raise ParseError(f"'{self.cur.text}' is a keyword", self.cur.loc)
        return self.advance()

    def skip_newlines(self) -> None:
        while self.at("newline"):
            self.advance()

    def end_of_stmt(self) -> None:
        if self.at("newline"):
            self.advance()
            return
        if self.at("}") or self.at("eof"):
            return
        raise self.error("end of statement")

    # -- types ---------------------------------------------------------

    def parse_type(self) -> TypeRef:
        tok = self.eat("name", "a type name")
        name = tok.text
        if name in KEYWORDS:
            raise ParseError(f"'{name}' is a keyword, not a type", tok.loc)
        if name == "Any":
            if self.at("?"):
                self.advance()
                return ANY_NULLABLE
            return ANY
        if name in _BUILTIN_TYPES:
            return _BUILTIN_TYPES[name]
        if self.at("<"):
            self.advance()
            args = [self.parse_type()]
            while self.at(","):
                self.advance()
                args.append(self.parse_type())
            self.eat(">", "'>' to close type arguments")
            return ClassType(name, tuple(args))
        return ClassType(name, None)

    # -- declarations ----------------------------------------------------

    def parse_program(self) -> Program:
        decls: list[Decl] = []
        self.skip_newlines()
        while not self.at("eof"):
            decls.append(self.parse_decl())
            self.skip_newlines()
        return Program(tuple(decls))

    def parse_decl(self) -> Decl:
        if self.at_word("open") or self.at_word("class"):
            return self.parse_class(is_interface=False)
        if self.at_word("interface"):
            return self.parse_class(is_interface=True)
        if self.at_word("fun"):
            return self.parse_fun()
        stmt = self.parse_stmt()
        return StmtDecl(stmt, loc=stmt.loc)

    def parse_class(self, is_interface: bool) -> ClassDecl:
        start = self.cur.loc
        is_open = False
        if self.at_word("open"):
            self.advance()
            is_open = True
        if is_interface:
            self.eat_word("interface")
            is_open = True  # interfaces are always extendable
        else:
            self.eat_word("class")
        name = self.eat_ident().text
        type_params = self.parse_type_params() if self.at("<") else ()
        ctor_private = False
        if self.at_word("private"):
            self.advance()
            self.eat_word("constructor")
            self.eat("(")
            self.eat(")")
            ctor_private = True
        supertypes: tuple[SupertypeRef, ...] = ()
        if self.at(":"):
            self.advance()
            supertypes = self.parse_supertypes()
        members: tuple[Member, ...] = ()
        if self.at("{"):
            members = self.parse_members()
        return ClassDecl(
            name=name,
            type_params=type_params,
            is_interface=is_interface,
            is_open=is_open,
            ctor_private=ctor_private,
            supertypes=supertypes,
            members=members,
            loc=start,
        )

    def parse_type_params(self) -> tuple[TypeParam, ...]:
        self.eat("<")
        params = [self.parse_type_param()]
        while self.at(","):
            self.advance()
            params.append(self.parse_type_param())
        self.eat(">", "'>' to close type parameters")
        return tuple(params)

    def parse_type_param(self) -> TypeParam:
        loc = self.cur.loc
        variance = Variance.INV
        if self.at_word("out"):
            self.advance()
            variance = Variance.OUT
        elif self.at_word("in"):
            self.advance()
            variance = Variance.IN
        name = self.eat_ident().text
        return TypeParam(name, variance, loc)

    def parse_supertypes(self) -> tuple[SupertypeRef, ...]:
        refs = [self.parse_supertype()]
        while self.at(","):
            self.advance()
            refs.append(self.parse_supertype())
        return tuple(refs)

    def parse_supertype(self) -> SupertypeRef:
        loc = self.cur.loc
        unsafe = False
        if self.at("@UnsafeVariance"):
            self.advance()
            unsafe = True
        t = self.parse_type()
        has_ctor_call = False
        if self.at("("):
            self.advance()
            self.eat(")", "')' (supertype constructor calls take no arguments)")
            has_ctor_call = True
        return SupertypeRef(t, has_ctor_call, unsafe, loc)

    def parse_members(self) -> tuple[Member, ...]:
        self.eat("{")
        self.skip_newlines()
        members: list[Member] = []
        while not self.at("}"):
            if self.at_word("fun"):
                members.append(self.parse_method())
            elif self.at_word("val") or self.at_word("var"):
                members.append(self.parse_property())
            else:
                raise self.error("a member ('fun', 'val' or 'var') or '}'")
            self.skip_newlines()
        self.eat("}")
        return tuple(members)

    def parse_method(self) -> Method:
        loc = self.eat_word("fun").loc
        name = self.eat_ident().text
        if self.at("<"):
            raise ParseError("methods cannot declare type parameters", self.cur.loc)
        params = self.parse_params()
        return_type: TypeRef = UNIT
        if self.at(":"):
            self.advance()
            return_type = self.parse_type()
        body: tuple[Stmt, ...] | None = None
        if self.at("{"):
            body = self.parse_block()
        return Method(name, params, return_type, body, loc)

    def parse_property(self) -> Property:
        tok = self.advance()  # val | var
        mutable = tok.text == "var"
        name = self.eat_ident().text
        self.eat(":", "':' before the property type")
        unsafe = False
        if self.at("@UnsafeVariance"):
            self.advance()
            unsafe = True
        t = self.parse_type()
        return Property(name, t, mutable, unsafe, tok.loc)

    def parse_fun(self) -> FunDecl:
        loc = self.eat_word("fun").loc
        name = self.eat_ident().text
        type_params: tuple[str, ...] = ()
        if self.at("<"):
            self.advance()
            names = []
            while True:
                if self.at_word("out") or self.at_word("in"):
                    raise ParseError(
                        "variance marks are only allowed on class type parameters",
                        self.cur.loc,
                    )
                names.append(self.eat_ident().text)
                if not self.at(","):
                    break
                self.advance()
            self.eat(">", "'>' to close type parameters")
            type_params = tuple(names)
        params = self.parse_params()
        return_type: TypeRef = UNIT
        if self.at(":"):
            self.advance()
            return_type = self.parse_type()
        body = self.parse_block()
        return FunDecl(name, type_params, params, return_type, body, loc)

    def parse_params(self) -> tuple[Param, ...]:
        self.eat("(")
        params: list[Param] = []
        while not self.at(")"):
            if params:
                self.eat(",", "',' between parameters")
            tok = self.eat_ident()
            self.eat(":", "':' before the parameter type")
            t = self.parse_type()
            params.append(Param(tok.text, t, tok.loc))
        self.eat(")")
        return tuple(params)

    # -- statements ------------------------------------------------------

    def parse_block(self) -> tuple[Stmt, ...]:
        self.eat("{")
        self.skip_newlines()
        stmts: list[Stmt] = []
        while not self.at("}"):
            stmts.append(self.parse_stmt())
            self.skip_newlines()
        self.eat("}")
        return tuple(stmts)

    def parse_stmt(self) -> Stmt:
        if self.at_word("val"):
            loc = self.advance().loc
            name = self.eat_ident().text
            declared: TypeRef | None = None
            if self.at(":"):
                self.advance()
                declared = self.parse_type()
            self.eat("=", "'=' (vals must be initialized)")
            init = self.parse_expr()
            self.end_of_stmt()
            return ValDecl(name, declared, init, loc)
        if self.at_word("var"):
            raise ParseError("mutable locals are not supported; use 'val'", self.cur.loc)
        if self.at_word("return"):
            loc = self.advance().loc
            expr = self.parse_expr()
            self.end_of_stmt()
            return Return(expr, loc)
        if self.at_word("if"):
            return self.parse_if()
        expr = self.parse_expr()
        self.end_of_stmt()
        return ExprStmt(expr, loc=expr_loc(expr))

    def parse_if(self) -> If:
        loc = self.eat_word("if").loc
        self.eat("(", "'(' after 'if'")
        cond = self.parse_expr()
        self.eat(")", "')' after the condition")
        then_body = self.parse_block()
        else_body: tuple[Stmt, ...] | None = None
        save = self.pos
        self.skip_newlines()
        if self.at_word("else"):
            self.advance()
            else_body = self.parse_block()
        else:
            self.pos = save
        stmt = If(cond, then_body, else_body, loc)
        self.end_of_stmt()
        return stmt

    # -- expressions -----------------------------------------------------

    def parse_expr(self) -> Expr:
        e = self.parse_postfix()
        while self.at_word("as") or self.at_word("is"):
            tok = self.advance()
            target = self.parse_type()
            if tok.text == "as":
                e = CastExpr(e, target, tok.loc)
            else:
                e = IsExpr(e, target, tok.loc)
        return e

    def parse_postfix(self) -> Expr:
        e = self.parse_primary()
        while True:
            if self.at("."):
                self.advance()
                name = self.eat_ident()
                if self.at("("):
                    args = self.parse_args()
                    e = MethodCall(e, name.text, args, loc=expr_loc(e))
                else:
                    e = PropertyGet(e, name.text, loc=expr_loc(e))
            elif self.at("["):
                self.advance()
                idx = self.parse_expr()
                self.eat("]", "']' to close indexing")
                e = Index(e, idx, loc=expr_loc(e))
            else:
                return e

    def parse_primary(self) -> Expr:
        if self.at("int"):
            tok = self.advance()
            return IntLit(int(tok.text), tok.loc)
        if self.at("string"):
            tok = self.advance()
            return StringLit(tok.text, tok.loc)
        if self.cur.kind == "name":
            if self.cur.text in KEYWORDS:
                raise self.error("an expression")
            tok = self.advance()
            type_args: tuple[TypeRef, ...] | None = None
            if self.at("<"):
                self.advance()
                args = [self.parse_type()]
                while self.at(","):
                    self.advance()
                    args.append(self.parse_type())
                self.eat(">", "'>' to close type arguments")
                type_args = tuple(args)
                call_args = self.parse_args()
                return CallExpr(tok.text, type_args, call_args, tok.loc)
            if self.at("("):
                call_args = self.parse_args()
                return CallExpr(tok.text, None, call_args, tok.loc)
            return VarRef(tok.text, tok.loc)
        raise self.error("an expression")

    def parse_args(self) -> tuple[Expr, ...]:
        self.eat("(")
        args: list[Expr] = []
        while not self.at(")"):
            if args:
                self.eat(",", "',' between arguments")
            args.append(self.parse_expr())
        self.eat(")")
        return tuple(args)


def expr_loc(e: Expr) -> SourceLoc:
    return e.loc  # every Expr dataclass carries loc


def parse(source: str, file: str = "<input>") -> Program:
    """Parse miniK source text into a Program.

    Raises ParseError (or LexError) with a location on malformed input.
    """
    try:
        tokens = tokenize(source, file)
    except LexError as e:
        raise ParseError(e.message, e.loc) from None
    return _Parser(tokens).parse_program()
