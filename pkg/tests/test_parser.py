from __future__ import annotations

import pytest

from minik import corpus
from minik.ast import (
    CastExpr,
    ClassDecl,
    ClassType,
    ExprStmt,
    FunDecl,
    Program,
    SourceLoc,
    StmtDecl,
    ValDecl,
    VarRef,
    walk_exprs,
)
from minik.parser import ParseError, parse
from minik.printer import pretty_print, render_expr


def test_single_open_class():
    p = parse("open class B")
    assert len(p.decls) == 1
    d = p.decls[0]
    assert isinstance(d, ClassDecl)
    assert d.name == "B"
    assert d.is_open
    assert not d.is_interface
    assert d.members == ()
    assert d.supertypes == ()


def test_empty_source_is_empty_program():
    assert parse("") == Program(())
    assert parse("\n\n// just a comment\n") == Program(())


def test_main_corpus_program_decl_shape():
    src = corpus.BY_ID["P1"].source()
    p = parse(src, "P1.mk")
    classes = [d for d in p.decls if isinstance(d, ClassDecl)]
    funs = [d for d in p.decls if isinstance(d, FunDecl)]
    stmts = [d for d in p.decls if isinstance(d, StmtDecl)]
    assert [c.name for c in classes] == ["B", "A"]
    assert [f.name for f in funs] == ["getA"]
    assert len(stmts) == 1
    a = classes[1]
    assert a.ctor_private
    assert len(a.supertypes) == 1 and a.supertypes[0].has_ctor_call
    body = funs[0].body
    assert len(body) == 6  # four vals, the mutation call, the return
    assert sum(isinstance(s, ValDecl) for s in body) == 4


def test_bare_cast_target_prints_without_arguments():
    src = "val downcast = covariance as MutableList\n"
    p = parse(src)
    stmt = p.decls[0].stmt
    assert isinstance(stmt, ValDecl)
    cast = stmt.init
    assert isinstance(cast, CastExpr)
    assert cast.target == ClassType("MutableList", None)
    assert render_expr(cast) == "covariance as MutableList"


def test_declaration_may_wrap_after_equals():
    wrapped = "val downcast: MutableList<B> =\n        covariance as MutableList\n"
    flat = "val downcast: MutableList<B> = covariance as MutableList\n"
    assert parse(wrapped) == parse(flat)


@pytest.mark.parametrize("entry", corpus.ENTRIES, ids=lambda e: e.id)
def test_corpus_round_trips(entry):
    p = parse(entry.source(), entry.filename)
    printed = pretty_print(p)
    assert parse(printed, entry.filename) == p


def test_prelude_round_trips():
    from minik.typesys import PRELUDE_SOURCE

    p = parse(PRELUDE_SOURCE, "<prelude>")
    assert parse(pretty_print(p), "<prelude>") == p
    names = [d.name for d in p.decls if isinstance(d, ClassDecl)]
    assert names == ["List", "MutableList", "ArrayList"]


@pytest.mark.parametrize("entry", corpus.ENTRIES, ids=lambda e: e.id)
def test_corpus_locations_within_bounds(entry):
    src = entry.source()
    lines = src.split("\n")
    p = parse(src, entry.filename)

    def assert_loc(loc: SourceLoc):
        assert 1 <= loc.line <= len(lines)
        assert 1 <= loc.col <= len(lines[loc.line - 1]) + 1

    for d in p.decls:
        assert_loc(d.loc)
        if isinstance(d, StmtDecl):
            for e in _stmt_exprs(d.stmt):
                assert_loc(e.loc)
        if isinstance(d, FunDecl):
            for s in d.body:
                assert_loc(s.loc)


def _stmt_exprs(s):
    from minik.ast import If, Return

    if isinstance(s, ValDecl):
        yield from walk_exprs(s.init)
    elif isinstance(s, ExprStmt):
        yield from walk_exprs(s.expr)
    elif isinstance(s, Return):
        yield from walk_exprs(s.expr)
    elif isinstance(s, If):
        yield from walk_exprs(s.cond)
        for inner in s.then_body + (s.else_body or ()):
            yield from _stmt_exprs(inner)


@pytest.mark.parametrize(
    "source",
    [
        "val x =",
        "class class",
        'val s = "unterminated',
        "val if = 1",
        "fun f(x) {}",
        "class C<out> {}",
        "fun g<out T>() {}",
        "var y = 1",
    ],
)
def test_malformed_input_raises_with_location(source):
    with pytest.raises(ParseError) as exc:
        parse(source, "bad.mk")
    assert exc.value.loc.file == "bad.mk"
    assert exc.value.loc.line >= 1


def test_method_call_chain_and_index():
    p = parse("getA().secretMethod()\nxs[0]\n")
    first, second = (d.stmt.expr for d in p.decls)
    assert render_expr(first) == "getA().secretMethod()"
    assert render_expr(second) == "xs[0]"
    assert isinstance(second.receiver, VarRef)


def test_string_escapes_round_trip():
    src = 'val s = "a\\"b\\\\c\\nd"\n'
    p = parse(src)
    assert p.decls[0].stmt.init.value == 'a"b\\c\nd'
    assert parse(pretty_print(p)) == p
