from __future__ import annotations

import pytest

from minik import corpus
from minik.ast import ClassType, PrimitiveType
from minik.cli import build
from minik.runtime import (
    ERASED,
    REIFIED,
    ClassCastException,
    Completed,
    ListValue,
    ObjectValue,
    Rtti,
    RuntimeFault,
    StringValue,
    checkcast_sites,
    class_conforms,
    erased_instance_check,
    run_program,
)
from minik.typesys import build_class_table
from minik.parser import parse


def t(name: str, *args) -> ClassType:
    return ClassType(name, tuple(args))


def run_entry(entry_id: str, mode: str, eager: bool = False):
    entry = corpus.BY_ID[entry_id]
    checked, diags = build(entry.source(), entry.filename)
    assert checked is not None and checked.ok, [d.render() for d in diags]
    return run_program(checked, mode, eager_checkcast=eager)


def build_src(source: str, filename: str = "test.mk"):
    checked, diags = build(source, filename)
    assert checked is not None and checked.ok, [d.render() for d in diags]
    return checked


# ============================================================
# THE MAIN PROGRAM
# ============================================================


def test_erased_crash_happens_at_the_use_site():
    outcome = run_entry("P1", ERASED)
    assert isinstance(outcome, ClassCastException)
    assert (outcome.actual, outcome.expected) == ("B", "A")
    assert (outcome.loc.line, outcome.loc.col) == (17, 1)


def test_reified_crash_happens_at_the_downcast():
    outcome = run_entry("P1", REIFIED)
    assert isinstance(outcome, ClassCastException)
    assert outcome.actual == "MutableList<A>"
    assert outcome.expected == "MutableList<B>"
    assert outcome.loc.line == 12


def test_reified_crash_is_strictly_earlier_in_program_order():
    erased = run_entry("P1", ERASED)
    reified = run_entry("P1", REIFIED)
    assert (reified.loc.line, reified.loc.col) < (erased.loc.line, erased.loc.col)


def test_eager_checkcast_moves_the_crash_to_the_extraction():
    eager = run_entry("P1", ERASED, eager=True)
    lazy = run_entry("P1", ERASED)
    assert isinstance(eager, ClassCastException)
    assert eager.loc.line == 14  # the element read inside the return
    assert (eager.loc.line, eager.loc.col) < (lazy.loc.line, lazy.loc.col)


def test_printing_through_any_parameter_does_not_crash():
    src = corpus.BY_ID["P1"].source().replace("getA().secretMethod()", "println(getA())")
    checked = build_src(src, "P1println.mk")
    outcome = run_program(checked, ERASED)
    assert isinstance(outcome, Completed)
    assert outcome.stdout == "<B@2>\n"  # list is allocation 1, the B object 2


# ============================================================
# CHECKCAST SITES
# ============================================================


def sites_by_line(entry_id: str):
    entry = corpus.BY_ID[entry_id]
    checked, _ = build(entry.source(), entry.filename)
    return {(s.loc.line, s.reason) for s in checkcast_sites(checked)}


def test_declaration_sites_are_emitted():
    assert (20, "explicit-decl") in sites_by_line("P4.2")
    assert (20, "implicit-decl") in sites_by_line("P4.3")


def test_instance_checks_and_any_arguments_get_no_site():
    assert not any(line == 20 for line, _ in sites_by_line("P4.4"))
    assert not any(line == 20 for line, _ in sites_by_line("P4.5"))


def test_type_parameter_reads_are_not_rechecked_at_returns():
    entry = corpus.BY_ID["P1"]
    checked, _ = build(entry.source(), entry.filename)
    locs = {(s.loc.line, s.reason) for s in checkcast_sites(checked)}
    assert (14, "receiver") in locs  # the list.get receiver is verified
    assert (14, "return-value") not in locs  # the erased element is not
    assert (17, "receiver") in locs


def test_full_matrix_static_and_dynamic():
    for entry in corpus.ENTRIES:
        row = entry.matrix
        if row is None:
            continue
        checked, _ = build(entry.source(), entry.filename)
        placed = {
            (s.loc.line, s.reason) for s in checkcast_sites(checked) if s.loc.line == row.line
        }
        if row.site_reason is None:
            assert placed == set(), (entry.id, placed)
        else:
            assert (row.line, row.site_reason) in placed, (entry.id, placed)
        outcome = run_program(checked, ERASED)
        assert isinstance(outcome, ClassCastException) == row.crashes, entry.id


# ============================================================
# INSTANCE CHECKS AND ALIASING
# ============================================================


def test_erased_instance_check_ignores_type_arguments():
    table, _ = build_class_table(parse(""))
    strings = ListValue(Rtti("MutableList", None), 1, [StringValue("x")])
    assert erased_instance_check(table, strings, t("List", PrimitiveType("Int")))


def test_erased_instance_check_uses_the_value_class():
    table, _ = build_class_table(parse("open class B\n\nclass A private constructor() : B()\n"))
    a_value = ObjectValue(Rtti("A", None), 1)
    b_value = ObjectValue(Rtti("B", None), 2)
    assert erased_instance_check(table, a_value, t("A"))
    assert erased_instance_check(table, a_value, t("B"))
    assert not erased_instance_check(table, b_value, t("A"))
    assert class_conforms(table, "A", "B")


def test_completed_outcome_carries_the_final_value():
    outcome = run_program(build_src("val n = 1\nprintln(n)\nn\n"), ERASED)
    assert isinstance(outcome, Completed)
    assert outcome.value is not None and outcome.value.value == 1


def test_mutation_in_the_unsound_chain_is_shared():
    src = corpus.BY_ID["P1"].source().replace(
        "    return list[0]", "    println(list.size)\n    return list[0]"
    )
    checked, _ = build(src, "P1size.mk")
    outcome = run_program(checked, ERASED)
    # The add went through the downcast alias; the original list sees it.
    assert outcome.stdout == "1\n"


def test_mutation_is_visible_through_the_original_alias():
    src = (
        "open class B\n\n"
        "fun f() {\n"
        "    val original = mutableListOf<B>()\n"
        "    val alias: MutableList<B> = original\n"
        "    alias.add(B())\n"
        "    println(original.size)\n"
        "}\n\n"
        "f()\n"
    )
    outcome = run_program(build_src(src), ERASED)
    assert isinstance(outcome, Completed)
    assert outcome.stdout == "1\n"


def test_redundant_check_still_evaluates_to_false_after_mutation():
    src = corpus.BY_ID["P1"].source().replace(
        "    return list[0]", "    println(list[0] is A)\n    return list[0]"
    )
    checked, diags = build(src, "P1check.mk")
    assert checked is not None and checked.ok
    assert any(d.code == "W-REDUNDANT-IS" for d in diags)
    outcome = run_program(checked, ERASED)
    assert outcome.stdout == "false\n"
    assert isinstance(outcome, ClassCastException)


# ============================================================
# MODE RELATIONSHIPS
# ============================================================


def test_reified_never_completes_where_erased_crashes():
    for entry in corpus.ENTRIES:
        checked, diags = build(entry.source(), entry.filename)
        if checked is None or not checked.ok:
            continue
        erased = run_program(checked, ERASED)
        if isinstance(erased, ClassCastException):
            reified = run_program(checked, REIFIED)
            assert isinstance(reified, ClassCastException), entry.id


def test_reified_instance_check_compares_arguments():
    outcome = run_entry("P5", REIFIED)
    # The reified check answers false, the element is never added, and the
    # final read faults on the still-empty list.
    assert isinstance(outcome, RuntimeFault)
    assert "string" not in outcome.stdout


def test_erased_smart_cast_lets_the_string_through():
    outcome = run_entry("P5", ERASED)
    assert isinstance(outcome, Completed)
    assert outcome.stdout == "string\n"


def test_list_set_replaces_in_place():
    src = (
        "fun f() {\n"
        "    val l = mutableListOf<Int>()\n"
        "    l.add(1)\n"
        "    l.set(0, 2)\n"
        "    println(l[0])\n"
        "    println(l.size)\n"
        "}\n\n"
        "f()\n"
    )
    outcome = run_program(build_src(src), ERASED)
    assert isinstance(outcome, Completed)
    assert outcome.stdout == "2\n1\n"


def test_array_list_constructs_a_list_value():
    src = "val l = ArrayList<Int>()\nl.add(7)\nprintln(l[0])\n"
    outcome = run_program(build_src(src), ERASED)
    assert isinstance(outcome, Completed)
    assert outcome.stdout == "7\n"


def test_run_refuses_programs_with_errors():
    checked, diags = build(corpus.BY_ID["P3a"].source(), "P3a.mk")
    assert checked is not None and not checked.ok
    with pytest.raises(ValueError):
        run_program(checked, ERASED)
