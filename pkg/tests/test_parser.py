from __future__ import annotations

import pytest
from hypothesis import HealthCheck, given, settings

from strategies import formulas, terms, types
from tset.ast import (
    EMPTY,
    INT,
    And,
    Atom,
    Atomic,
    Basic,
    C,
    Dec,
    DecPPType,
    DecPType,
    Enum,
    IntLit,
    IntOp,
    Interval,
    Or,
    Pair,
    Prod,
    SetType,
    Tagged,
    TypeVar,
    Var,
    VarSupply,
    set_term,
)
from tset.errors import DuplicateDirective, HeadNotLinear, ParseError
from tset.parser import parse_formula, parse_program, parse_term, parse_type, render, tokenize


def test_set_term_with_tail():
    t = parse_term("{a,1,{2},(5,b) / B}")
    assert t == set_term([Atom("a"), IntLit(1), set_term([IntLit(2)]), Pair(IntLit(5), Atom("b"))], Var("B"))


def test_interval_and_tagged_atom():
    assert parse_term("[M,N+1]") == Interval(Var("M"), IntOp("+", Var("N"), IntLit(1)))
    assert parse_term("bid?b") == Tagged("bid", "b")


def test_signed_literals():
    assert parse_term("-3") == IntLit(-3)
    assert parse_term("X-3") == IntOp("-", Var("X"), IntLit(3))
    assert parse_term("X - -3") == IntOp("-", Var("X"), IntLit(-3))
    f = parse_formula("X neq -1")
    assert f == Atomic(C("neq", Var("X"), IntLit(-1)))


def test_rel_is_set_of_pairs():
    assert parse_type("rel(t,int)") == SetType(Prod(Basic("t"), INT))
    assert parse_type("set(enum([red,green]))") == SetType(Enum(("red", "green")))
    assert parse_type("T") == TypeVar("T")


def test_operators_and_grouping():
    f = parse_formula("X = 1 & (Y in S or Y nin S) & true.")
    assert isinstance(f, And)
    assert isinstance(f.left.right, Or)


def test_dec_list_sugar():
    f = parse_formula("dec([A,B,C],set(int))")
    assert f == And(And(Dec(Var("A"), SetType(INT)), Dec(Var("B"), SetType(INT))), Dec(Var("C"), SetType(INT)))


def test_anonymous_variables_are_distinct():
    supply = VarSupply()
    f = parse_formula("subset(A,[M,_]) & _ = _", supply)
    names = list(f.right.constraint.args)
    assert isinstance(names[0], Var) and names[0] != names[1]
    assert all(supply.is_fresh(v.name) for v in names)


def test_comments_are_skipped():
    assert parse_formula("X = 1 % trailing comment\n & Y = 2") == And(
        Atomic(C("=", Var("X"), IntLit(1))), Atomic(C("=", Var("Y"), IntLit(2)))
    )


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("un(A,B)", "un expects 3 arguments"),
        ("X = {1 / a}", "set part must be a set or a variable"),
        ("X = t?Y", "second argument of ? must be an atom"),
        ("X * Y = 2", "non-linear product"),
        ("X = or", "cannot be used as an atom"),
        ("X = ", "unexpected"),
        ("dec(a,int)", "first argument of dec must be a variable"),
    ],
)
def test_syntax_errors(text, fragment):
    with pytest.raises(ParseError) as err:
        parse_formula(text)
    assert fragment in str(err.value)


def test_error_position_is_reported():
    with pytest.raises(ParseError) as err:
        parse_formula("X = 1 &\n  Y ==")
    assert err.value.line == 2
    assert str(err.value).startswith("syntax error:")


def test_unknown_character():
    with pytest.raises(ParseError):
        tokenize("X = $")


BOOKS = """
:- dec_p_type(addBook(rel(bid,title),bid,title,rel(bid,title))).
addBook(Books,B,T,Books1) :-
    comp({(B,B)},Books,{}) & Books1 = {(B,T) / Books}.
"""

APPLY_TO = """
:- dec_pp_type(applyTo(rel(T,U),T,U)).
applyTo(F,X,Y) :-
    dec(G,rel(T,U)) & F = {(X,Y) / G} & (X,Y) nin G & comp({(X,X)},G,{}).
"""


def test_program_with_directive_and_clause():
    prog = parse_program(BOOKS)
    assert len(prog.directives) == 1 and len(prog.clauses) == 1
    d = prog.directives[0]
    assert isinstance(d, DecPType)
    assert d.arg_types[1] == Basic("bid")
    assert prog.clauses[0].key == ("addBook", 4)


def test_polymorphic_program():
    prog = parse_program(APPLY_TO)
    assert isinstance(prog.directives[0], DecPPType)
    assert prog.directives[0].arg_types[0] == SetType(Prod(TypeVar("T"), TypeVar("U")))
    assert prog.clauses[0].head == C("applyTo", Var("F"), Var("X"), Var("Y"))


def test_duplicate_directive():
    with pytest.raises(DuplicateDirective):
        parse_program(":- dec_p_type(p(int)).\n:- dec_p_type(p(int)).\n")


def test_head_must_be_linear():
    with pytest.raises(HeadNotLinear):
        parse_program("p(X,X) :- X = 1.")
    with pytest.raises(HeadNotLinear):
        parse_program("p(1) :- true.")


def test_fact_clause():
    prog = parse_program("p(X).")
    assert render(prog.clauses[0]) == "p(X)."


def test_render_examples():
    assert render(parse_formula("un({a,1,{2},(5,b)},{X},{Y/B})")) == "un({a,1,{2},(5,b)},{X},{Y / B})"
    assert render(parse_formula("(X = 1 or X = 2) & Y = 3")) == "(X = 1 or X = 2) & Y = 3"
    assert render(parse_term("2*(X+1)-(Y-Z)")) == "2*(X+1)-(Y-Z)"
    assert render(parse_type("rel(t,set(int))")) == "rel(t,set(int))"
    assert render(parse_program(BOOKS).directives[0]) == (
        ":- dec_p_type(addBook(rel(bid,title),bid,title,rel(bid,title)))."
    )


@settings(max_examples=1000, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(formulas(depth=2))
def test_formula_round_trip(f):
    assert parse_formula(render(f)) == f


@settings(max_examples=300, deadline=None)
@given(terms())
def test_term_round_trip(t):
    assert parse_term(render(t)) == t


@settings(max_examples=300, deadline=None)
@given(types())
def test_type_round_trip(t):
    assert parse_type(render(t)) == t


def test_empty_set_literal():
    assert parse_term("{}") == EMPTY
    assert parse_term("{1 / {}}") == set_term([IntLit(1)])
