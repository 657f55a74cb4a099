from __future__ import annotations

import logging

import pytest

from tset.ast import INT, Basic, C, Pair, Prod, SetType, TypeVar, Var, rel
from tset.derived import default_registry
from tset.errors import ErrorKind, ParseError, TypeCheckError
from tset.parser import parse_formula, parse_program, parse_term
from tset.typechecker import (
    TypingContext,
    Unifier,
    build_D,
    check_clause,
    check_constraint,
    collect_context,
    infer_term_type,
    infer_types,
    instantiate_poly,
    typecheck_formula,
)

T = Basic("t")
SCHEMES = default_registry().schemes()


def check(text: str):
    return typecheck_formula(parse_formula(text), SCHEMES)


def kind_of(text: str) -> ErrorKind:
    with pytest.raises(TypeCheckError) as err:
        check(text)
    return err.value.kind


@pytest.mark.parametrize(
    "text",
    [
        "dec([A,B,C],set(int)) & dec([N,K],int) & un(A,B,C) & N+K > 5 & size(C,N) & B neq {}",
        "dec(Y,t) & dec(R,rel(t,int)) & dec([S,T],rel(int,t)) & dec(X,prod(int,t)) & "
        "(Y,5) in R & (2,t?b) nin S & inv(R,S) & S = {X / T}",
        "dec(X,enum([red,green,blue])) & dec(S,set(enum([red,green,blue]))) & X in S & green nin S",
        "dec(S,set(t)) & S = {t?a, t?b / {}}",
        "dec(A,set(int)) & A = [1,5] & subset({2,3},A)",
        "dec(S,set(t)) & (S = {} or size(S,2))",
    ],
)
def test_well_typed(text):
    gamma = check(text)
    assert gamma.var_types


def test_ill_typed_neq():
    with pytest.raises(TypeCheckError) as err:
        check("dec(X,t) & dec(Y,int) & X neq Y")
    assert err.value.kind is ErrorKind.CONSTRAINT_MISMATCH
    assert str(err.value) == "type error in X neq Y: X is of type t, Y is of type int"


def test_id_loop_is_rejected_with_positions():
    with pytest.raises(TypeCheckError) as err:
        check("id({X / A},R) & id(R,A) & dec(X,t) & dec(A,set(t)) & dec(R,rel(t,t))")
    assert str(err.value) == "type error in id(R,A): R is of type rel(t,t), A is of type set(t)"


def test_set_mixing_basic_types():
    with pytest.raises(TypeCheckError) as err:
        check("dec(S,set(u)) & S = {u?a, v?a}")
    assert "mixes" in str(err.value)


def test_tagged_atom_needs_an_atom():
    with pytest.raises(ParseError):
        parse_term("u?10")


def test_atom_without_enum():
    assert kind_of("dec(X,t) & X = q") is ErrorKind.ATOM_WITHOUT_ENUM


def test_undeclared_variable():
    assert kind_of("dec(X,int) & X = Y") is ErrorKind.UNDECLARED_VARIABLE


def test_anonymous_variables_take_their_type_from_use():
    gamma = check("dec(S,set(int)) & subset({1 / _},S)")
    assert "S" in gamma.var_types
    check("dec(R,rel(t,int)) & (_X,3) in R & _X neq t?a")


def test_underscore_variables_share_a_type_within_a_disjunct():
    assert kind_of("dec(R,rel(t,int)) & (_Y,3) in R & _Y = 4") is ErrorKind.CONSTRAINT_MISMATCH
    check("dec(X,t) & dec(N,int) & (_Y = X or _Y = N)")


def test_duplicate_dec():
    assert kind_of("dec(X,int) & dec(X,t) & X = 1") is ErrorKind.DUPLICATE_DEC


@pytest.mark.parametrize(
    "text",
    [
        "dec(X,enum([red])) & X = red",
        "dec(X,enum([red,red])) & X = red",
        "dec(X,enum([red,green])) & dec(Y,enum([red,blue])) & X = red & Y = blue",
    ],
)
def test_enum_violations(text):
    assert kind_of(text) is ErrorKind.ENUM_VIOLATION


def test_unknown_predicate():
    assert kind_of("dec(X,int) & frob(X)") is ErrorKind.UNKNOWN_PREDICATE


def test_query_type_variables_are_rejected():
    assert kind_of("dec(X,T) & X = X") is ErrorKind.ILL_FORMED_DIRECTIVE


def test_disjunct_checked_separately():
    # Each disjunct is checked on its own, but against the same declarations.
    assert kind_of("dec(X,int) & (X = 1 or X = t?a)") is ErrorKind.CONSTRAINT_MISMATCH


def test_unused_declaration_warns(caplog):
    with caplog.at_level(logging.WARNING, logger="tset.typechecker"):
        check("dec([X,Y],int) & X = 1")
    assert "Y" in caplog.text


def test_empty_set_takes_any_element_type():
    assert check("dec(A,set(t)) & dec(B,set(int)) & A = {} & B = {}")
    assert infer_term_type(TypingContext(), parse_term("{1,2}")) == SetType(INT)


def test_interval_bounds_are_integers():
    assert kind_of("dec(X,t) & dec(A,set(int)) & A = [1,X]") is ErrorKind.CONSTRAINT_MISMATCH


BOOKS = parse_program(
    """
:- dec_p_type(addBook(rel(bid,title),bid,title,rel(bid,title))).
addBook(Books,B,T,Books1) :- comp({(B,B)},Books,{}) & Books1 = {(B,T) / Books}.
"""
)

APPLY_TO = parse_program(
    """
:- dec_pp_type(applyTo(rel(T,U),T,U)).
applyTo(F,X,Y) :-
    dec(G,rel(T,U)) & F = {(X,Y) / G} & (X,Y) nin G & comp({(X,X)},G,{}).
"""
)


def _schemes(*progs):
    out = dict(SCHEMES)
    for p in progs:
        out.update({d.key: d for d in p.directives})
    return out


def test_monomorphic_clause():
    check_clause(BOOKS.directives[0], BOOKS.clauses[0], _schemes(BOOKS))


def test_monomorphic_clause_mismatch():
    bad = parse_program(
        ":- dec_p_type(addBook(rel(bid,title),bid,title,rel(bid,title))).\n"
        "addBook(Books,B,T,Books1) :- Books1 = {(T,B) / Books}.\n"
    )
    with pytest.raises(TypeCheckError):
        check_clause(bad.directives[0], bad.clauses[0], _schemes(bad))


def test_polymorphic_clause_and_calls():
    schemes = _schemes(APPLY_TO)
    check_clause(APPLY_TO.directives[0], APPLY_TO.clauses[0], schemes)
    typecheck_formula(parse_formula("dec(F,rel(t,int)) & dec(B,int) & applyTo(F,t?a,B)"), schemes)
    with pytest.raises(TypeCheckError) as err:
        typecheck_formula(parse_formula("dec(F,rel(t,t)) & dec(B,int) & applyTo(F,t?a,B)"), schemes)
    assert err.value.kind is ErrorKind.POLY_INSTANTIATION_FAILURE
    assert str(err.value).startswith("type error in applyTo(F,t?a,B):")


def test_polymorphic_clause_keeps_type_variables_rigid():
    prog = parse_program(":- dec_pp_type(same(T,U)).\nsame(X,Y) :- X = Y.\n")
    with pytest.raises(TypeCheckError):
        check_clause(prog.directives[0], prog.clauses[0], _schemes(prog))


def test_dec_p_type_with_type_variable():
    prog = parse_program(":- dec_p_type(p(set(T))).\np(X) :- X = {}.\n")
    with pytest.raises(TypeCheckError) as err:
        check_clause(prog.directives[0], prog.clauses[0], _schemes(prog))
    assert err.value.kind is ErrorKind.ILL_FORMED_DIRECTIVE


def test_build_D_declares_head_variables():
    f = build_D([(Pair(Var("X"), parse_term("1")), Prod(T, INT)), (Var("S"), SetType(T))])
    assert set(collect_context(f).var_types.items()) == {("X", T), ("S", SetType(T))}


def test_build_D_conflicting_positions():
    with pytest.raises(TypeCheckError):
        build_D([(Var("X"), T), (Var("X"), INT)])


def test_instantiate_poly():
    scheme = APPLY_TO.directives[0].arg_types
    assert instantiate_poly(scheme, (rel(T, INT), T, INT)) == {"T": T, "U": INT}
    with pytest.raises(TypeCheckError):
        instantiate_poly(scheme, (rel(T, T), T, INT))


def test_unifier_occurs_check():
    u = Unifier()
    a = u.fresh()
    assert not u.unify(a, SetType(a))
    assert u.unify(TypeVar("?9"), T)
    assert not u.unify(TypeVar("R"), T)


def test_infer_types_for_undeclared_answer_variables():
    gamma = TypingContext({"S": SetType(T)})
    f = parse_formula("S = {X / N} & X neq t?a")
    assert infer_types(gamma, f) == {"S": SetType(T), "X": T, "N": SetType(T)}


def test_context_lists_declarations():
    gamma = collect_context(parse_formula("dec(A,set(int)) & dec(X,t) & X = t?a"))
    assert gamma.var_types == {"A": SetType(INT), "X": T}


def test_check_single_constraint():
    gamma = collect_context(parse_formula("dec(X,int) & dec(S,set(int))"))
    X, S = Var("X"), Var("S")
    check_constraint(gamma, C("in", X, S))
    check_constraint(gamma, C("subset", S, S), SCHEMES)
    with pytest.raises(TypeCheckError) as err:
        check_constraint(gamma, C("un", X, S, S))
    assert err.value.kind is ErrorKind.CONSTRAINT_MISMATCH
