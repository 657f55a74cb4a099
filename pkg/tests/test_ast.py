from __future__ import annotations

from tset.ast import (
    EMPTY,
    FALSE,
    TRUE,
    C,
    Dec,
    IntLit,
    SetCons,
    Var,
    VarSupply,
    conjoin,
    dnf_clauses,
    free_vars,
    fresh_var,
    occurs,
    rename_apart,
    set_parts,
    set_term,
    strip_decs,
    substitute,
    to_dnf,
    vars_in_order,
)
from tset.parser import parse_formula, parse_program, parse_term


def test_set_term_and_parts():
    s = set_term([IntLit(1), IntLit(2)], Var("S"))
    assert s == SetCons(IntLit(1), SetCons(IntLit(2), Var("S")))
    assert set_parts(s) == ([IntLit(1), IntLit(2)], Var("S"))
    assert set_term([]) is EMPTY


def test_vars_in_order_of_first_occurrence():
    f = parse_formula("dec(B,set(int)) & un(A,{X / B},A) & X in C")
    assert vars_in_order(f) == ["B", "A", "X", "C"]
    assert free_vars(parse_term("(X,{Y / Z})")) == {"X", "Y", "Z"}


def test_substitute_is_simultaneous():
    t = parse_term("(X,Y)")
    assert str(substitute(t, {"X": Var("Y"), "Y": Var("X")})) == "(Y,X)"


def test_substitute_drops_a_dec_of_a_bound_variable():
    d = parse_formula("dec(X,int)")
    assert isinstance(substitute(d, {"X": Var("Z")}), Dec)
    assert substitute(d, {"X": IntLit(3)}) is TRUE


def test_occurs():
    assert occurs("X", parse_term("{1 / [X,3]}"))
    assert not occurs("X", parse_term("{1 / S}"))


def test_dnf():
    f = parse_formula("(X = 1 or X = 2) & (Y = 1 or false)")
    assert [[str(lit) for lit in c] for c in dnf_clauses(f)] == [["X = 1", "Y = 1"], ["X = 2", "Y = 1"]]
    assert dnf_clauses(TRUE) == [[]]
    assert dnf_clauses(FALSE) == []
    assert conjoin([]) is TRUE


def test_strip_decs():
    f = parse_formula("dec(X,int) & X = 1")
    assert [str(lit) for c in dnf_clauses(strip_decs(f)) for lit in c] == ["X = 1"]


def test_fresh_names():
    supply = VarSupply()
    assert supply.fresh("E").name == "E_1"
    assert supply.fresh("n").name == "_n_2"
    assert supply.is_fresh("E_1")
    assert not supply.is_fresh("E")


def test_observed_names_are_never_reissued():
    supply = VarSupply()
    supply.observe("N_7")
    assert supply.fresh().name == "N_8"
    assert not supply.is_fresh("N_7")


def test_rename_apart():
    program = parse_program(":- dec_p_type(p(int,set(int))).\np(X,S) :- X in S & X_4 = 1.\n")
    clause = program.clauses[0]
    renamed = rename_apart(clause, VarSupply())
    assert str(renamed.head) == str(C("p", Var("X_1"), Var("S_2")))
    assert vars_in_order(renamed.body) == ["X_1", "S_2", "X_3"]


def test_to_dnf():
    f = parse_formula("X = 1 & (Y = 1 or Y = 2)")
    assert to_dnf(f) == parse_formula("X = 1 & Y = 1 or X = 1 & Y = 2")


def test_fresh_var_uses_the_given_supply():
    supply = VarSupply()
    assert fresh_var("S", supply).name == "S_1"
    assert fresh_var(supply=supply).name == "N_2"
