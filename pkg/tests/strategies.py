"""Hypothesis strategies shared by the property suites."""

from __future__ import annotations

from hypothesis import strategies as st
from hypothesis.strategies import DrawFn, composite

from tset.ast import (
    EMPTY,
    FALSE,
    INT,
    TRUE,
    And,
    Atom,
    Atomic,
    Basic,
    Constraint,
    Dec,
    Enum,
    Formula,
    IntLit,
    IntOp,
    Interval,
    Or,
    Pair,
    Prod,
    SetType,
    Tagged,
    Term,
    Type,
    TypeVar,
    Var,
    conjoin,
    set_term,
)
from tset.typechecker import TypingContext

# --- Untyped ASTs for round-tripping ---

ATOM_NAMES = st.sampled_from(["a", "b", "c", "red", "green", "x1"])
VAR_NAMES = st.sampled_from(["X", "Y", "Z", "A", "B", "Books1", "N_2", "_Tmp"])
PRED_NAMES = st.sampled_from(["p", "q", "addBook", "un", "disj", "size", "id", "inv", "comp", "subset", "pfun"])


@composite
def types(draw: DrawFn, depth: int = 2) -> Type:
    leaves = st.one_of(
        st.just(INT),
        st.sampled_from([Basic("t"), Basic("bid"), Basic("title")]),
        st.sampled_from([TypeVar("T"), TypeVar("U")]),
        st.just(Enum(("red", "green", "blue"))),
    )
    if depth <= 0:
        return draw(leaves)
    sub = types(depth=depth - 1)
    return draw(
        st.one_of(
            leaves,
            st.builds(SetType, sub),
            st.builds(Prod, sub, sub),
        )
    )


@composite
def int_terms(draw: DrawFn, depth: int = 2) -> Term:
    leaves = st.one_of(st.builds(IntLit, st.integers(-20, 20)), st.builds(Var, VAR_NAMES))
    if depth <= 0:
        return draw(leaves)
    choice = draw(st.integers(0, 3))
    if choice == 0:
        return draw(leaves)
    if choice == 1:
        return IntOp("*", IntLit(draw(st.integers(-5, 5))), draw(int_terms(depth - 1)))
    op = draw(st.sampled_from(["+", "-"]))
    return IntOp(op, draw(int_terms(depth - 1)), draw(int_terms(depth - 1)))


@composite
def terms(draw: DrawFn, depth: int = 3) -> Term:
    leaves = st.one_of(
        st.builds(IntLit, st.integers(-20, 20)),
        st.builds(Var, VAR_NAMES),
        st.builds(Atom, ATOM_NAMES),
        st.builds(Tagged, st.sampled_from(["bid", "title", "t"]), ATOM_NAMES),
        st.just(EMPTY),
    )
    if depth <= 0:
        return draw(leaves)
    sub = terms(depth=depth - 1)
    choice = draw(st.integers(0, 5))
    if choice == 0:
        return draw(leaves)
    if choice == 1:
        elems = draw(st.lists(sub, min_size=1, max_size=3))
        tail = draw(st.one_of(st.just(EMPTY), st.builds(Var, VAR_NAMES)))
        return set_term(elems, tail)
    if choice == 2:
        return Interval(draw(int_terms(1)), draw(int_terms(1)))
    if choice == 3:
        return Pair(draw(sub), draw(sub))
    return draw(int_terms(depth - 1))


@composite
def constraints(draw: DrawFn) -> Constraint:
    if draw(st.booleans()):
        op = draw(st.sampled_from(["=", "neq", "in", "nin", "=<", "<", ">", ">="]))
        return Constraint(op, (draw(terms()), draw(terms())))
    name = draw(PRED_NAMES)
    arity = {"un": 3, "comp": 3, "disj": 2, "size": 2, "id": 2, "inv": 2, "subset": 2, "pfun": 1}.get(
        name, draw(st.integers(1, 4))
    )
    return Constraint(name, tuple(draw(st.lists(terms(), min_size=arity, max_size=arity))))


@composite
def formulas(draw: DrawFn, depth: int = 3) -> Formula:
    leaves = st.one_of(
        st.builds(Atomic, constraints()),
        st.builds(Dec, st.builds(Var, VAR_NAMES), types()),
        st.sampled_from([TRUE, FALSE]),
    )
    if depth <= 0:
        return draw(leaves)
    sub = formulas(depth=depth - 1)
    return draw(st.one_of(leaves, st.builds(And, sub, sub), st.builds(Or, sub, sub)))


# --- Well-typed constraints over a fixed context ---

T = Basic("t")
BASES: list[Type] = [T, INT]
PRODS: list[Type] = [Prod(a, b) for a in BASES for b in BASES]
SORTS: list[Type] = BASES + PRODS + [SetType(x) for x in BASES + PRODS]

GAMMA = TypingContext(
    {f"V{i}{suffix}": sort for i, sort in enumerate(SORTS) for suffix in ("a", "b")}
)


def vars_of(ty: Type) -> list[Var]:
    return [Var(n) for n, t in GAMMA.var_types.items() if t == ty]


@composite
def typed_terms(draw: DrawFn, ty: Type, depth: int = 2) -> Term:
    names = vars_of(ty)
    options: list[st.SearchStrategy[Term]] = []
    if names:
        options.append(st.sampled_from(names))
    if ty == T:
        options.append(st.builds(Tagged, st.just("t"), st.sampled_from(["a", "b", "c"])))
    elif ty == INT:
        options.append(st.builds(IntLit, st.integers(-3, 3)))
        if depth > 0:
            options.append(
                st.builds(IntOp, st.sampled_from(["+", "-"]), typed_terms(INT, depth - 1), typed_terms(INT, depth - 1))
            )
    elif isinstance(ty, Prod):
        options.append(st.builds(Pair, typed_terms(ty.left, depth - 1), typed_terms(ty.right, depth - 1)))
    elif isinstance(ty, SetType):
        options.append(st.just(EMPTY))
        if depth > 0:
            elems = st.lists(typed_terms(ty.elem, depth - 1), min_size=1, max_size=3)
            tails = st.sampled_from([EMPTY, *vars_of(ty)])
            options.append(st.builds(set_term, elems, tails))
            if ty.elem == INT:
                options.append(st.builds(Interval, typed_terms(INT, 0), typed_terms(INT, 0)))
    return draw(st.one_of(*options))


def _set_of(x: Type) -> Type:
    return SetType(x)


@composite
def typed_constraints(draw: DrawFn, family: str) -> Constraint:
    if family == "equality":
        ty = draw(st.sampled_from(SORTS))
        op = draw(st.sampled_from(["=", "neq"]))
        return Constraint(op, (draw(typed_terms(ty)), draw(typed_terms(ty))))
    if family == "membership":
        ty = draw(st.sampled_from(BASES + PRODS))
        op = draw(st.sampled_from(["in", "nin"]))
        return Constraint(op, (draw(typed_terms(ty)), draw(typed_terms(_set_of(ty)))))
    if family == "un":
        ty = _set_of(draw(st.sampled_from(BASES + PRODS)))
        return Constraint("un", tuple(draw(typed_terms(ty)) for _ in range(3)))
    if family == "disj":
        ty = _set_of(draw(st.sampled_from(BASES + PRODS)))
        return Constraint("disj", (draw(typed_terms(ty)), draw(typed_terms(ty))))
    if family == "size":
        ty = _set_of(draw(st.sampled_from(BASES + PRODS)))
        return Constraint("size", (draw(typed_terms(ty)), draw(typed_terms(INT, 1))))
    if family == "id":
        x = draw(st.sampled_from(BASES))
        return Constraint("id", (draw(typed_terms(_set_of(x))), draw(typed_terms(_set_of(Prod(x, x))))))
    if family == "inv":
        x, y = draw(st.sampled_from(BASES)), draw(st.sampled_from(BASES))
        return Constraint("inv", (draw(typed_terms(_set_of(Prod(x, y)))), draw(typed_terms(_set_of(Prod(y, x))))))
    if family == "pfun":
        x, y = draw(st.sampled_from(BASES)), draw(st.sampled_from(BASES))
        return Constraint("pfun", (draw(typed_terms(_set_of(Prod(x, y)))),))
    if family == "comp":
        x, y, z = (draw(st.sampled_from(BASES)) for _ in range(3))
        return Constraint(
            "comp",
            (
                draw(typed_terms(_set_of(Prod(x, y)))),
                draw(typed_terms(_set_of(Prod(y, z)))),
                draw(typed_terms(_set_of(Prod(x, z)))),
            ),
        )
    raise ValueError(family)


FAMILIES = ["equality", "un", "size", "comp", "membership", "disj", "id", "inv", "pfun"]


# --- Small formulas for oracle comparison ---

REL = SetType(Prod(T, T))
ORACLE_VARS = {"X": T, "Y": T, "S": SetType(T), "R": SetType(T), "N": INT, "F": REL}
ORACLE_KINDS = ["=", "neq", "in", "nin", "un", "disj", "subset", "size", "id", "inv", "comp", "pfun"]


@composite
def oracle_terms(draw: DrawFn, ty: Type, names: list[str]) -> Term:
    own = [Var(n) for n in names if ORACLE_VARS[n] == ty]
    if ty == T:
        return draw(st.sampled_from(own + [Tagged("t", "a"), Tagged("t", "b")]))
    if ty == INT:
        return draw(st.sampled_from(own + [IntLit(0), IntLit(1), IntLit(2)]))
    if isinstance(ty, Prod):
        return Pair(draw(oracle_terms(ty.left, names)), draw(oracle_terms(ty.right, names)))
    assert isinstance(ty, SetType)
    elems = st.lists(oracle_terms(ty.elem, names), min_size=1, max_size=2)
    tails = st.sampled_from([EMPTY, *own])
    return draw(st.one_of(st.sampled_from(own + [EMPTY]), st.builds(set_term, elems, tails)))


@composite
def oracle_formulas(draw: DrawFn) -> tuple[Formula, list[str]]:
    """A declared conjunction (with an occasional disjunction) over at most three variables."""
    names = draw(st.lists(st.sampled_from(["N", "R", "X", "Y", "F"]), max_size=2, unique=True)) + ["S"]
    S = SetType(T)

    def atomic() -> Formula:
        kind = draw(st.sampled_from(ORACLE_KINDS))
        if kind in ("=", "neq"):
            ty = draw(st.sampled_from([T, S]))
            return Atomic(Constraint(kind, (draw(oracle_terms(ty, names)), draw(oracle_terms(ty, names)))))
        if kind in ("in", "nin"):
            return Atomic(Constraint(kind, (draw(oracle_terms(T, names)), draw(oracle_terms(S, names)))))
        if kind == "un":
            return Atomic(Constraint("un", tuple(draw(oracle_terms(S, names)) for _ in range(3))))
        if kind in ("disj", "subset"):
            return Atomic(Constraint(kind, (draw(oracle_terms(S, names)), draw(oracle_terms(S, names)))))
        if kind == "id":
            return Atomic(Constraint("id", (draw(oracle_terms(S, names)), draw(oracle_terms(REL, names)))))
        if kind == "inv":
            return Atomic(Constraint("inv", (draw(oracle_terms(REL, names)), draw(oracle_terms(REL, names)))))
        if kind == "comp":
            return Atomic(Constraint("comp", tuple(draw(oracle_terms(REL, names)) for _ in range(3))))
        if kind == "pfun":
            return Atomic(Constraint("pfun", (draw(oracle_terms(REL, names)),)))
        return Atomic(Constraint("size", (draw(oracle_terms(S, names)), draw(oracle_terms(INT, names)))))

    parts = [atomic() for _ in range(draw(st.integers(1, 3)))]
    if draw(st.integers(0, 4)) == 0:
        parts[-1] = Or(parts[-1], atomic())
    decs = [Dec(Var(n), ORACLE_VARS[n]) for n in names]
    return conjoin(decs + parts), names
