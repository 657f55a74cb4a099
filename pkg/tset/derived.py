"""Derived and negative constraints, defined in T_SET itself.

The prelude below is consulted into a `Registry` when an engine starts. A
call to a derived predicate is replaced by the bodies of its clauses,
renamed apart, before the solver sees it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

from .ast import (
    INT,
    PRIMITIVES,
    Clause,
    Constraint,
    DecPPType,
    DecPType,
    Directive,
    Formula,
    Term,
    Var,
    VarSupply,
    disjoin,
    rename_apart,
    substitute,
)
from .errors import ErrorKind, NameCollision, NotDerived, TypeCheckError
from .parser import parse_program
from .typechecker import check_clause, check_directive

logger = logging.getLogger(__name__)

PRELUDE = """\
% Derived constraints.  Local variables are existential.

:- dec_pp_type(subset(set(T),set(T))).
subset(A,B) :- un(A,B,B).

:- dec_pp_type(inters(set(T),set(T),set(T))).
inters(A,B,C) :- dec([D1,D2],set(T)) & un(C,D1,A) & un(C,D2,B) & disj(D1,D2).

:- dec_pp_type(diff(set(T),set(T),set(T))).
diff(A,B,C) :- dec(D,set(T)) & un(C,D,A) & disj(C,B) & un(D,B,B).

% Negative constraints: a witness element separates the two sides.

:- dec_pp_type(nun(set(T),set(T),set(T))).
nun(A,B,C) :-
    dec(N,T) &
    (N in C & N nin A & N nin B or N in A & N nin C or N in B & N nin C).

:- dec_pp_type(ndisj(set(T),set(T))).
ndisj(A,B) :- dec(N,T) & N in A & N in B.

:- dec_pp_type(nsubset(set(T),set(T))).
nsubset(A,B) :- dec(N,T) & N in A & N nin B.

% Relations that are not partial functions; pfun itself is built in.

:- dec_pp_type(npfun(rel(T,U))).
npfun(F) :-
    dec(X,T) & dec([Y,Z],U) & dec(R,rel(T,U)) &
    F = {(X,Y),(X,Z) / R} & Y neq Z.
"""

# Strict and reverse orders over integers; their symbols cannot head a directive.
ORDER_CLAUSES = """\
X < Y :- X+1 =< Y.
X > Y :- Y+1 =< X.
X >= Y :- Y =< X.
"""

ORDER_SCHEMES = tuple(DecPType(op, (INT, INT)) for op in ("<", ">", ">="))


@dataclass(frozen=True)
class DerivedDef:
    name: str
    arity: int
    scheme: Directive
    clauses: tuple[Clause, ...]

    @property
    def key(self) -> tuple[str, int]:
        return (self.name, self.arity)


def instantiate(clause: Clause, call: Constraint, supply: VarSupply) -> Formula:
    """The body of `clause` renamed apart, with head parameters replaced by the call's arguments."""
    fresh = rename_apart(clause, supply)
    params: dict[str, Term] = {}
    for p, a in zip(fresh.head.args, call.args):
        assert isinstance(p, Var)
        params[p.name] = a
    return substitute(fresh.body, params)


class Registry:
    def __init__(self, supply: Optional[VarSupply] = None, *, typecheck: bool = True):
        self.supply = supply or VarSupply()
        self.typecheck = typecheck
        self.defs: dict[tuple[str, int], DerivedDef] = {}

    def __contains__(self, key: tuple[str, int]) -> bool:
        return key in self.defs

    def schemes(self) -> dict[tuple[str, int], Directive]:
        return {k: d.scheme for k, d in self.defs.items()}

    def register(self, d: DerivedDef) -> None:
        if PRIMITIVES.get(d.name) == d.arity:
            raise NameCollision(f"{d.name}/{d.arity} is a primitive constraint")
        if d.key in self.defs:
            raise NameCollision(f"{d.name}/{d.arity} is already defined")
        if self.typecheck:
            check_directive(d.scheme)
            schemes = {**self.schemes(), d.key: d.scheme}
            for c in d.clauses:
                check_clause(d.scheme, c, schemes)
        self.defs[d.key] = d
        logger.debug("registered derived constraint %s/%d", d.name, d.arity)

    def register_source(self, text: str, extra: Sequence[Directive] = ()) -> None:
        prog = parse_program(text, self.supply)
        directives = {d.key: d for d in (*extra, *prog.directives)}
        grouped: dict[tuple[str, int], list[Clause]] = {}
        for c in prog.clauses:
            grouped.setdefault(c.key, []).append(c)
        for key, clauses in grouped.items():
            scheme = directives.get(key)
            if scheme is None:
                raise TypeCheckError(ErrorKind.MISSING_DIRECTIVE, f"derived constraint {key[0]}/{key[1]} has no type scheme")
            self.register(DerivedDef(key[0], key[1], scheme, tuple(clauses)))

    def alternatives(self, c: Constraint) -> list[Formula]:
        d = self.defs.get(c.key)
        if d is None:
            raise NotDerived(f"{c.name}/{c.arity} is not a derived constraint")
        return [instantiate(cl, c, self.supply) for cl in d.clauses]

    def expand(self, c: Constraint) -> Formula:
        """A derived call replaced by its definition, with fresh existentials."""
        return disjoin(self.alternatives(c))


def load_prelude(registry: Registry) -> Registry:
    registry.register_source(ORDER_CLAUSES, ORDER_SCHEMES)
    registry.register_source(PRELUDE)
    return registry


def default_registry(supply: Optional[VarSupply] = None, *, typecheck: bool = True) -> Registry:
    return load_prelude(Registry(supply, typecheck=typecheck))

