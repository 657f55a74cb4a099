"""Prescriptive typechecker for T_SET formulas and clauses.

Checking runs in four phases:

1. `collect_context` gathers every `dec` into a typing context and validates
   enumerated types (at least two atoms, no repeats, no atom owned by two enums).
2. `check_formula` brings the formula into disjunctive normal form.
3. Every atomic constraint of every disjunct is checked against the scheme of
   its predicate symbol (`check_constraint`).
4. Argument types are inferred bottom-up (`infer_term_type`) and unified with
   the scheme.

All variables must be declared, except those whose name starts with `_`
(the anonymous `_` among them): their type is inferred from the constraints
of the disjunct they occur in. The only type variables that unify freely are
the internal `?k` ones introduced for `{}` and for polymorphic schemes. Type
variables written in a `dec_pp_type` directive are rigid while its clause is
checked.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .ast import (
    INT,
    Atom,
    Atomic,
    Basic,
    Clause,
    Constraint,
    Dec,
    DecPPType,
    DecPType,
    Directive,
    EmptySet,
    Enum,
    Formula,
    IntLit,
    IntOp,
    Interval,
    Pair,
    Prod,
    SetCons,
    SetType,
    Tagged,
    Term,
    Type,
    TypeVar,
    Var,
    And,
    conjoin,
    dnf_clauses,
    enums_in,
    free_vars,
    iter_constraints,
    iter_decs,
    rel,
    type_vars,
)
from .errors import ErrorKind, Loc, TypeCheckError
from .parser import render

logger = logging.getLogger(__name__)

Schemes = Mapping[tuple[str, int], Directive]


@dataclass(frozen=True)
class TypingContext:
    var_types: Mapping[str, Type] = field(default_factory=dict)
    enum_atoms: Mapping[str, Enum] = field(default_factory=dict)

    def type_of(self, name: str) -> Optional[Type]:
        return self.var_types.get(name)

    def extend(self, extra: Mapping[str, Type]) -> "TypingContext":
        return TypingContext({**self.var_types, **extra}, self.enum_atoms)


# --- Unification ---


class Unifier:
    """Substitution over flexible type variables with occurs check.

    A type variable is flexible when its name starts with `?` or is listed in
    `flexible`; every other TypeVar is rigid and only equals itself.
    """

    def __init__(self, flexible: Iterable[str] = ()):
        self.subst: dict[str, Type] = {}
        self.flexible = set(flexible)
        self._counter = 0

    def fresh(self) -> TypeVar:
        self._counter += 1
        return TypeVar(f"?{self._counter}")

    def is_flexible(self, t: Type) -> bool:
        return isinstance(t, TypeVar) and (t.name.startswith("?") or t.name in self.flexible)

    def walk(self, t: Type) -> Type:
        while isinstance(t, TypeVar) and t.name in self.subst:
            t = self.subst[t.name]
        return t

    def resolve(self, t: Type) -> Type:
        t = self.walk(t)
        if isinstance(t, Prod):
            return Prod(self.resolve(t.left), self.resolve(t.right))
        if isinstance(t, SetType):
            return SetType(self.resolve(t.elem))
        return t

    def _occurs(self, name: str, t: Type) -> bool:
        return name in type_vars(self.resolve(t))

    def unify(self, a: Type, b: Type) -> bool:
        a, b = self.walk(a), self.walk(b)
        if a == b:
            return True
        if self.is_flexible(a):
            assert isinstance(a, TypeVar)
            if self._occurs(a.name, b):
                return False
            self.subst[a.name] = b
            return True
        if self.is_flexible(b):
            return self.unify(b, a)
        if isinstance(a, Prod) and isinstance(b, Prod):
            return self.unify(a.left, b.left) and self.unify(a.right, b.right)
        if isinstance(a, SetType) and isinstance(b, SetType):
            return self.unify(a.elem, b.elem)
        return False


def _builtin_scheme(name: str, arity: int, u: Unifier) -> Optional[list[Type]]:
    if name in ("=", "neq") and arity == 2:
        t = u.fresh()
        return [t, t]
    if name in ("in", "nin") and arity == 2:
        t = u.fresh()
        return [t, SetType(t)]
    if name == "un" and arity == 3:
        s = SetType(u.fresh())
        return [s, s, s]
    if name == "disj" and arity == 2:
        s = SetType(u.fresh())
        return [s, s]
    if name == "size" and arity == 2:
        return [SetType(u.fresh()), INT]
    if name == "id" and arity == 2:
        t = u.fresh()
        return [SetType(t), rel(t, t)]
    if name == "inv" and arity == 2:
        x, y = u.fresh(), u.fresh()
        return [rel(x, y), rel(y, x)]
    if name == "comp" and arity == 3:
        x, y, z = u.fresh(), u.fresh(), u.fresh()
        return [rel(x, y), rel(y, z), rel(x, z)]
    if name == "pfun" and arity == 1:
        return [rel(u.fresh(), u.fresh())]
    if name == "=<" and arity == 2:
        return [INT, INT]
    return None


def _rename_scheme(types: Sequence[Type], u: Unifier) -> list[Type]:
    mapping = {v: u.fresh() for t in types for v in sorted(type_vars(t))}

    def go(t: Type) -> Type:
        if isinstance(t, TypeVar):
            return mapping.get(t.name, t)
        if isinstance(t, Prod):
            return Prod(go(t.left), go(t.right))
        if isinstance(t, SetType):
            return SetType(go(t.elem))
        return t

    return [go(t) for t in types]


# --- Phase 1 ---


def _check_enum(e: Enum, owners: dict[str, Enum], loc: Optional[Loc]) -> None:
    if len(e.atoms) < 2:
        raise TypeCheckError(ErrorKind.ENUM_VIOLATION, f"{render(e)} must list at least two atoms", loc)
    seen: set[str] = set()
    for a in e.atoms:
        if a in seen:
            raise TypeCheckError(ErrorKind.ENUM_VIOLATION, f"atom {a} appears twice in {render(e)}", loc)
        seen.add(a)
        owner = owners.get(a)
        if owner is not None and owner != e:
            raise TypeCheckError(
                ErrorKind.ENUM_VIOLATION,
                f"atom {a} appears in two different enumerated types {render(owner)} and {render(e)}",
                loc,
            )
        owners[a] = e


def collect_context(
    f: Formula, *, rigid: Iterable[str] = (), extra_types: Iterable[Type] = ()
) -> TypingContext:
    """Phase 1: the typing context declared by `f`."""
    allowed = set(rigid)
    var_types: dict[str, Type] = {}
    owners: dict[str, Enum] = {}
    for d in iter_decs(f):
        name = d.var.name
        if name in var_types:
            raise TypeCheckError(ErrorKind.DUPLICATE_DEC, f"variable {name} is declared more than once", d.loc)
        stray = type_vars(d.type) - allowed
        if stray:
            raise TypeCheckError(
                ErrorKind.ILL_FORMED_DIRECTIVE,
                f"type variable {sorted(stray)[0]} in dec({name},{render(d.type)}) is not bound by a dec_pp_type directive",
                d.loc,
            )
        for e in enums_in(d.type):
            _check_enum(e, owners, d.loc)
        var_types[name] = d.type
    for t in extra_types:
        for e in enums_in(t):
            _check_enum(e, owners, None)
    return TypingContext(var_types, owners)


# --- Phases 3 and 4 ---


class _Checker:
    def __init__(
        self,
        gamma: TypingContext,
        schemes: Schemes,
        unifier: Optional[Unifier] = None,
        infer_undeclared: bool = False,
    ):
        self.gamma = gamma
        self.schemes = schemes
        self.u = unifier or Unifier()
        self.infer_undeclared = infer_undeclared
        self.inferred: dict[str, Type] = {}

    def term(self, t: Term, loc: Optional[Loc]) -> Type:
        if isinstance(t, IntLit):
            return INT
        if isinstance(t, IntOp):
            for side in (t.left, t.right):
                ty = self.term(side, loc)
                if not self.u.unify(ty, INT):
                    raise TypeCheckError(
                        ErrorKind.CONSTRAINT_MISMATCH,
                        f"operand {render(side)} of {render(t)} is of type {render(self.u.resolve(ty))}, expected int",
                        loc,
                    )
            return INT
        if isinstance(t, Atom):
            owner = self.gamma.enum_atoms.get(t.name)
            if owner is None:
                raise TypeCheckError(
                    ErrorKind.ATOM_WITHOUT_ENUM, f"atom {t.name} does not belong to any declared enumerated type", loc
                )
            return owner
        if isinstance(t, Tagged):
            return Basic(t.base)
        if isinstance(t, Var):
            ty = self.gamma.type_of(t.name)
            if ty is not None:
                return ty
            if self.infer_undeclared or t.name.startswith("_"):
                return self.inferred.setdefault(t.name, self.u.fresh())
            raise TypeCheckError(ErrorKind.UNDECLARED_VARIABLE, f"variable {t.name} is not declared", loc)
        if isinstance(t, EmptySet):
            return SetType(self.u.fresh())
        if isinstance(t, SetCons):
            elem = self.term(t.elem, loc)
            rest = self.term(t.rest, loc)
            if not self.u.unify(rest, SetType(elem)):
                raise TypeCheckError(
                    ErrorKind.CONSTRAINT_MISMATCH,
                    f"set term {render(t)} mixes {render(t.elem)} of type {render(self.u.resolve(elem))} "
                    f"with elements of type {render(self.u.resolve(rest))}",
                    loc,
                )
            return SetType(elem)
        if isinstance(t, Interval):
            for side in (t.lo, t.hi):
                ty = self.term(side, loc)
                if not self.u.unify(ty, INT):
                    raise TypeCheckError(
                        ErrorKind.CONSTRAINT_MISMATCH,
                        f"interval bound {render(side)} is of type {render(self.u.resolve(ty))}, expected int",
                        loc,
                    )
            return SetType(INT)
        if isinstance(t, Pair):
            return Prod(self.term(t.fst, loc), self.term(t.snd, loc))
        raise TypeError(f"not a term: {t!r}")

    def scheme(self, c: Constraint) -> tuple[list[Type], ErrorKind]:
        builtin = _builtin_scheme(c.name, c.arity, self.u)
        if builtin is not None:
            return builtin, ErrorKind.CONSTRAINT_MISMATCH
        d = self.schemes.get(c.key)
        if d is None:
            raise TypeCheckError(ErrorKind.UNKNOWN_PREDICATE, f"unknown predicate {c.name}/{c.arity}", c.loc)
        if isinstance(d, DecPPType):
            return _rename_scheme(d.arg_types, self.u), ErrorKind.POLY_INSTANTIATION_FAILURE
        return list(d.arg_types), ErrorKind.CONSTRAINT_MISMATCH

    def constraint(self, c: Constraint) -> list[Type]:
        expected, kind = self.scheme(c)
        actual = [self.term(a, c.loc) for a in c.args]
        if all(self.u.unify(a, e) for a, e in zip(actual, expected)):
            return [self.u.resolve(t) for t in actual]
        parts = ", ".join(f"{render(a)} is of type {render(self.u.resolve(t))}" for a, t in zip(c.args, actual))
        raise TypeCheckError(kind, f"type error in {render(c)}: {parts}", c.loc, templated=True)


def infer_term_type(gamma: TypingContext, t: Term, unifier: Optional[Unifier] = None) -> Type:
    """Phase 4: the type of `t`; `{}` leaves contribute unresolved `?k` variables."""
    checker = _Checker(gamma, {}, unifier)
    return checker.u.resolve(checker.term(t, None))


def check_constraint(gamma: TypingContext, c: Constraint, schemes: Schemes = {}) -> None:
    """Phase 3: check one constraint against the scheme of its symbol."""
    _Checker(gamma, schemes).constraint(c)


def check_formula(gamma: TypingContext, f: Formula, schemes: Schemes = {}) -> None:
    """Phase 2 driver: check every constraint of every disjunct of the DNF of `f`.

    Undeclared `_` variables share one inferred type across a disjunct.
    """
    used: set[str] = set()
    for disjunct in dnf_clauses(f):
        checker = _Checker(gamma, schemes)
        for lit in disjunct:
            if isinstance(lit, Atomic):
                checker.constraint(lit.constraint)
                used |= free_vars(lit.constraint)
    unused = sorted(set(gamma.var_types) - used)
    if unused:
        logger.warning("declared but unused variable(s) ignored: %s", ", ".join(unused))


def typecheck_formula(f: Formula, schemes: Schemes = {}) -> TypingContext:
    """Run all four phases on a query; returns the typing context on success."""
    extra = [t for c in iter_constraints(f) if (d := schemes.get(c.key)) is not None for t in d.arg_types]
    gamma = collect_context(f, extra_types=extra)
    check_formula(gamma, f, schemes)
    logger.info("typechecked formula with %d declared variable(s)", len(gamma.var_types))
    return gamma


# --- D(t:τ) ---


def build_D(bindings: Sequence[tuple[Term, Type]]) -> Formula:
    """Declarations for every variable of the terms, with the types forced by their positions."""
    out: dict[str, Type] = {}

    def mismatch(t: Term, ty: Type) -> TypeCheckError:
        return TypeCheckError(ErrorKind.CONSTRAINT_MISMATCH, f"{render(t)} cannot have type {render(ty)}")

    def go(t: Term, ty: Type) -> None:
        if isinstance(t, Var):
            prev = out.setdefault(t.name, ty)
            if prev != ty:
                raise TypeCheckError(
                    ErrorKind.CONSTRAINT_MISMATCH,
                    f"{t.name} would need both type {render(prev)} and type {render(ty)}",
                )
        elif isinstance(t, (IntLit, IntOp)):
            if ty != INT:
                raise mismatch(t, ty)
            if isinstance(t, IntOp):
                go(t.left, INT)
                go(t.right, INT)
        elif isinstance(t, Atom):
            if not (isinstance(ty, Enum) and t.name in ty.atoms):
                raise mismatch(t, ty)
        elif isinstance(t, Tagged):
            if ty != Basic(t.base):
                raise mismatch(t, ty)
        elif isinstance(t, EmptySet):
            if not isinstance(ty, SetType):
                raise mismatch(t, ty)
        elif isinstance(t, SetCons):
            if not isinstance(ty, SetType):
                raise mismatch(t, ty)
            go(t.elem, ty.elem)
            go(t.rest, ty)
        elif isinstance(t, Interval):
            if ty != SetType(INT):
                raise mismatch(t, ty)
            go(t.lo, INT)
            go(t.hi, INT)
        elif isinstance(t, Pair):
            if not isinstance(ty, Prod):
                raise mismatch(t, ty)
            go(t.fst, ty.left)
            go(t.snd, ty.right)
        else:
            raise TypeError(f"not a term: {t!r}")

    for t, ty in bindings:
        go(t, ty)
    return conjoin(Dec(Var(name), ty) for name, ty in out.items())


# --- Clauses and polymorphism ---


def check_directive(d: Directive) -> None:
    loc = d.loc
    if isinstance(d, DecPType):
        for t in d.arg_types:
            if type_vars(t):
                raise TypeCheckError(
                    ErrorKind.ILL_FORMED_DIRECTIVE,
                    f"dec_p_type({d.name}/{len(d.arg_types)}) mentions type variable(s); use dec_pp_type",
                    loc,
                )
    owners: dict[str, Enum] = {}
    for t in d.arg_types:
        for e in enums_in(t):
            _check_enum(e, owners, loc)


def check_clause(d: Directive, c: Clause, schemes: Schemes = {}) -> None:
    """Check `c` as `D(head args : directive types) & body`."""
    if d.key != c.key:
        raise TypeCheckError(
            ErrorKind.ILL_FORMED_DIRECTIVE, f"directive {d.name}/{len(d.arg_types)} does not match clause {c.head.name}/{c.head.arity}", c.loc
        )
    check_directive(d)
    rigid = set().union(*(type_vars(t) for t in d.arg_types)) if d.arg_types else set()
    heads = conjoin(Dec(arg, t, c.loc) for arg, t in zip(c.head.args, d.arg_types) if isinstance(arg, Var))
    f = And(heads, c.body)
    gamma = collect_context(f, rigid=rigid, extra_types=d.arg_types)
    check_formula(gamma, f, schemes)
    logger.info("clause %s/%d typechecked", c.head.name, c.head.arity)


def instantiate_poly(scheme: Sequence[Type], actual: Sequence[Type]) -> dict[str, Type]:
    """Most general unifier of a polymorphic scheme with ground argument types."""
    names = set().union(*(type_vars(t) for t in scheme)) if scheme else set()
    u = Unifier(flexible=names)
    if len(scheme) != len(actual) or not all(u.unify(s, a) for s, a in zip(scheme, actual)):
        raise TypeCheckError(
            ErrorKind.POLY_INSTANTIATION_FAILURE,
            f"cannot instantiate ({', '.join(render(t) for t in scheme)}) "
            f"with ({', '.join(render(t) for t in actual)})",
        )
    return {n: u.resolve(TypeVar(n)) for n in sorted(names)}


def infer_types(gamma: TypingContext, f: Formula, schemes: Schemes = {}) -> dict[str, Type]:
    """Types of every variable of `f`, inferring undeclared ones from their constraints.

    Used to type the fresh variables of solver answers; a variable no
    constraint pins down keeps an unresolved `?k` type.
    """
    checker = _Checker(gamma, schemes, infer_undeclared=True)
    for c in iter_constraints(f):
        checker.constraint(c)
    out = {name: checker.u.resolve(t) for name, t in checker.inferred.items()}
    for name in free_vars(f):
        if name in gamma.var_types:
            out[name] = gamma.var_types[name]
    return out


__all__ = [
    "TypingContext",
    "Unifier",
    "collect_context",
    "infer_term_type",
    "check_constraint",
    "check_formula",
    "typecheck_formula",
    "build_D",
    "check_directive",
    "check_clause",
    "instantiate_poly",
    "infer_types",
    "constraint_arg_types",
]


def constraint_arg_types(gamma: TypingContext, c: Constraint, schemes: Schemes = {}) -> list[Type]:
    """Resolved argument types of a well-typed constraint; leftover `?k` default to int."""
    return [_default_int(t) for t in _Checker(gamma, schemes).constraint(c)]


def _default_int(t: Type) -> Type:
    if isinstance(t, TypeVar) and t.name.startswith("?"):
        return INT
    if isinstance(t, Prod):
        return Prod(_default_int(t.left), _default_int(t.right))
    if isinstance(t, SetType):
        return SetType(_default_int(t.elem))
    return t
