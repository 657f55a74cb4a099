"""Brute-force semantics over bounded finite domains.

The oracle never looks at the solver's rewrite rules or at the T_SET
definitions of derived constraints: every predicate is evaluated from its
set-theoretic meaning. It decides truth at a `DomainBound` only, so every
report carries the bound it was computed at.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping, Optional, Sequence, Union

from .ast import (
    INT,
    And,
    Atom,
    Atomic,
    Basic,
    Constraint,
    Dec,
    EmptySet,
    Enum,
    FalseF,
    Formula,
    IntLit,
    IntOp,
    IntType,
    Interval,
    Or,
    Pair,
    Prod,
    SetCons,
    SetType,
    Tagged,
    Term,
    TrueF,
    Type,
    TypeVar,
    Var,
    conjoin,
    conjuncts,
    free_vars,
    set_term,
    vars_in_order,
)
from .config import DomainBound
from .errors import ExplosionGuard, NotDerived, UnboundVariable
from .parser import render
from .solver import AnswerFormula
from .typechecker import Schemes, TypingContext, collect_context, infer_types

logger = logging.getLogger(__name__)

# int | Atom | Tagged | (value, value) | frozenset of values
Value = Union[int, Atom, Tagged, tuple, frozenset]
Valuation = dict[str, Value]


# --- Ground values ---


def sort_key(v: Value) -> tuple:
    """Total order: ints < atoms < tagged < pairs < sets, lexicographic within."""
    if isinstance(v, bool):
        raise TypeError(f"not a ground value: {v!r}")
    if isinstance(v, int):
        return (0, v)
    if isinstance(v, Atom):
        return (1, v.name)
    if isinstance(v, Tagged):
        return (2, v.base, v.atom)
    if isinstance(v, tuple):
        return (3, sort_key(v[0]), sort_key(v[1]))
    if isinstance(v, frozenset):
        return (4, tuple(sorted(sort_key(e) for e in v)))
    raise TypeError(f"not a ground value: {v!r}")


def value_term(v: Value) -> Term:
    if isinstance(v, int):
        return IntLit(v)
    if isinstance(v, (Atom, Tagged)):
        return v
    if isinstance(v, tuple):
        return Pair(value_term(v[0]), value_term(v[1]))
    return set_term(value_term(e) for e in sorted(v, key=sort_key))


def render_value(v: Value) -> str:
    return render(value_term(v))


def render_valuation(v: Mapping[str, Value]) -> str:
    return ", ".join(f"{name} = {render_value(v[name])}" for name in v)


class _IllTyped(Exception):
    pass


def _is_int(v: Value) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _int(v: Value) -> int:
    if not _is_int(v):
        raise _IllTyped
    return v  # type: ignore[return-value]


def _set(v: Value) -> frozenset:
    if not isinstance(v, frozenset):
        raise _IllTyped
    return v


def _rel(v: Value) -> frozenset:
    s = _set(v)
    if not all(isinstance(e, tuple) for e in s):
        raise _IllTyped
    return s


def eval_term(t: Term, v: Mapping[str, Value]) -> Value:
    if isinstance(t, IntLit):
        return t.value
    if isinstance(t, IntOp):
        a, b = _int(eval_term(t.left, v)), _int(eval_term(t.right, v))
        return a + b if t.op == "+" else a - b if t.op == "-" else a * b
    if isinstance(t, (Atom, Tagged)):
        return t
    if isinstance(t, Var):
        if t.name not in v:
            raise UnboundVariable(f"variable {t.name} has no value")
        return v[t.name]
    if isinstance(t, EmptySet):
        return frozenset()
    if isinstance(t, SetCons):
        return _set(eval_term(t.rest, v)) | {eval_term(t.elem, v)}
    if isinstance(t, Interval):
        lo, hi = _int(eval_term(t.lo, v)), _int(eval_term(t.hi, v))
        return frozenset(range(lo, hi + 1))
    if isinstance(t, Pair):
        return (eval_term(t.fst, v), eval_term(t.snd, v))
    raise TypeError(f"not a term: {t!r}")


# --- Predicate meanings ---


def _un(a, b, c) -> bool:
    return _set(c) == _set(a) | _set(b)


def _disj(a, b) -> bool:
    return not (_set(a) & _set(b))


def _size(a, n) -> bool:
    return len(_set(a)) == _int(n)


def _id(a, r) -> bool:
    return _set(r) == frozenset((x, x) for x in _set(a))


def _inv(r, s) -> bool:
    return _rel(s) == frozenset((y, x) for x, y in _rel(r))


def _comp(r, s, t) -> bool:
    s_pairs = _rel(s)
    joined = frozenset((x, z) for x, y in _rel(r) for y2, z in s_pairs if y == y2)
    return _rel(t) == joined


def _pfun(f) -> bool:
    pairs = _rel(f)
    return len({x for x, _ in pairs}) == len(pairs)


def _in(x, a) -> bool:
    return isinstance(a, frozenset) and x in a


MEANINGS: dict[tuple[str, int], Callable[..., bool]] = {
    ("=", 2): lambda a, b: a == b,
    ("neq", 2): lambda a, b: a != b,
    ("in", 2): _in,
    ("nin", 2): lambda x, a: not _in(x, a),
    ("=<", 2): lambda a, b: _int(a) <= _int(b),
    ("<", 2): lambda a, b: _int(a) < _int(b),
    (">", 2): lambda a, b: _int(a) > _int(b),
    (">=", 2): lambda a, b: _int(a) >= _int(b),
    ("un", 3): _un,
    ("disj", 2): _disj,
    ("size", 2): _size,
    ("id", 2): _id,
    ("inv", 2): _inv,
    ("comp", 3): _comp,
    ("subset", 2): lambda a, b: _set(a) <= _set(b),
    ("inters", 3): lambda a, b, c: _set(c) == _set(a) & _set(b),
    ("diff", 3): lambda a, b, c: _set(c) == _set(a) - _set(b),
    ("nun", 3): lambda a, b, c: not _un(a, b, c),
    ("ndisj", 2): lambda a, b: not _disj(a, b),
    ("nsubset", 2): lambda a, b: not _set(a) <= _set(b),
    ("pfun", 1): _pfun,
    ("npfun", 1): lambda f: not _pfun(f),
}


def eval_constraint(c: Constraint, v: Mapping[str, Value]) -> bool:
    meaning = MEANINGS.get(c.key)
    if meaning is None:
        raise NotDerived(f"the oracle has no meaning for {c.name}/{c.arity}")
    try:
        return meaning(*(eval_term(t, v) for t in c.args))
    except _IllTyped:
        return False


def in_domain(value: Value, t: Type) -> bool:
    """Structural membership of `value` in the carrier of `t`."""
    if isinstance(t, IntType):
        return _is_int(value)
    if isinstance(t, Basic):
        return isinstance(value, Tagged) and value.base == t.name
    if isinstance(t, Enum):
        return isinstance(value, Atom) and value.name in t.atoms
    if isinstance(t, Prod):
        return isinstance(value, tuple) and in_domain(value[0], t.left) and in_domain(value[1], t.right)
    if isinstance(t, SetType):
        return isinstance(value, frozenset) and all(in_domain(e, t.elem) for e in value)
    return True


def eval(f: Formula, v: Mapping[str, Value]) -> bool:  # noqa: A001
    if isinstance(f, TrueF):
        return True
    if isinstance(f, FalseF):
        return False
    if isinstance(f, Dec):
        if f.var.name not in v:
            raise UnboundVariable(f"variable {f.var.name} has no value")
        return in_domain(v[f.var.name], f.type)
    if isinstance(f, Atomic):
        return eval_constraint(f.constraint, v)
    if isinstance(f, And):
        return eval(f.left, v) and eval(f.right, v)
    if isinstance(f, Or):
        return eval(f.left, v) or eval(f.right, v)
    raise TypeError(f"not a formula: {f!r}")


# --- Domains ---


def _constants(f: Formula) -> dict[str, set[str]]:
    """Atoms of each basic type written in `f`."""
    out: dict[str, set[str]] = {}

    def term(t: Term) -> None:
        if isinstance(t, Tagged):
            out.setdefault(t.base, set()).add(t.atom)
        elif isinstance(t, IntOp):
            term(t.left)
            term(t.right)
        elif isinstance(t, SetCons):
            term(t.elem)
            term(t.rest)
        elif isinstance(t, Interval):
            term(t.lo)
            term(t.hi)
        elif isinstance(t, Pair):
            term(t.fst)
            term(t.snd)

    def formula(g: Formula) -> None:
        if isinstance(g, Atomic):
            for a in g.constraint.args:
                term(a)
        elif isinstance(g, (And, Or)):
            formula(g.left)
            formula(g.right)

    formula(f)
    return out


@dataclass
class Domains:
    bound: DomainBound
    constants: Mapping[str, set[str]] = field(default_factory=dict)
    _cache: dict[tuple[Type, int], list[Value]] = field(default_factory=dict, repr=False)

    def pool(self, base: str) -> list[Value]:
        names = set(self.constants.get(base, ()))
        k = 1
        while len(names) < self.bound.atom_pool_size:
            names.add(f"a{k}")
            k += 1
        return sorted((Tagged(base, n) for n in names), key=sort_key)

    def of(self, t: Type, level: int = 0) -> list[Value]:
        """Values of `t` within the bound, in canonical order."""
        key = (t, level)
        if key not in self._cache:
            self._cache[key] = sorted(self._build(t, level), key=sort_key)
        return self._cache[key]

    def _build(self, t: Type, level: int) -> list[Value]:
        b = self.bound
        if isinstance(t, (IntType, TypeVar)):
            return list(b.ints)
        if isinstance(t, Basic):
            return self.pool(t.name)
        if isinstance(t, Enum):
            return [Atom(a) for a in t.atoms]
        if isinstance(t, Prod):
            return list(itertools.product(self.of(t.left, level), self.of(t.right, level)))
        if isinstance(t, SetType):
            if level >= b.max_set_depth:
                return [frozenset()]
            elems = self.of(t.elem, level + 1)
            return [
                frozenset(combo)
                for r in range(min(b.max_set_cardinality, len(elems)) + 1)
                for combo in itertools.combinations(elems, r)
            ]
        raise TypeError(f"not a type: {t!r}")


# --- Enumeration ---


def _types_of(gamma: Union[TypingContext, Mapping[str, Type]]) -> Mapping[str, Type]:
    return gamma.var_types if isinstance(gamma, TypingContext) else gamma


class _Search:
    def __init__(self, f: Formula, types: Mapping[str, Type], domains: Domains, over: Sequence[str]):
        self.domains = domains
        self.order = list(over)
        missing = [n for n in self.order if n not in types]
        if missing:
            raise UnboundVariable(f"no type for variable {missing[0]}")
        self.types = types
        self.limit = domains.bound.max_valuations
        self.visited = 0
        self.parts = conjuncts(f)

    def run(self, fixed: Mapping[str, Value]) -> Iterator[Valuation]:
        v: Valuation = dict(fixed)
        todo = [n for n in self.order if n not in v]
        # Fixed variables count as assigned from the start.
        order = [n for n in self.order if n in v] + todo
        position = {n: i for i, n in enumerate(order)}
        # Each conjunct is checked at the first depth where all its variables have values.
        checks: dict[int, list[Formula]] = {}
        for part in self.parts:
            depth = max((position[n] + 1 for n in free_vars(part)), default=0)
            checks.setdefault(depth, []).append(part)
        start = len(order) - len(todo)
        if not all(eval(p, v) for d in range(start + 1) for p in checks.get(d, ())):
            return
        yield from self._extend(order, start, v, checks)

    def _extend(self, order: list[str], i: int, v: Valuation, checks: dict[int, list[Formula]]) -> Iterator[Valuation]:
        if i == len(order):
            yield {n: v[n] for n in self.order}
            return
        name = order[i]
        for value in self.domains.of(self.types[name]):
            self.visited += 1
            if self.visited > self.limit:
                raise ExplosionGuard(self.visited, self.limit)
            v[name] = value
            if all(eval(p, v) for p in checks.get(i + 1, ())):
                yield from self._extend(order, i + 1, v, checks)
        del v[name]


def _models(
    f: Formula,
    types: Mapping[str, Type],
    domains: Domains,
    over: Optional[Sequence[str]] = None,
    fixed: Mapping[str, Value] = {},
) -> Iterator[Valuation]:
    names = list(over) if over is not None else vars_in_order(f)
    for n in vars_in_order(f):
        if n not in names:
            names.append(n)
    return _Search(f, types, domains, names).run(fixed)


def enumerate_models(
    f: Formula,
    gamma: Union[TypingContext, Mapping[str, Type]],
    b: Optional[DomainBound] = None,
    over: Optional[Sequence[str]] = None,
    *,
    domains: Optional[Domains] = None,
) -> list[Valuation]:
    """Every valuation of the variables of `f` (plus `over`) within `b` that satisfies `f`.

    Atoms of basic types are drawn from the constants of `f` topped up to the
    pool size; pass `domains` to share one pool between several formulas.
    """
    domains = domains or Domains(b or DomainBound(), _constants(f))
    out = list(_models(f, _types_of(gamma), domains, over))
    out.sort(key=lambda v: tuple(sort_key(v[n]) for n in v))
    return out


def eval_exists(
    f: Formula,
    gamma: Union[TypingContext, Mapping[str, Type]],
    b: Optional[DomainBound] = None,
    fixed: Mapping[str, Value] = {},
    *,
    domains: Optional[Domains] = None,
) -> bool:
    """True when some extension of `fixed` within `b` satisfies `f`."""
    domains = domains or Domains(b or DomainBound(), _constants(f))
    return next(iter(_models(f, _types_of(gamma), domains, fixed=fixed)), None) is not None


def oracle_types(f: Formula, gamma: Optional[TypingContext] = None, schemes: Schemes = {}) -> dict[str, Type]:
    """Types for every variable of `f`: declared ones, then inferred; unconstrained ones default to int."""
    gamma = gamma or collect_context(f)
    types = infer_types(gamma, f, schemes)
    return {n: _default_int(t) for n, t in types.items()}


def _default_int(t: Type) -> Type:
    if isinstance(t, TypeVar):
        return INT
    if isinstance(t, Prod):
        return Prod(_default_int(t.left), _default_int(t.right))
    if isinstance(t, SetType):
        return SetType(_default_int(t.elem))
    return t


# --- Agreement ---


@dataclass
class Report:
    bound: str
    models: int
    missing: list[Valuation] = field(default_factory=list)
    extra: list[Valuation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.missing and not self.extra

    def render(self) -> str:
        if self.ok:
            return f"oracle agrees at bound {self.bound} ({self.models} model(s))"
        lines = [f"oracle disagrees at bound {self.bound}"]
        lines += [f"- {render_valuation(v)}" for v in self.missing]
        lines += [f"+ {render_valuation(v)}" for v in self.extra]
        return "\n".join(lines)


def _project(models: Sequence[Valuation], names: Sequence[str]) -> set[tuple]:
    return {tuple(m[n] for n in names) for m in models}


def agree(
    f: Formula,
    gamma: Optional[TypingContext],
    b: DomainBound,
    answers: Sequence[AnswerFormula],
    query_vars: Optional[Sequence[str]] = None,
    schemes: Schemes = {},
) -> Report:
    """Compare the models of `f` with the union of the answers' models, projected on the query variables."""
    whole = conjoin([f, *(a.as_formula() for a in answers)])
    types = oracle_types(whole, gamma or collect_context(f), schemes)
    names = list(query_vars) if query_vars is not None else vars_in_order(f)
    domains = Domains(b, _constants(whole))
    expected = _project(enumerate_models(f, types, over=names, domains=domains), names)
    got: set[tuple] = set()
    for a in answers:
        got |= _project(enumerate_models(a.as_formula(), types, over=names, domains=domains), names)

    def as_valuations(rows: set[tuple]) -> list[Valuation]:
        ordered = sorted(rows, key=lambda r: tuple(sort_key(x) for x in r))
        return [dict(zip(names, r)) for r in ordered]

    report = Report(b.label(), len(expected), as_valuations(expected - got), as_valuations(got - expected))
    logger.info("oracle check at %s: %d model(s), ok=%s", report.bound, report.models, report.ok)
    return report


__all__ = [
    "Value",
    "Valuation",
    "sort_key",
    "value_term",
    "render_value",
    "eval_term",
    "eval_constraint",
    "eval",
    "in_domain",
    "Domains",
    "enumerate_models",
    "eval_exists",
    "oracle_types",
    "Report",
    "agree",
]
