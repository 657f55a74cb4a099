"""SAT_SET: rewriting solver for T_SET constraint formulas.

A query is split into the disjuncts of its DNF, each becoming a `Store`. A
store is reduced by repeatedly selecting a pending constraint and rewriting
it with `rewrite_step`, which returns the alternative branches of the rule
that fires (an empty list means `false`). Choices are explored depth-first
with an explicit stack of cloned stores; the first branch continues in
place. Constraints no rule applies to are parked as solved and re-queued
when one of their variables gets bound. Integer constraints live in a
separate linear store (`intstore`). A store with nothing pending and a
consistent integer part is emitted as an `AnswerFormula`.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping, Optional, Sequence

from .ast import (
    EMPTY,
    INT,
    TRUE,
    Atom,
    Atomic,
    Constraint,
    Dec,
    EmptySet,
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
    Var,
    VarSupply,
    C,
    conjoin,
    constraint_lists,
    dnf_clauses,
    free_vars,
    occurs,
    set_parts,
    set_term,
    strip_decs,
    substitute,
    substitute_shared,
    term_parts,
    vars_in_order,
)
from .config import SolveOptions
from .errors import BudgetExhausted, ExplosionGuard, NoRuleApplies, UnknownPredicate
from .intstore import IntStatus, check_int_store, evaluate, normalize
from .parser import render
from .typechecker import Schemes, TypingContext, constraint_arg_types

logger = logging.getLogger(__name__)

# Recipe for the type of a fresh variable, relative to the rewritten
# constraint's argument types: ("arg", i), ("elem", i), ("fst", i),
# ("snd", i) or ("int", 0).
Recipe = tuple[str, int]

# Ground intervals are expanded to extensional sets up to this many elements.
MAX_INTERVAL_ELEMENTS = 10_000

# A rewrite step on a constraint of n nodes costs 1 + n // TERM_NODES_PER_STEP.
TERM_NODES_PER_STEP = 16


@dataclass(frozen=True)
class Branch:
    constraints: tuple[Constraint, ...] = ()
    bindings: tuple[tuple[str, Term], ...] = ()
    fresh: tuple[tuple[str, Recipe], ...] = ()


TRUE_BRANCH = Branch()

# Callback resolving derived and user predicates into alternative bodies.
Expander = Callable[[Constraint], Optional[list[Formula]]]


# --- Term classification ---


def _is_var(t: Term) -> bool:
    return isinstance(t, Var)


def _is_set_like(t: Term) -> bool:
    return isinstance(t, (Var, EmptySet, SetCons, Interval))


def _kind(t: Term) -> str:
    if isinstance(t, (IntLit, IntOp)):
        return "int"
    if isinstance(t, Atom):
        return "atom"
    if isinstance(t, Tagged):
        return "tagged"
    if isinstance(t, (EmptySet, SetCons, Interval)):
        return "set"
    if isinstance(t, Pair):
        return "pair"
    return "var"


def _plus(t: Term, k: int) -> Term:
    if isinstance(t, IntLit):
        return IntLit(t.value + k)
    if k == 0:
        return t
    return IntOp("+", t, IntLit(k)) if k > 0 else IntOp("-", t, IntLit(-k))


def _interval_bounds(t: Term) -> Optional[tuple[int, int]]:
    if not isinstance(t, Interval):
        return None
    lo, hi = evaluate(t.lo), evaluate(t.hi)
    if lo is None or hi is None:
        return None
    return lo, hi


def _ground_interval(t: Term) -> Optional[Term]:
    """The extensional set denoted by an interval with integer-valued bounds."""
    bounds = _interval_bounds(t)
    if bounds is None:
        return None
    lo, hi = bounds
    if hi - lo + 1 > MAX_INTERVAL_ELEMENTS:
        raise ExplosionGuard(hi - lo + 1, MAX_INTERVAL_ELEMENTS, what="interval")
    return set_term([IntLit(i) for i in range(lo, hi + 1)])


def _weight(x, memo: dict[int, int]) -> int:
    """Number of nodes of `x` written out as a tree; shared subterms are counted once per use."""
    if isinstance(x, Constraint):
        return 1 + sum(_weight(a, memo) for a in x.args)
    if not isinstance(x, (SetCons, IntOp, Interval, Pair)):
        return 1
    hit = memo.get(id(x))
    if hit is None:
        hit = memo[id(x)] = 1 + sum(_weight(p, memo) for p in term_parts(x))
    return hit


def _closed_elems(t: Term) -> Optional[list[Term]]:
    elems, tail = set_parts(t)
    return elems if isinstance(tail, EmptySet) else None


def is_int_constraint(c: Constraint) -> bool:
    if c.name == "=<" and c.arity == 2:
        return True
    if c.name in ("=", "neq") and c.arity == 2:
        a, b = c.args
        if isinstance(a, IntOp) or isinstance(b, IntOp):
            return True
        if c.name == "neq":
            return (isinstance(a, IntLit) and isinstance(b, (Var, IntLit))) or (
                isinstance(b, IntLit) and isinstance(a, Var)
            )
    return False


# --- Store ---


class _Resolved(Mapping[str, Term]):
    """Fully dereferenced view of a triangular substitution."""

    def __init__(self, subst: dict[str, Term]):
        self.subst = subst
        self.cache: dict[str, Term] = {}
        self.memo: dict = {}

    def __getitem__(self, name: str) -> Term:
        hit = self.cache.get(name)
        if hit is None:
            hit = self.cache[name] = substitute_shared(self.subst[name], self, self.memo)
        return hit

    def get(self, name, default=None):
        return self[name] if name in self.subst else default

    def __contains__(self, name) -> bool:
        return name in self.subst

    def __iter__(self) -> Iterator[str]:
        return iter(self.subst)

    def __len__(self) -> int:
        return len(self.subst)


@dataclass
class Store:
    pending: list[Constraint] = field(default_factory=list)
    solved: list[Constraint] = field(default_factory=list)
    # triangular: a bound term may mention variables bound later
    subst: dict[str, Term] = field(default_factory=dict)
    ints: list[Constraint] = field(default_factory=list)
    int_status: IntStatus = IntStatus.SAT
    _view: Optional[_Resolved] = field(default=None, repr=False, compare=False)

    def clone(self) -> "Store":
        return Store(list(self.pending), list(self.solved), dict(self.subst), list(self.ints), self.int_status)

    def resolve(self, x):
        if not self.subst:
            return x
        if self._view is None:
            self._view = _Resolved(self.subst)
        return substitute_shared(x, self._view, self._view.memo)

    def bind(self, name: str, t: Term) -> None:
        t = self.resolve(t)
        if t == Var(name):
            return
        self.subst[name] = t
        self._view = None
        woken = [c for c in self.solved if name in free_vars(c)]
        if woken:
            self.solved = [c for c in self.solved if name not in free_vars(c)]
            self.pending.extend(woken)

    def take(self) -> Constraint:
        for i, c in enumerate(self.pending):
            if c.name == "=":
                return self.pending.pop(i)
        return self.pending.pop(0)


# --- Rewrite rules ---


def _eq(c: Constraint, supply: VarSupply) -> list[Branch]:
    a, b = c.args
    if a == b:
        return [TRUE_BRANCH]
    if not _is_var(a) and _is_var(b):
        a, b = b, a
    if isinstance(a, Var):
        if isinstance(b, Var):
            if not supply.is_fresh(a.name) and supply.is_fresh(b.name):
                return [Branch(bindings=((b.name, a),))]
            return [Branch(bindings=((a.name, b),))]
        if occurs(a.name, b):
            elems, tail = set_parts(b)
            if tail == a and not any(occurs(a.name, e) for e in elems):
                n = supply.fresh("N")
                return [Branch(bindings=((a.name, set_term(elems, n)),), fresh=((n.name, ("arg", 0)),))]
            return []
        return [Branch(bindings=((a.name, b),))]
    ka, kb = _kind(a), _kind(b)
    if ka != kb:
        return []
    if ka in ("int", "atom", "tagged"):
        return []
    if isinstance(a, Pair) and isinstance(b, Pair):
        return [Branch((C("=", a.fst, b.fst), C("=", a.snd, b.snd)))]
    # both sets
    for x, y in ((a, b), (b, a)):
        expanded = _ground_interval(x)
        if expanded is not None:
            return [Branch((C("=", expanded, y),))]
    if isinstance(a, EmptySet) or isinstance(b, EmptySet):
        other = b if isinstance(a, EmptySet) else a
        if isinstance(other, Interval):
            return [Branch((C("=<", _plus(other.hi, 1), other.lo),))]
        return []
    if isinstance(a, Interval) and isinstance(b, Interval):
        return [
            Branch((C("=", a.lo, b.lo), C("=", a.hi, b.hi), C("=<", a.lo, a.hi))),
            Branch((C("=<", _plus(a.hi, 1), a.lo), C("=<", _plus(b.hi, 1), b.lo))),
        ]
    if isinstance(a, Interval) or isinstance(b, Interval):
        raise NoRuleApplies(render(c))
    assert isinstance(a, SetCons) and isinstance(b, SetCons)
    elems_a, tail_a = set_parts(a)
    elems_b, tail_b = set_parts(b)
    if isinstance(tail_a, Var) and tail_a == tail_b:
        return [
            Branch(
                tuple(C("in", t, b) for t in elems_a if t not in elems_b)
                + tuple(C("in", s, a) for s in elems_b if s not in elems_a)
            )
        ]
    x, rest_a, y, rest_b = a.elem, a.rest, b.elem, b.rest
    n = supply.fresh("N")
    return [
        Branch((C("=", x, y), C("=", rest_a, rest_b))),
        Branch((C("=", x, y), C("=", a, rest_b))),
        Branch((C("=", x, y), C("=", rest_a, b))),
        Branch((C("=", rest_a, SetCons(y, n)), C("=", SetCons(x, n), rest_b)), fresh=((n.name, ("arg", 0)),)),
    ]


def _neq(c: Constraint, supply: VarSupply) -> list[Branch]:
    a, b = c.args
    if a == b:
        return []
    if not _is_var(a) and _is_var(b):
        a, b = b, a
    if isinstance(a, Var):
        if isinstance(b, Var) or not occurs(a.name, b):
            raise NoRuleApplies(render(c))
        elems, tail = set_parts(b)
        if tail == a and not any(occurs(a.name, e) for e in elems):
            return [Branch((C("nin", e, a),)) for e in elems]
        return [TRUE_BRANCH]
    ka, kb = _kind(a), _kind(b)
    if ka != kb or ka in ("int", "atom", "tagged"):
        return [TRUE_BRANCH]
    if isinstance(a, Pair) and isinstance(b, Pair):
        return [Branch((C("neq", a.fst, b.fst),)), Branch((C("neq", a.snd, b.snd),))]
    if isinstance(a, EmptySet) or isinstance(b, EmptySet):
        other = b if isinstance(a, EmptySet) else a
        if isinstance(other, Interval):
            return [Branch((C("=<", other.lo, other.hi),))]
        return [TRUE_BRANCH]
    n = supply.fresh("N")
    fresh = ((n.name, ("elem", 0)),)
    return [
        Branch((C("in", n, a), C("nin", n, b)), fresh=fresh),
        Branch((C("in", n, b), C("nin", n, a)), fresh=fresh),
    ]


def _in(c: Constraint, supply: VarSupply) -> list[Branch]:
    x, s = c.args
    if isinstance(s, EmptySet):
        return []
    if isinstance(s, SetCons):
        return [Branch((C("=", x, s.elem),)), Branch((C("in", x, s.rest),))]
    if isinstance(s, Interval):
        return [Branch((C("=<", s.lo, x), C("=<", x, s.hi)))]
    if isinstance(s, Var):
        n = supply.fresh("N")
        return [Branch((C("=", s, SetCons(x, n)),), fresh=((n.name, ("arg", 1)),))]
    return []


def _nin(c: Constraint, supply: VarSupply) -> list[Branch]:
    x, s = c.args
    if isinstance(s, EmptySet):
        return [TRUE_BRANCH]
    if isinstance(s, SetCons):
        return [Branch((C("neq", x, s.elem), C("nin", x, s.rest)))]
    if isinstance(s, Interval):
        return [Branch((C("=<", x, _plus(s.lo, -1)),)), Branch((C("=<", _plus(s.hi, 1), x),))]
    if isinstance(s, Var):
        raise NoRuleApplies(render(c))
    return [TRUE_BRANCH]


def _expand_intervals(c: Constraint) -> Optional[Constraint]:
    args = [_ground_interval(a) or a for a in c.args]
    if tuple(args) == c.args:
        return None
    return Constraint(c.name, tuple(args), c.loc)


def _un(c: Constraint, supply: VarSupply) -> list[Branch]:
    a, b, s = c.args
    if not all(_is_set_like(t) for t in c.args):
        return []
    if isinstance(a, EmptySet):
        return [Branch((C("=", b, s),))]
    if isinstance(b, EmptySet):
        return [Branch((C("=", a, s),))]
    if isinstance(s, EmptySet):
        return [Branch((C("=", a, EMPTY), C("=", b, EMPTY)))]
    # subset shapes: un({x/R},B,B) and un(A,{y/R},A)
    if isinstance(a, SetCons) and b == s:
        return [Branch((C("in", a.elem, b), C("un", a.rest, b, b)))]
    if isinstance(b, SetCons) and a == s:
        return [Branch((C("in", b.elem, a), C("un", a, b.rest, a)))]
    expanded = _expand_intervals(c)
    if expanded is not None:
        return [Branch((expanded,))]
    if any(isinstance(t, Interval) for t in c.args):
        raise NoRuleApplies(render(c))
    if isinstance(s, Var):
        for first, second in ((a, b), (b, a)):
            elems = _closed_elems(first)
            if elems:
                return [Branch((C("=", s, set_term(elems, second)),))]
    for first, second in ((a, b), (b, a)):
        if isinstance(first, SetCons):
            x = first.elem
            n1, n, n2 = supply.fresh("N"), supply.fresh("N"), supply.fresh("N")
            common = (C("=", first, SetCons(x, n1)), C("nin", x, n1), C("=", s, SetCons(x, n)))
            return [
                Branch(common + (C("nin", x, second), C("un", n1, second, n)), fresh=((n1.name, ("arg", 0)), (n.name, ("arg", 0)))),
                Branch(
                    common + (C("=", second, SetCons(x, n2)), C("nin", x, n2), C("un", n1, n2, n)),
                    fresh=((n1.name, ("arg", 0)), (n.name, ("arg", 0)), (n2.name, ("arg", 0))),
                ),
            ]
    if isinstance(s, SetCons):
        x = s.elem
        n, n1, n2 = supply.fresh("N"), supply.fresh("N"), supply.fresh("N")
        common = (C("=", s, SetCons(x, n)), C("nin", x, n))
        f2 = ((n.name, ("arg", 0)), (n1.name, ("arg", 0)))
        f3 = f2 + ((n2.name, ("arg", 0)),)
        return [
            Branch(common + (C("=", a, SetCons(x, n1)), C("nin", x, n1), C("nin", x, b), C("un", n1, b, n)), fresh=f2),
            Branch(common + (C("=", b, SetCons(x, n1)), C("nin", x, n1), C("nin", x, a), C("un", a, n1, n)), fresh=f2),
            Branch(
                common
                + (C("=", a, SetCons(x, n1)), C("nin", x, n1), C("=", b, SetCons(x, n2)), C("nin", x, n2), C("un", n1, n2, n)),
                fresh=f3,
            ),
        ]
    raise NoRuleApplies(render(c))


def _disj(c: Constraint, supply: VarSupply) -> list[Branch]:
    a, b = c.args
    if not (_is_set_like(a) and _is_set_like(b)):
        return []
    if isinstance(a, EmptySet) or isinstance(b, EmptySet):
        return [TRUE_BRANCH]
    if a == b:
        return [Branch((C("=", a, EMPTY),))]
    expanded = _expand_intervals(c)
    if expanded is not None:
        return [Branch((expanded,))]
    if isinstance(a, SetCons):
        return [Branch((C("nin", a.elem, b), C("disj", a.rest, b)))]
    if isinstance(b, SetCons):
        return [Branch((C("nin", b.elem, a), C("disj", a, b.rest)))]
    raise NoRuleApplies(render(c))


def _size(c: Constraint, supply: VarSupply) -> list[Branch]:
    s, m = c.args
    if not _is_set_like(s) or _kind(m) not in ("int", "var"):
        return []
    if isinstance(s, EmptySet):
        return [Branch((C("=", m, IntLit(0)),))]
    if isinstance(s, SetCons):
        x, rest = s.elem, s.rest
        n, big_n = supply.fresh("n"), supply.fresh("N")
        return [
            Branch(
                (C("nin", x, rest), C("=", m, IntOp("+", IntLit(1), n)), C("size", rest, n), C("=<", IntLit(0), n)),
                fresh=((n.name, ("int", 0)),),
            ),
            Branch(
                (C("=", rest, SetCons(x, big_n)), C("nin", x, big_n), C("size", rest, m)),
                fresh=((big_n.name, ("arg", 0)),),
            ),
        ]
    if isinstance(s, Interval):
        return [
            Branch((C("=<", _plus(s.hi, 1), s.lo), C("=", m, IntLit(0)))),
            Branch((C("=<", s.lo, s.hi), C("=", m, _plus(IntOp("-", s.hi, s.lo), 1)))),
        ]
    if isinstance(m, IntLit):
        k = m.value
        if k < 0:
            return []
        if k == 0:
            return [Branch((C("=", s, EMPTY),))]
        elems = [supply.fresh("E") for _ in range(k)]
        distinct = tuple(C("neq", x, y) for x, y in itertools.combinations(elems, 2))
        return [Branch((C("=", s, set_term(elems)),) + distinct, fresh=tuple((e.name, ("elem", 0)) for e in elems))]
    raise NoRuleApplies(render(c))


def _id(c: Constraint, supply: VarSupply) -> list[Branch]:
    a, r = c.args
    if not (_is_set_like(a) and _is_set_like(r)):
        return []
    if isinstance(a, EmptySet):
        return [Branch((C("=", r, EMPTY),))]
    if isinstance(r, EmptySet):
        return [Branch((C("=", a, EMPTY),))]
    expanded = _expand_intervals(c)
    if expanded is not None:
        return [Branch((expanded,))]
    if isinstance(a, SetCons):
        x = a.elem
        n1, n = supply.fresh("N"), supply.fresh("N")
        xx = Pair(x, x)
        return [
            Branch(
                (C("=", a, SetCons(x, n1)), C("nin", x, n1), C("=", r, SetCons(xx, n)), C("nin", xx, n), C("id", n1, n)),
                fresh=((n1.name, ("arg", 0)), (n.name, ("arg", 1))),
            )
        ]
    if isinstance(r, SetCons):
        y, n1, n = supply.fresh("Y"), supply.fresh("N"), supply.fresh("N")
        yy = Pair(y, y)
        return [
            Branch(
                (
                    C("=", r.elem, yy),
                    C("=", a, SetCons(y, n1)),
                    C("nin", y, n1),
                    C("=", r, SetCons(yy, n)),
                    C("nin", yy, n),
                    C("id", n1, n),
                ),
                fresh=((y.name, ("elem", 0)), (n1.name, ("arg", 0)), (n.name, ("arg", 1))),
            )
        ]
    raise NoRuleApplies(render(c))


def _pair_intro(c: Constraint, elem: Term, index: int, supply: VarSupply) -> list[Branch]:
    """Re-post `c` with a non-pair relation element split into a pair of fresh variables."""
    if not isinstance(elem, Var):
        return []
    x, y = supply.fresh("X"), supply.fresh("Y")
    return [Branch((C("=", elem, Pair(x, y)), c), fresh=((x.name, ("fst", index)), (y.name, ("snd", index))))]


def _inv(c: Constraint, supply: VarSupply) -> list[Branch]:
    r, s = c.args
    if not (_is_set_like(r) and _is_set_like(s)):
        return []
    if isinstance(r, EmptySet):
        return [Branch((C("=", s, EMPTY),))]
    if isinstance(s, EmptySet):
        return [Branch((C("=", r, EMPTY),))]
    expanded = _expand_intervals(c)
    if expanded is not None:
        return [Branch((expanded,))]
    if isinstance(r, SetCons):
        p = r.elem
        if not isinstance(p, Pair):
            return _pair_intro(c, p, 0, supply)
        n1, n = supply.fresh("N"), supply.fresh("N")
        q = Pair(p.snd, p.fst)
        return [
            Branch(
                (C("=", r, SetCons(p, n1)), C("nin", p, n1), C("=", s, SetCons(q, n)), C("nin", q, n), C("inv", n1, n)),
                fresh=((n1.name, ("arg", 0)), (n.name, ("arg", 1))),
            )
        ]
    if isinstance(s, SetCons):
        return [Branch((C("inv", s, r),))]
    raise NoRuleApplies(render(c))


def _comp(c: Constraint, supply: VarSupply) -> list[Branch]:
    r, s, t = c.args
    if not all(_is_set_like(x) for x in c.args):
        return []
    if isinstance(r, EmptySet) or isinstance(s, EmptySet):
        return [Branch((C("=", t, EMPTY),))]
    expanded = _expand_intervals(c)
    if expanded is not None:
        return [Branch((expanded,))]
    if not (isinstance(r, SetCons) and isinstance(s, SetCons)):
        raise NoRuleApplies(render(c))
    for index, rel in ((0, r), (1, s)):
        elems, _ = set_parts(rel)
        for e in elems:
            if not isinstance(e, Pair):
                return _pair_intro(c, e, index, supply)
    xu, vz = r.elem, s.elem
    assert isinstance(xu, Pair) and isinstance(vz, Pair)
    if isinstance(t, EmptySet):
        return [
            Branch(
                (
                    C("neq", xu.snd, vz.fst),
                    C("comp", SetCons(xu, EMPTY), s.rest, EMPTY),
                    C("comp", r.rest, SetCons(vz, EMPTY), EMPTY),
                    C("comp", r.rest, s.rest, EMPTY),
                )
            )
        ]
    if not isinstance(r.rest, EmptySet):
        # comp distributes over the pairs of the left relation
        t1, t2 = supply.fresh("T"), supply.fresh("T")
        return [
            Branch(
                (C("comp", SetCons(xu, EMPTY), s, t1), C("comp", r.rest, s, t2), C("un", t1, t2, t)),
                fresh=((t1.name, ("arg", 2)), (t2.name, ("arg", 2))),
            )
        ]
    # one pair on the left: walk the right relation, joining or skipping each pair
    t3 = supply.fresh("T")
    return [
        Branch(
            (C("=", xu.snd, vz.fst), C("un", SetCons(Pair(xu.fst, vz.snd), EMPTY), t3, t), C("comp", r, s.rest, t3)),
            fresh=((t3.name, ("arg", 2)),),
        ),
        Branch((C("neq", xu.snd, vz.fst), C("comp", r, s.rest, t))),
    ]


def _pfun(c: Constraint, supply: VarSupply) -> list[Branch]:
    (f,) = c.args
    if not _is_set_like(f):
        return []
    if isinstance(f, EmptySet):
        return [TRUE_BRANCH]
    expanded = _expand_intervals(c)
    if expanded is not None:
        return [Branch((expanded,))]
    if isinstance(f, Interval):
        return [Branch((C("=<", _plus(f.hi, 1), f.lo),))]
    if not isinstance(f, SetCons):
        raise NoRuleApplies(render(c))
    p = f.elem
    if not isinstance(p, Pair):
        return _pair_intro(c, p, 0, supply)
    # the first pair is either alone on its first component or repeated in the tail
    xx = SetCons(Pair(p.fst, p.fst), EMPTY)
    n = supply.fresh("N")
    return [
        Branch((C("comp", xx, f.rest, EMPTY), C("pfun", f.rest))),
        Branch(
            (C("=", f.rest, SetCons(p, n)), C("nin", p, n), C("comp", xx, n, EMPTY), C("pfun", n)),
            fresh=((n.name, ("arg", 0)),),
        ),
    ]


_RULES: dict[tuple[str, int], Callable[[Constraint, VarSupply], list[Branch]]] = {
    ("=", 2): _eq,
    ("neq", 2): _neq,
    ("in", 2): _in,
    ("nin", 2): _nin,
    ("un", 3): _un,
    ("disj", 2): _disj,
    ("size", 2): _size,
    ("id", 2): _id,
    ("inv", 2): _inv,
    ("comp", 3): _comp,
    ("pfun", 1): _pfun,
}


def rewrite_step(c: Constraint, store: Optional[Store] = None, supply: Optional[VarSupply] = None) -> list[Branch]:
    """Branches of the rule that fires on `c`; [] is false.

    Raises NoRuleApplies when `c` is in solved form. Integer constraints are
    always left to the integer store.
    """
    if store is not None:
        c = store.resolve(c)
    if is_int_constraint(c):
        raise NoRuleApplies(render(c))
    rule = _RULES.get(c.key)
    if rule is None:
        raise NoRuleApplies(f"{c.name}/{c.arity} is not a primitive constraint")
    return rule(c, supply or VarSupply())


def is_irreducible(c: Constraint, store: Optional[Store] = None) -> bool:
    try:
        rewrite_step(c, store)
    except NoRuleApplies:
        return True
    return False


def solved_form_class(c: Constraint) -> Optional[str]:
    """Name of the solved form `c` belongs to, or None if it is not one."""
    if is_int_constraint(c):
        return "int"
    args = c.args
    if any(isinstance(a, Interval) and _interval_bounds(a) is None for a in args) and c.name in (
        "=",
        "un",
        "disj",
        "id",
        "inv",
        "comp",
    ):
        return "interval"
    if c.name == "neq" and any(isinstance(a, Var) for a in args):
        v = args[0] if isinstance(args[0], Var) else args[1]
        other = args[1] if v is args[0] else args[0]
        if isinstance(other, Var) or not occurs(v.name, other):  # type: ignore[union-attr]
            return "neq-var"
    if c.name == "nin" and isinstance(args[1], Var):
        return "nin-var"
    if c.name in ("un", "disj", "id", "inv", "pfun") and all(isinstance(a, Var) for a in args):
        return f"{c.name}-vars"
    if c.name == "size" and isinstance(args[0], Var) and not isinstance(args[1], IntLit):
        return "size-var"
    if c.name == "comp" and (isinstance(args[0], Var) or isinstance(args[1], Var)):
        return "comp-vars"
    return None


# --- Answers ---


@dataclass(frozen=True)
class AnswerFormula:
    bindings: tuple[tuple[str, Term], ...]
    residual: tuple[Constraint, ...]
    int_status: IntStatus = IntStatus.SAT

    def as_formula(self) -> Formula:
        eqs = [Atomic(C("=", Var(name), t)) for name, t in self.bindings]
        return conjoin(eqs + [Atomic(c) for c in self.residual])

    @property
    def is_trivial(self) -> bool:
        return not self.bindings and not self.residual

    def render(self) -> str:
        if self.is_trivial:
            return "yes"
        lines = [f"{name} = {render(t)}" for name, t in self.bindings]
        if self.residual:
            lines.append("Constraint: " + ", ".join(render(c) for c in self.residual))
        return "\n".join(lines)


def render_answers(answers: Sequence[AnswerFormula]) -> str:
    if not answers:
        return "no"
    return "\n;\n".join(a.render() for a in answers)


# --- Solver ---


class Solver:
    def __init__(
        self,
        supply: Optional[VarSupply] = None,
        options: Optional[SolveOptions] = None,
        expander: Optional[Expander] = None,
    ):
        self.supply = supply or VarSupply()
        self.options = options or SolveOptions()
        self.expander = expander
        self.steps = 0
        self.emitted = 0

    def _tick(self, cost: int = 1) -> None:
        self.steps += cost
        if self.steps > self.options.step_budget:
            raise BudgetExhausted(self.options.step_budget, self.emitted)

    def solve(self, f: Formula) -> Iterator[AnswerFormula]:
        """Answers of `f` in depth-first order, at most `max_answers` of them."""
        query_vars = [v for v in vars_in_order(f) if not self.supply.is_fresh(v)]
        stack = [Store(pending=constraint_lists(d)) for d in reversed(dnf_clauses(strip_decs(f)))]
        seen: set[AnswerFormula] = set()
        while stack:
            store = stack.pop()
            if not self._reduce(store, stack):
                continue
            answer = self._answer(store, query_vars)
            if answer is None or answer in seen:
                continue
            seen.add(answer)
            self.emitted += 1
            logger.debug("answer %d after %d steps", self.emitted, self.steps)
            yield answer
            if self.emitted >= self.options.max_answers:
                return

    def _apply(self, store: Store, branch: Branch) -> None:
        for name, t in branch.bindings:
            current = store.resolve(Var(name))
            if isinstance(current, Var):
                store.bind(current.name, t)
            else:
                store.pending.insert(0, C("=", current, t))
        store.pending.extend(branch.constraints)

    def _alternatives(self, c: Constraint) -> list[Branch]:
        bodies = self.expander(c) if self.expander is not None else None
        if bodies is None:
            raise UnknownPredicate(f"unknown predicate {c.name}/{c.arity}")
        return [Branch(tuple(constraint_lists(d))) for body in bodies for d in dnf_clauses(strip_decs(body))]

    def _reduce(self, store: Store, stack: list[Store]) -> bool:
        while True:
            while store.pending:
                c = store.resolve(store.take())
                # large terms are charged by size
                self._tick(1 + _weight(c, {}) // TERM_NODES_PER_STEP)
                if is_int_constraint(c):
                    store.ints.append(c)
                    if not self._check_ints(store, exhaustive=False):
                        return False
                    continue
                if c.key in _RULES:
                    try:
                        branches = rewrite_step(c, supply=self.supply)
                    except NoRuleApplies:
                        self._park(store, c)
                        continue
                else:
                    branches = self._alternatives(c)
                logger.debug("rewrite %s -> %d branch(es)", c, len(branches))
                if not branches:
                    return False
                for b in reversed(branches[1:]):
                    alt = store.clone()
                    self._apply(alt, b)
                    stack.append(alt)
                self._apply(store, branches[0])
            if not self._check_ints(store, exhaustive=True):
                return False
            if not store.pending:
                return True

    def _park(self, store: Store, c: Constraint) -> None:
        if c.name == "neq" and isinstance(c.args[1], Var) and not isinstance(c.args[0], Var):
            c = Constraint("neq", (c.args[1], c.args[0]), c.loc)
        store.solved.append(c)
        if c.name == "size" and not isinstance(c.args[1], IntLit):
            guard = C("=<", IntLit(0), c.args[1])
            if guard not in store.ints:
                store.ints.append(guard)

    def _check_ints(self, store: Store, exhaustive: bool) -> bool:
        linear = []
        for c in store.ints:
            norm = normalize(store.resolve(c))
            if norm is None:
                if c.name == "neq":
                    continue
                return False
            linear.append(norm)
        result = check_int_store(
            linear,
            int_bound=self.options.int_bound,
            search_limit=self.options.int_search_limit,
            exhaustive=exhaustive,
        )
        if result.status is IntStatus.UNSAT:
            return False
        for name, value in result.fixed.items():
            if name not in store.subst:
                store.bind(name, IntLit(value))
        store.int_status = result.status
        return True

    def _answer(self, store: Store, query_vars: Sequence[str]) -> Optional[AnswerFormula]:
        bindings = []
        for v in query_vars:
            t = store.resolve(Var(v))
            if t != Var(v):
                bindings.append((v, t))
        residual: list[Constraint] = []
        for c in store.solved:
            c = store.resolve(c)
            if c not in residual:
                residual.append(c)
        for c in store.ints:
            c = store.resolve(c)
            norm = normalize(c)
            if norm is None or not norm.lhs.coeffs:
                continue
            if c not in residual:
                residual.append(c)
        return AnswerFormula(tuple(bindings), tuple(residual), store.int_status)


def solve(
    f: Formula,
    options: Optional[SolveOptions] = None,
    *,
    supply: Optional[VarSupply] = None,
    expander: Optional[Expander] = None,
) -> Iterator[AnswerFormula]:
    return Solver(supply, options, expander).solve(f)


# --- Preservation support ---


def _recipe_type(recipe: Recipe, arg_types: Sequence[Type]) -> Type:
    kind, i = recipe
    if kind == "int":
        return INT
    t = arg_types[i]
    if kind == "arg":
        return t
    if not isinstance(t, SetType):
        raise TypeError(f"recipe {recipe} needs a set type, got {render(t)}")
    elem = t.elem
    if kind == "elem":
        return elem
    if not isinstance(elem, Prod):
        raise TypeError(f"recipe {recipe} needs a relation type, got {render(t)}")
    return elem.left if kind == "fst" else elem.right


def branch_formula(c: Constraint, branch: Branch, gamma: TypingContext, schemes: Schemes = {}) -> Formula:
    """D(context plus fresh variables) & branch, for checking rewrite preservation."""
    arg_types = constraint_arg_types(gamma, c, schemes)
    types = dict(gamma.var_types)
    for name, recipe in branch.fresh:
        types[name] = _recipe_type(recipe, arg_types)
    body: list[Formula] = [Atomic(C("=", Var(x), t)) for x, t in branch.bindings]
    body += [Atomic(k) for k in branch.constraints]
    used = free_vars(c).union(*(free_vars(b) for b in body))
    decs: list[Formula] = [Dec(Var(n), t) for n, t in types.items() if n in used]
    return conjoin(decs + body) if decs or body else TRUE
