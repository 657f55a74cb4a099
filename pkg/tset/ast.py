"""Value-semantic syntax trees for types, terms, constraints, formulas and programs.

Every node is a frozen dataclass, so trees are hashable and safe to share. The
only mutable state in this module is `VarSupply`, the per-engine source of fresh
variable names.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Union

from .errors import Loc


class _Node:
    def __str__(self) -> str:
        from .parser import render

        return render(self)


# --- Types ---


@dataclass(frozen=True)
class IntType(_Node):
    pass


@dataclass(frozen=True)
class Basic(_Node):
    name: str


@dataclass(frozen=True)
class Enum(_Node):
    atoms: tuple[str, ...]


@dataclass(frozen=True)
class Prod(_Node):
    left: "Type"
    right: "Type"


@dataclass(frozen=True)
class SetType(_Node):
    elem: "Type"


@dataclass(frozen=True)
class TypeVar(_Node):
    name: str


Type = Union[IntType, Basic, Enum, Prod, SetType, TypeVar]

INT = IntType()


def rel(a: Type, b: Type) -> SetType:
    return SetType(Prod(a, b))


def type_vars(t: Type) -> set[str]:
    if isinstance(t, TypeVar):
        return {t.name}
    if isinstance(t, Prod):
        return type_vars(t.left) | type_vars(t.right)
    if isinstance(t, SetType):
        return type_vars(t.elem)
    return set()


def enums_in(t: Type) -> Iterator[Enum]:
    if isinstance(t, Enum):
        yield t
    elif isinstance(t, Prod):
        yield from enums_in(t.left)
        yield from enums_in(t.right)
    elif isinstance(t, SetType):
        yield from enums_in(t.elem)


# --- Terms ---


@dataclass(frozen=True)
class IntLit(_Node):
    value: int


@dataclass(frozen=True)
class IntOp(_Node):
    op: str  # one of + - *
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Atom(_Node):
    name: str


@dataclass(frozen=True)
class Tagged(_Node):
    base: str
    atom: str


@dataclass(frozen=True)
class Var(_Node):
    name: str


@dataclass(frozen=True)
class EmptySet(_Node):
    pass


@dataclass(frozen=True)
class SetCons(_Node):
    elem: "Term"
    rest: "Term"


@dataclass(frozen=True)
class Interval(_Node):
    lo: "Term"
    hi: "Term"


@dataclass(frozen=True)
class Pair(_Node):
    fst: "Term"
    snd: "Term"


Term = Union[IntLit, IntOp, Atom, Tagged, Var, EmptySet, SetCons, Interval, Pair]

EMPTY = EmptySet()


def set_term(elems: Iterable[Term], tail: Term = EMPTY) -> Term:
    """Build `{e1,...,en / tail}` as nested SetCons."""
    out = tail
    for e in reversed(list(elems)):
        out = SetCons(e, out)
    return out


def set_parts(t: Term) -> tuple[list[Term], Term]:
    """Split a set term into its element list and its tail (never a SetCons)."""
    elems: list[Term] = []
    while isinstance(t, SetCons):
        elems.append(t.elem)
        t = t.rest
    return elems, t


def is_set_term(t: Term) -> bool:
    return isinstance(t, (EmptySet, SetCons, Interval))


# --- Constraints and formulas ---

PRIMITIVES: dict[str, int] = {
    "=": 2,
    "neq": 2,
    "in": 2,
    "nin": 2,
    "un": 3,
    "disj": 2,
    "size": 2,
    "id": 2,
    "inv": 2,
    "comp": 3,
    "pfun": 1,
    "=<": 2,
}

INFIX = ("=", "neq", "in", "nin", "=<", "<", ">", ">=")


@dataclass(frozen=True)
class Constraint(_Node):
    """A predicate applied to terms: a primitive, a derived constraint or a user call."""

    name: str
    args: tuple[Term, ...]
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def key(self) -> tuple[str, int]:
        return (self.name, len(self.args))

    @property
    def is_primitive(self) -> bool:
        return PRIMITIVES.get(self.name) == len(self.args)


def C(name: str, *args: Term) -> Constraint:
    return Constraint(name, tuple(args))


@dataclass(frozen=True)
class TrueF(_Node):
    pass


@dataclass(frozen=True)
class FalseF(_Node):
    pass


@dataclass(frozen=True)
class Dec(_Node):
    var: Var
    type: Type
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Atomic(_Node):
    constraint: Constraint


@dataclass(frozen=True)
class And(_Node):
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or(_Node):
    left: "Formula"
    right: "Formula"


Formula = Union[TrueF, FalseF, Dec, Atomic, And, Or]

TRUE = TrueF()
FALSE = FalseF()


# --- Programs ---


@dataclass(frozen=True)
class Clause(_Node):
    head: Constraint
    body: Formula
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)

    @property
    def key(self) -> tuple[str, int]:
        return self.head.key


@dataclass(frozen=True)
class DecPType(_Node):
    name: str
    arg_types: tuple[Type, ...]
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)

    @property
    def key(self) -> tuple[str, int]:
        return (self.name, len(self.arg_types))


@dataclass(frozen=True)
class DecPPType(_Node):
    name: str
    arg_types: tuple[Type, ...]
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)

    @property
    def key(self) -> tuple[str, int]:
        return (self.name, len(self.arg_types))


Directive = Union[DecPType, DecPPType]


@dataclass
class SourceProgram:
    directives: list[Directive] = field(default_factory=list)
    clauses: list[Clause] = field(default_factory=list)

    def directive_for(self, key: tuple[str, int]) -> Optional[Directive]:
        for d in self.directives:
            if d.key == key:
                return d
        return None


# --- Traversals ---


def term_parts(t: Term) -> tuple[Term, Term]:
    if isinstance(t, SetCons):
        return t.elem, t.rest
    if isinstance(t, IntOp):
        return t.left, t.right
    if isinstance(t, Interval):
        return t.lo, t.hi
    assert isinstance(t, Pair)
    return t.fst, t.snd


def _term_vars(t: Term, seen: Optional[set[int]] = None) -> Iterator[str]:
    # Terms built by the solver share subterms; each shared node is walked once.
    if isinstance(t, Var):
        yield t.name
        return
    if not isinstance(t, (SetCons, IntOp, Interval, Pair)):
        return
    if seen is None:
        seen = set()
    elif id(t) in seen:
        return
    seen.add(id(t))
    for part in term_parts(t):
        yield from _term_vars(part, seen)


def _iter_vars(x, seen: Optional[set[int]] = None) -> Iterator[str]:
    if seen is None:
        seen = set()
    if isinstance(x, Constraint):
        for a in x.args:
            yield from _term_vars(a, seen)
    elif isinstance(x, Atomic):
        yield from _iter_vars(x.constraint, seen)
    elif isinstance(x, Dec):
        yield x.var.name
    elif isinstance(x, (And, Or)):
        yield from _iter_vars(x.left, seen)
        yield from _iter_vars(x.right, seen)
    elif isinstance(x, (TrueF, FalseF)):
        return
    else:
        yield from _term_vars(x, seen)


def vars_in_order(x) -> list[str]:
    """Variables of a term, constraint or formula, in order of first occurrence."""
    seen: dict[str, None] = {}
    for v in _iter_vars(x):
        seen.setdefault(v, None)
    return list(seen)


def free_vars(x) -> set[str]:
    return set(_iter_vars(x))


def substitute(x, binding: Mapping[str, Term]):
    """Simultaneous, capture-free replacement of variables by terms."""
    if not binding:
        return x
    return substitute_shared(x, binding, {})


def substitute_shared(x, binding: Mapping[str, Term], memo: dict[int, tuple[object, object]]):
    """`substitute` with a caller-owned memo; subterms shared in `x` stay shared in the result."""
    if isinstance(x, Var):
        return binding.get(x.name, x)
    if isinstance(x, (SetCons, IntOp, Interval, Pair)):
        hit = memo.get(id(x))
        if hit is not None:
            return hit[1]
        sub = [substitute_shared(part, binding, memo) for part in term_parts(x)]
        if isinstance(x, SetCons):
            out: object = SetCons(*sub)
        elif isinstance(x, IntOp):
            out = IntOp(x.op, *sub)
        elif isinstance(x, Interval):
            out = Interval(*sub)
        else:
            out = Pair(*sub)
        # the key object is kept alive so its id is not reused while the memo lives
        memo[id(x)] = (x, out)
        return out
    if isinstance(x, Constraint):
        return Constraint(x.name, tuple(substitute_shared(a, binding, memo) for a in x.args), x.loc)
    if isinstance(x, Atomic):
        return Atomic(substitute_shared(x.constraint, binding, memo))
    if isinstance(x, Dec):
        v = binding.get(x.var.name, x.var)
        # Dec keeps a variable in first position; a non-variable image drops the declaration.
        return Dec(v, x.type, x.loc) if isinstance(v, Var) else TRUE
    if isinstance(x, And):
        return And(substitute_shared(x.left, binding, memo), substitute_shared(x.right, binding, memo))
    if isinstance(x, Or):
        return Or(substitute_shared(x.left, binding, memo), substitute_shared(x.right, binding, memo))
    return x


def occurs(name: str, t: Term) -> bool:
    return any(v == name for v in _term_vars(t))


# --- Formula shape helpers ---


def conjoin(items: Iterable[Formula]) -> Formula:
    out: Optional[Formula] = None
    for f in items:
        out = f if out is None else And(out, f)
    return TRUE if out is None else out


def disjoin(items: Iterable[Formula]) -> Formula:
    out: Optional[Formula] = None
    for f in items:
        out = f if out is None else Or(out, f)
    return FALSE if out is None else out


def conjuncts(f: Formula) -> list[Formula]:
    if isinstance(f, And):
        return conjuncts(f.left) + conjuncts(f.right)
    return [f]


def disjuncts(f: Formula) -> list[Formula]:
    if isinstance(f, Or):
        return disjuncts(f.left) + disjuncts(f.right)
    return [f]


Literal = Union[Dec, Atomic]


def dnf_clauses(f: Formula) -> list[list[Literal]]:
    """DNF as a list of conjunctions; [] is false and [[]] is true."""
    if isinstance(f, TrueF):
        return [[]]
    if isinstance(f, FalseF):
        return []
    if isinstance(f, (Dec, Atomic)):
        return [[f]]
    if isinstance(f, Or):
        return dnf_clauses(f.left) + dnf_clauses(f.right)
    if isinstance(f, And):
        left = dnf_clauses(f.left)
        right = dnf_clauses(f.right)
        return [a + b for a in left for b in right]
    raise TypeError(f"not a formula: {f!r}")


def to_dnf(f: Formula) -> Formula:
    return disjoin(conjoin(c) for c in dnf_clauses(f))


# --- Fresh variables ---

_FRESH_SUFFIX = re.compile(r"_(\d+)$")


class VarSupply:
    """Monotone source of variable names no parsed input has used."""

    def __init__(self) -> None:
        self._counter = 0
        self._issued: set[str] = set()

    def observe(self, name: str) -> None:
        m = _FRESH_SUFFIX.search(name)
        if m:
            self._counter = max(self._counter, int(m.group(1)))

    def fresh(self, hint: str = "N") -> Var:
        base = hint if hint[:1].isupper() or hint.startswith("_") else "_" + hint
        self._counter += 1
        name = f"{base}_{self._counter}"
        self._issued.add(name)
        return Var(name)

    def is_fresh(self, name: str) -> bool:
        return name in self._issued


_default_supply = VarSupply()


def fresh_var(hint: str = "N", supply: Optional[VarSupply] = None) -> Var:
    return (supply or _default_supply).fresh(hint)


def observe_names(x, supply: VarSupply) -> None:
    for v in _iter_vars(x):
        supply.observe(v)


def clause_vars(clause: Clause) -> list[str]:
    return vars_in_order(And(Atomic(clause.head), clause.body))


def rename_apart(clause: Clause, supply: VarSupply) -> Clause:
    mapping: dict[str, Term] = {}
    for v in clause_vars(clause):
        mapping[v] = supply.fresh(_FRESH_SUFFIX.sub("", v).lstrip("_") or "G")
    return Clause(substitute(clause.head, mapping), substitute(clause.body, mapping), clause.loc)


def strip_decs(f: Formula) -> Formula:
    if isinstance(f, Dec):
        return TRUE
    if isinstance(f, And):
        return And(strip_decs(f.left), strip_decs(f.right))
    if isinstance(f, Or):
        return Or(strip_decs(f.left), strip_decs(f.right))
    return f


def iter_decs(f: Formula) -> Iterator[Dec]:
    if isinstance(f, Dec):
        yield f
    elif isinstance(f, (And, Or)):
        yield from iter_decs(f.left)
        yield from iter_decs(f.right)


def iter_constraints(f: Formula) -> Iterator[Constraint]:
    if isinstance(f, Atomic):
        yield f.constraint
    elif isinstance(f, (And, Or)):
        yield from iter_constraints(f.left)
        yield from iter_constraints(f.right)


def constraint_lists(items: Sequence[Literal]) -> list[Constraint]:
    return [x.constraint for x in items if isinstance(x, Atomic)]
