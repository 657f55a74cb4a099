"""Linear integer constraints: normalization, bounds propagation, bounded search.

Constraints are kept as `sum(a_i * x_i) + const OP 0` with OP one of `=<`,
`=`, `neq`. Propagation narrows each variable's interval until a fixpoint;
when every variable ends up with finite bounds the store is decided by
enumeration, otherwise it is reported Unknown and kept as residue.
"""

from __future__ import annotations

import enum
import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .ast import Constraint, IntLit, IntOp, Term, Var

logger = logging.getLogger(__name__)

MAX_PROPAGATION_ROUNDS = 1000

INT_OPS = ("=<", "=", "neq")


class IntStatus(enum.Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Linear:
    coeffs: tuple[tuple[str, int], ...]
    const: int

    @property
    def vars(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.coeffs)

    def value(self, env: Mapping[str, int]) -> int:
        return self.const + sum(a * env[v] for v, a in self.coeffs)


@dataclass(frozen=True)
class LinearConstraint:
    op: str
    lhs: Linear  # compared against 0

    def holds(self, env: Mapping[str, int]) -> bool:
        v = self.lhs.value(env)
        if self.op == "=<":
            return v <= 0
        if self.op == "=":
            return v == 0
        return v != 0


def linearize(t: Term) -> Optional[tuple[dict[str, int], int]]:
    """`t` as (coefficients, constant), or None if it is not an integer term."""
    if isinstance(t, IntLit):
        return {}, t.value
    if isinstance(t, Var):
        return {t.name: 1}, 0
    if isinstance(t, IntOp):
        left, right = linearize(t.left), linearize(t.right)
        if left is None or right is None:
            return None
        (lc, lk), (rc, rk) = left, right
        if t.op == "*":
            if lc and rc:
                return None
            (coeffs, k), scale = (left, rk) if not rc else (right, lk)
            return {v: a * scale for v, a in coeffs.items() if a * scale}, k * scale
        sign = 1 if t.op == "+" else -1
        out = dict(lc)
        for v, a in rc.items():
            out[v] = out.get(v, 0) + sign * a
        return {v: a for v, a in out.items() if a}, lk + sign * rk
    return None


def normalize(c: Constraint) -> Optional[LinearConstraint]:
    """Normal form of an integer constraint; None when an argument is not an integer term."""
    if c.name not in INT_OPS or c.arity != 2:
        raise ValueError(f"not an integer constraint: {c}")
    left, right = linearize(c.args[0]), linearize(c.args[1])
    if left is None or right is None:
        return None
    coeffs = dict(left[0])
    for v, a in right[0].items():
        coeffs[v] = coeffs.get(v, 0) - a
    return LinearConstraint(
        c.name, Linear(tuple(sorted((v, a) for v, a in coeffs.items() if a)), left[1] - right[1])
    )


def is_int_term(t: Term) -> bool:
    return isinstance(t, (IntLit, IntOp))


def evaluate(t: Term) -> Optional[int]:
    """Value of a ground integer term."""
    lin = linearize(t)
    if lin is None or lin[0]:
        return None
    return lin[1]


@dataclass
class IntCheck:
    status: IntStatus
    fixed: dict[str, int] = field(default_factory=dict)
    bounds: dict[str, tuple[Optional[int], Optional[int]]] = field(default_factory=dict)
    witness: Optional[dict[str, int]] = None


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def propagate(
    constraints: Sequence[LinearConstraint],
) -> Optional[dict[str, list[Optional[int]]]]:
    """Interval bounds per variable; None when some interval becomes empty."""
    bounds: dict[str, list[Optional[int]]] = {}
    for c in constraints:
        for v in c.lhs.vars:
            bounds.setdefault(v, [None, None])

    def tighten(v: str, lo: Optional[int], hi: Optional[int]) -> bool:
        b = bounds[v]
        changed = False
        if lo is not None and (b[0] is None or lo > b[0]):
            b[0], changed = lo, True
        if hi is not None and (b[1] is None or hi < b[1]):
            b[1], changed = hi, True
        return changed

    def row(coeffs: tuple[tuple[str, int], ...], const: int) -> Optional[bool]:
        # sum(coeffs) + const =< 0; returns None on contradiction
        changed = False
        if not coeffs:
            return None if const > 0 else False
        for j, (vj, aj) in enumerate(coeffs):
            rest = const
            for i, (vi, ai) in enumerate(coeffs):
                if i == j:
                    continue
                b = bounds[vi][0] if ai > 0 else bounds[vi][1]
                if b is None:
                    break
                rest += ai * b
            else:
                if aj > 0:
                    changed |= tighten(vj, None, (-rest) // aj)
                else:
                    changed |= tighten(vj, _ceil_div(-rest, aj), None)
        return changed

    for _ in range(MAX_PROPAGATION_ROUNDS):
        changed = False
        for c in constraints:
            coeffs, const = c.lhs.coeffs, c.lhs.const
            if c.op == "neq":
                open_vars = [(v, a) for v, a in coeffs if bounds[v][0] is None or bounds[v][0] != bounds[v][1]]
                if not open_vars:
                    if c.lhs.value({v: bounds[v][0] for v, _ in coeffs}) == 0:  # type: ignore[misc]
                        return None
                elif len(open_vars) == 1:
                    v, a = open_vars[0]
                    rest = const + sum(ai * bounds[vi][0] for vi, ai in coeffs if vi != v)  # type: ignore[operator]
                    if (-rest) % a == 0:
                        banned = (-rest) // a
                        lo, hi = bounds[v]
                        if lo == banned:
                            changed |= tighten(v, banned + 1, None)
                        if hi == banned:
                            changed |= tighten(v, None, banned - 1)
                continue
            rows = [(coeffs, const)]
            if c.op == "=":
                rows.append((tuple((v, -a) for v, a in coeffs), -const))
            for r in rows:
                res = row(*r)
                if res is None:
                    return None
                changed |= res
        for lo, hi in bounds.values():
            if lo is not None and hi is not None and lo > hi:
                return None
        if not changed:
            break
    else:
        logger.debug("integer propagation stopped after %d rounds", MAX_PROPAGATION_ROUNDS)
    return bounds


def _search(
    constraints: Sequence[LinearConstraint], ranges: Mapping[str, range]
) -> Optional[dict[str, int]]:
    names = sorted(ranges)
    for values in itertools.product(*(ranges[n] for n in names)):
        env = dict(zip(names, values))
        if all(c.holds(env) for c in constraints):
            return env
    return None


def check_int_store(
    constraints: Iterable[LinearConstraint],
    *,
    int_bound: Optional[tuple[int, int]] = None,
    search_limit: int = 100_000,
    exhaustive: bool = True,
) -> IntCheck:
    """Decide a conjunction of linear constraints as far as bounds allow.

    With `exhaustive` off only propagation runs, so the result is Unsat or
    Unknown. `int_bound` clamps unbounded variables for the witness search;
    failing to find a witness inside the clamp stays Unknown.
    """
    cons = list(constraints)
    for c in cons:
        if not c.lhs.coeffs and not c.holds({}):
            return IntCheck(IntStatus.UNSAT)
    cons = [c for c in cons if c.lhs.coeffs]
    if not cons:
        return IntCheck(IntStatus.SAT, witness={})
    bounds = propagate(cons)
    if bounds is None:
        return IntCheck(IntStatus.UNSAT)
    fixed = {v: b[0] for v, b in bounds.items() if b[0] is not None and b[0] == b[1]}
    frozen = {v: (b[0], b[1]) for v, b in bounds.items()}
    result = IntCheck(IntStatus.UNKNOWN, fixed, frozen)  # type: ignore[arg-type]
    if not exhaustive:
        return result

    def size(ranges: Mapping[str, range]) -> int:
        n = 1
        for r in ranges.values():
            n *= len(r)
        return n

    if all(lo is not None and hi is not None for lo, hi in bounds.values()):
        ranges = {v: range(lo, hi + 1) for v, (lo, hi) in bounds.items()}  # type: ignore[operator]
        if size(ranges) <= search_limit:
            witness = _search(cons, ranges)
            if witness is None:
                return IntCheck(IntStatus.UNSAT)
            result.status, result.witness = IntStatus.SAT, witness
        return result
    if int_bound is not None:
        lo_b, hi_b = int_bound
        ranges = {}
        for v, (lo, hi) in bounds.items():
            if hi is not None:
                hi2 = hi
            else:
                hi2 = hi_b if lo is None else max(hi_b, lo)
            lo2 = lo if lo is not None else min(lo_b, hi2)
            ranges[v] = range(lo2, hi2 + 1)
        if size(ranges) <= search_limit:
            witness = _search(cons, ranges)
            if witness is not None:
                result.status, result.witness = IntStatus.SAT, witness
    return result
