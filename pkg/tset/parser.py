from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .ast import (
    EMPTY,
    FALSE,
    INFIX,
    INT,
    PRIMITIVES,
    TRUE,
    And,
    Atom,
    Atomic,
    Basic,
    Clause,
    Constraint,
    Dec,
    DecPPType,
    DecPType,
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
    SourceProgram,
    Tagged,
    Term,
    TrueF,
    Type,
    TypeVar,
    Var,
    VarSupply,
    conjoin,
    set_parts,
)
from .errors import DuplicateDirective, HeadNotLinear, Loc, ParseError


# --- Lexing ---

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>%[^\n]*)
  | (?P<int>\d+)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<name>[a-z][A-Za-z0-9_]*)
  | (?P<sym>:-|=<|>=|[=<>&(){}\[\],/?.+\-*])
    """,
    re.VERBOSE,
)

# Words that are operators or formula constants, never atoms.
RESERVED = frozenset({"or", "in", "nin", "neq", "true", "false", "dec"})
_INFIX_WORDS = frozenset({"in", "nin", "neq", "or"})
_TERM_END_SYMS = frozenset({")", "}", "]"})


@dataclass(frozen=True)
class Token:
    kind: str  # int | var | name | sym | eof
    text: str
    line: int
    col: int

    @property
    def loc(self) -> Loc:
        return Loc(self.line, self.col)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    line, line_start = 1, 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup or ""
        lexeme = m.group()
        col = pos - line_start + 1
        if kind in ("ws", "comment"):
            nl = lexeme.count("\n")
            if nl:
                line += nl
                line_start = pos + lexeme.rfind("\n") + 1
            pos = m.end()
            continue
        if kind == "sym" and lexeme == "-" and pos + 1 < n and text[pos + 1].isdigit() and _sign_position(tokens):
            digits = re.match(r"\d+", text[pos + 1 :])
            assert digits is not None
            lexeme = "-" + digits.group()
            tokens.append(Token("int", lexeme, line, col))
            pos += len(lexeme)
            continue
        tokens.append(Token(kind, lexeme, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


def _sign_position(tokens: list[Token]) -> bool:
    """True when a '-' here starts a signed literal rather than a binary minus."""
    if not tokens:
        return True
    prev = tokens[-1]
    if prev.kind in ("int", "var"):
        return False
    if prev.kind == "name":
        return prev.text in _INFIX_WORDS
    return prev.text not in _TERM_END_SYMS


# --- Parsing ---


class _Parser:
    def __init__(self, text: str, supply: Optional[VarSupply] = None):
        self.toks = tokenize(text)
        self.pos = 0
        self.supply = supply or VarSupply()

    # token helpers
    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def advance(self) -> Token:
        tok = self.peek()
        self.pos += 1
        return tok

    def at_sym(self, s: str, k: int = 0) -> bool:
        tok = self.peek(k)
        return tok.kind == "sym" and tok.text == s

    def at_name(self, s: str, k: int = 0) -> bool:
        tok = self.peek(k)
        return tok.kind == "name" and tok.text == s

    def at_eof(self) -> bool:
        return self.peek().kind == "eof"

    def error(self, message: str, expected: tuple[str, ...] = ()) -> ParseError:
        tok = self.peek()
        return ParseError(message, tok.line, tok.col, expected)

    def expect_sym(self, s: str) -> Token:
        if not self.at_sym(s):
            found = self.peek().text or "end of input"
            raise self.error(f"unexpected {found!r}", (s,))
        return self.advance()

    def expect_name(self) -> Token:
        if self.peek().kind != "name":
            found = self.peek().text or "end of input"
            raise self.error(f"unexpected {found!r}", ("identifier",))
        return self.advance()

    # formulas
    def formula(self) -> Formula:
        f = self.conj()
        while self.at_name("or"):
            self.advance()
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unit()
        while self.at_sym("&"):
            self.advance()
            f = And(f, self.unit())
        return f

    def unit(self) -> Formula:
        if self.at_sym("("):
            save = self.pos
            try:
                return self.atomic()
            except ParseError:
                self.pos = save
            self.advance()
            f = self.formula()
            self.expect_sym(")")
            return f
        if self.at_name("true"):
            self.advance()
            return TRUE
        if self.at_name("false"):
            self.advance()
            return FALSE
        return self.atomic()

    def atomic(self) -> Formula:
        tok = self.peek()
        if tok.kind == "name" and self.at_sym("(", 1):
            if tok.text == "dec":
                return self.dec()
            self.advance()
            args = self.args()
            if tok.text in PRIMITIVES and PRIMITIVES[tok.text] != len(args):
                raise ParseError(
                    f"{tok.text} expects {PRIMITIVES[tok.text]} arguments, got {len(args)}", tok.line, tok.col
                )
            return Atomic(Constraint(tok.text, args, tok.loc))
        left = self.term()
        op = self.peek()
        if (op.kind == "sym" and op.text in INFIX) or (op.kind == "name" and op.text in ("neq", "in", "nin")):
            self.advance()
        else:
            raise self.error(f"unexpected {op.text or 'end of input'!r}", tuple(INFIX))
        right = self.term()
        return Atomic(Constraint(op.text, (left, right), tok.loc))

    def args(self) -> tuple[Term, ...]:
        self.expect_sym("(")
        out = [self.term()]
        while self.at_sym(","):
            self.advance()
            out.append(self.term())
        self.expect_sym(")")
        return tuple(out)

    def dec(self) -> Formula:
        tok = self.advance()
        self.expect_sym("(")
        names: list[Token] = []
        if self.at_sym("["):
            self.advance()
            names.append(self._dec_var())
            while self.at_sym(","):
                self.advance()
                names.append(self._dec_var())
            self.expect_sym("]")
        else:
            names.append(self._dec_var())
        self.expect_sym(",")
        ty = self.type_()
        self.expect_sym(")")
        return conjoin(Dec(Var(n.text), ty, n.loc) for n in names) if len(names) > 1 else Dec(
            Var(names[0].text), ty, tok.loc
        )

    def _dec_var(self) -> Token:
        tok = self.peek()
        if tok.kind != "var" or tok.text == "_":
            raise self.error("first argument of dec must be a variable", ("variable",))
        self.supply.observe(tok.text)
        return self.advance()

    # types
    def type_(self) -> Type:
        tok = self.peek()
        if tok.kind == "var" and tok.text != "_":
            self.advance()
            return TypeVar(tok.text)
        if tok.kind != "name":
            raise self.error(f"unexpected {tok.text or 'end of input'!r}", ("type",))
        self.advance()
        if tok.text == "int":
            return INT
        if tok.text == "set":
            self.expect_sym("(")
            elem = self.type_()
            self.expect_sym(")")
            return SetType(elem)
        if tok.text in ("prod", "rel"):
            self.expect_sym("(")
            a = self.type_()
            self.expect_sym(",")
            b = self.type_()
            self.expect_sym(")")
            return Prod(a, b) if tok.text == "prod" else SetType(Prod(a, b))
        if tok.text == "enum":
            self.expect_sym("(")
            self.expect_sym("[")
            atoms = [self.expect_name().text]
            while self.at_sym(","):
                self.advance()
                atoms.append(self.expect_name().text)
            self.expect_sym("]")
            self.expect_sym(")")
            return Enum(tuple(atoms))
        if self.at_sym("("):
            raise ParseError(f"unknown type constructor {tok.text!r}", tok.line, tok.col)
        return Basic(tok.text)

    # terms
    def term(self) -> Term:
        t = self.product()
        while self.at_sym("+") or self.at_sym("-"):
            op = self.advance().text
            t = IntOp(op, t, self.product())
        return t

    def product(self) -> Term:
        t = self.primary()
        while self.at_sym("*"):
            tok = self.advance()
            r = self.primary()
            if not (isinstance(t, IntLit) or isinstance(r, IntLit)):
                raise ParseError("non-linear product: one factor must be an integer constant", tok.line, tok.col)
            t = IntOp("*", t, r)
        return t

    def primary(self) -> Term:
        tok = self.peek()
        if tok.kind == "int":
            self.advance()
            return IntLit(int(tok.text))
        if tok.kind == "var":
            self.advance()
            if tok.text == "_":
                return self.supply.fresh("_G")
            self.supply.observe(tok.text)
            return Var(tok.text)
        if tok.kind == "name":
            self.advance()
            if self.at_sym("?"):
                self.advance()
                atom = self.peek()
                if atom.kind != "name" or atom.text in RESERVED:
                    raise self.error("second argument of ? must be an atom", ("atom",))
                self.advance()
                return Tagged(tok.text, atom.text)
            if tok.text in RESERVED:
                raise ParseError(f"{tok.text!r} cannot be used as an atom", tok.line, tok.col)
            return Atom(tok.text)
        if self.at_sym("{"):
            self.advance()
            if self.at_sym("}"):
                self.advance()
                return EMPTY
            elems = [self.term()]
            while self.at_sym(","):
                self.advance()
                elems.append(self.term())
            tail: Term = EMPTY
            if self.at_sym("/"):
                self.advance()
                tail_tok = self.peek()
                tail = self.term()
                if not isinstance(tail, (EmptySet, Var, SetCons, Interval)):
                    raise ParseError("set part must be a set or a variable", tail_tok.line, tail_tok.col)
            self.expect_sym("}")
            for e in reversed(elems):
                tail = SetCons(e, tail)
            return tail
        if self.at_sym("["):
            self.advance()
            lo = self.term()
            self.expect_sym(",")
            hi = self.term()
            self.expect_sym("]")
            return Interval(lo, hi)
        if self.at_sym("("):
            self.advance()
            first = self.term()
            if self.at_sym(","):
                self.advance()
                second = self.term()
                self.expect_sym(")")
                return Pair(first, second)
            self.expect_sym(")")
            return first
        raise self.error(f"unexpected {tok.text or 'end of input'!r}", ("term",))

    # programs
    def program(self) -> SourceProgram:
        prog = SourceProgram()
        seen_clauses: set[tuple[str, int]] = set()
        while not self.at_eof():
            if self.at_sym(":-"):
                d = self.directive()
                if prog.directive_for(d.key) is not None:
                    raise DuplicateDirective(
                        f"duplicate directive for {d.name}/{len(d.arg_types)}", d.loc.line, d.loc.col
                    )
                if d.key in seen_clauses:
                    raise ParseError(f"directive for {d.name}/{len(d.arg_types)} follows its clauses", d.loc.line, d.loc.col)
                prog.directives.append(d)
                continue
            c = self.clause()
            seen_clauses.add(c.key)
            prog.clauses.append(c)
        return prog

    def directive(self) -> DecPType | DecPPType:
        start = self.advance()
        kind = self.expect_name()
        if kind.text not in ("dec_p_type", "dec_pp_type"):
            raise ParseError(f"unknown directive {kind.text!r}", kind.line, kind.col)
        self.expect_sym("(")
        name = self.expect_name()
        self.expect_sym("(")
        types = [self.type_()]
        while self.at_sym(","):
            self.advance()
            types.append(self.type_())
        self.expect_sym(")")
        self.expect_sym(")")
        self.expect_sym(".")
        cls = DecPType if kind.text == "dec_p_type" else DecPPType
        return cls(name.text, tuple(types), start.loc)

    def clause(self) -> Clause:
        tok = self.peek()
        head_f = self.atomic()
        if not isinstance(head_f, Atomic):
            raise ParseError("clause head must be a predicate", tok.line, tok.col)
        head = head_f.constraint
        names = [a.name for a in head.args if isinstance(a, Var)]
        if len(names) != len(head.args) or len(set(names)) != len(names):
            raise HeadNotLinear(
                f"arguments of {head.name}/{head.arity} must be pairwise distinct variables", tok.line, tok.col
            )
        body: Formula = TRUE
        if self.at_sym(":-"):
            self.advance()
            body = self.formula()
        self.expect_sym(".")
        return Clause(head, body, tok.loc)


def parse_formula(text: str, supply: Optional[VarSupply] = None) -> Formula:
    p = _Parser(text, supply)
    f = p.formula()
    if p.at_sym("."):
        p.advance()
    if not p.at_eof():
        raise p.error(f"unexpected {p.peek().text!r}", ("&", "or", "."))
    return f


def parse_program(text: str, supply: Optional[VarSupply] = None) -> SourceProgram:
    return _Parser(text, supply).program()


def parse_type(text: str) -> Type:
    p = _Parser(text)
    t = p.type_()
    if not p.at_eof():
        raise p.error(f"unexpected {p.peek().text!r}")
    return t


def parse_term(text: str, supply: Optional[VarSupply] = None) -> Term:
    p = _Parser(text, supply)
    t = p.term()
    if not p.at_eof():
        raise p.error(f"unexpected {p.peek().text!r}")
    return t


# --- Rendering ---

_PREC = {"+": 1, "-": 1, "*": 2}


def _render_type(t: Type) -> str:
    if isinstance(t, IntType):
        return "int"
    if isinstance(t, Basic):
        return t.name
    if isinstance(t, TypeVar):
        return t.name
    if isinstance(t, Enum):
        return f"enum([{','.join(t.atoms)}])"
    if isinstance(t, Prod):
        return f"prod({_render_type(t.left)},{_render_type(t.right)})"
    if isinstance(t, SetType):
        if isinstance(t.elem, Prod):
            return f"rel({_render_type(t.elem.left)},{_render_type(t.elem.right)})"
        return f"set({_render_type(t.elem)})"
    raise TypeError(f"not a type: {t!r}")


def _render_term(t: Term, ctx: int = 0) -> str:
    if isinstance(t, IntLit):
        return str(t.value)
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Atom):
        return t.name
    if isinstance(t, Tagged):
        return f"{t.base}?{t.atom}"
    if isinstance(t, EmptySet):
        return "{}"
    if isinstance(t, SetCons):
        elems, tail = set_parts(t)
        body = ",".join(_render_term(e) for e in elems)
        if isinstance(tail, EmptySet):
            return "{" + body + "}"
        return "{" + body + " / " + _render_term(tail) + "}"
    if isinstance(t, Interval):
        return f"[{_render_term(t.lo)},{_render_term(t.hi)}]"
    if isinstance(t, Pair):
        return f"({_render_term(t.fst)},{_render_term(t.snd)})"
    if isinstance(t, IntOp):
        prec = _PREC[t.op]
        s = f"{_render_term(t.left, prec)}{t.op}{_render_term(t.right, prec + 1)}"
        return f"({s})" if prec < ctx else s
    raise TypeError(f"not a term: {t!r}")


def _render_constraint(c: Constraint) -> str:
    if c.name in INFIX and len(c.args) == 2:
        return f"{_render_term(c.args[0])} {c.name} {_render_term(c.args[1])}"
    return f"{c.name}({','.join(_render_term(a) for a in c.args)})"


def _render_formula(f: Formula, ctx: int = 0) -> str:
    # ctx: 0 top, 1 inside a disjunction operand, 2 inside a conjunction operand
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, FalseF):
        return "false"
    if isinstance(f, Dec):
        return f"dec({f.var.name},{_render_type(f.type)})"
    if isinstance(f, Atomic):
        return _render_constraint(f.constraint)
    if isinstance(f, Or):
        s = f"{_render_formula(f.left, 0)} or {_render_formula(f.right, 1)}"
        return f"({s})" if ctx >= 1 else s
    if isinstance(f, And):
        s = f"{_render_formula(f.left, 1)} & {_render_formula(f.right, 2)}"
        return f"({s})" if ctx >= 2 else s
    raise TypeError(f"not a formula: {f!r}")


def render(x) -> str:
    if isinstance(x, (IntType, Basic, Enum, Prod, SetType, TypeVar)):
        return _render_type(x)
    if isinstance(x, Constraint):
        return _render_constraint(x)
    if isinstance(x, (TrueF, FalseF, Dec, Atomic, And, Or)):
        return _render_formula(x)
    if isinstance(x, Clause):
        head = _render_constraint(x.head)
        if isinstance(x.body, TrueF):
            return f"{head}."
        return f"{head} :- {_render_formula(x.body)}."
    if isinstance(x, (DecPType, DecPPType)):
        kind = "dec_p_type" if isinstance(x, DecPType) else "dec_pp_type"
        return f":- {kind}({x.name}({','.join(_render_type(t) for t in x.arg_types)}))."
    return _render_term(x)
