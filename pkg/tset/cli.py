from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, TextIO

from pydantic import ValidationError

from .ast import Formula, vars_in_order
from .config import DomainBound, SessionConfig, build_options, parse_int_range
from .engine import Engine
from .errors import (
    BudgetExhausted,
    ExplosionGuard,
    NotDerived,
    ParseError,
    TSetError,
    TypeCheckError,
    UnboundVariable,
    UsageError,
)
from .intstore import IntStatus
from .oracle import agree
from .solver import AnswerFormula
from .typechecker import collect_context

logger = logging.getLogger(__name__)

EXIT_SAT = 0
EXIT_UNSAT = 1
EXIT_TYPE_ERROR = 2
EXIT_BUDGET = 3
EXIT_ORACLE = 4
EXIT_USAGE = 64

# Answers collected for an oracle comparison, whatever --max-answers says.
ORACLE_MAX_ANSWERS = 10_000


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # type: ignore[override]
        raise UsageError(message)


def _build_parser() -> argparse.ArgumentParser:
    ap = _Parser(
        prog="tset",
        description="Typed set/relation constraint solver. Without --solve, starts an interactive session.",
    )
    ap.add_argument("--typecheck", choices=["on", "off"], default="on")
    ap.add_argument("--consult", action="append", default=[], metavar="FILE", help="Program file to load (repeatable)")
    ap.add_argument("--solve", default=None, metavar="FORMULA", help="Solve one formula and exit")
    ap.add_argument("--max-answers", type=int, default=None)
    ap.add_argument("--step-budget", type=int, default=None)
    ap.add_argument("--int-bound", default=None, metavar="LO..HI", help="Witness range for unbounded integers")
    ap.add_argument("--oracle-check", action="store_true", help="Compare answers against the bounded oracle")
    ap.add_argument("--oracle-bound", default=None, metavar="SPEC", help="e.g. ints=-2..2,atoms=3,card=3,depth=2")
    ap.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    return ap


def session_config(argv: list[str]) -> SessionConfig:
    args = _build_parser().parse_args(argv)
    options = build_options(
        max_answers=args.max_answers,
        step_budget=args.step_budget,
        int_bound=parse_int_range(args.int_bound) if args.int_bound else None,
    )
    try:
        return SessionConfig(
            typecheck=args.typecheck == "on",
            solve=args.solve,
            consult=[Path(p) for p in args.consult],
            options=options,
            oracle_check=args.oracle_check,
            oracle_bound=DomainBound.parse(args.oracle_bound) if args.oracle_bound else DomainBound(),
            log_level=args.log_level,
        )
    except ValidationError as e:
        raise UsageError(str(e)) from None


class Session:
    """One engine plus the streams a batch run or a REPL talks to."""

    def __init__(self, cfg: SessionConfig, *, stdout: TextIO, stderr: TextIO):
        self.cfg = cfg
        self.out = stdout
        self.err = stderr
        self.engine = Engine(typecheck=cfg.typecheck, options=cfg.options)

    def status(self, msg: str) -> None:
        print(f"[tset] {msg}", file=self.err, flush=True)

    def consult(self, path: Path) -> int:
        try:
            store = self.engine.consult_file(path)
        except OSError as e:
            self.status(f"cannot read {path}: {e.strerror}")
            return EXIT_USAGE
        except ParseError as e:
            print(str(e), file=self.out)
            return EXIT_USAGE
        except TSetError as e:
            print(str(e), file=self.out)
            return EXIT_TYPE_ERROR
        self.status(f"consulted {path} ({len(store.keys())} predicate(s) known)")
        return EXIT_SAT

    def query(self, text: str) -> int:
        try:
            f = self.engine.parse(text)
            answers = self.engine.query(f)
            emitted: list[AnswerFormula] = []
            for a in answers:
                if emitted:
                    print(";", file=self.out)
                print(a.render(), file=self.out, flush=True)
                emitted.append(a)
        except ParseError as e:
            print(str(e), file=self.out)
            return EXIT_USAGE
        except TypeCheckError as e:
            print(str(e), file=self.out)
            return EXIT_TYPE_ERROR
        except BudgetExhausted as e:
            self.status(f"{e} ({e.answers} answer(s) printed)")
            return EXIT_BUDGET
        except ExplosionGuard as e:
            self.status(str(e))
            return EXIT_BUDGET
        except TSetError as e:
            print(str(e), file=self.out)
            return EXIT_TYPE_ERROR
        if not emitted:
            print("no", file=self.out)
        code = EXIT_SAT if emitted else EXIT_UNSAT
        if self.cfg.oracle_check:
            code = self.oracle_check(f, code)
        return code

    def oracle_check(self, f: Formula, code: int) -> int:
        options = self.cfg.options.model_copy(update={"max_answers": ORACLE_MAX_ANSWERS})
        try:
            answers = list(self.engine.query(f, options))
        except BudgetExhausted as e:
            self.status(f"oracle check skipped: {e}")
            return code
        if any(a.int_status is IntStatus.UNKNOWN for a in answers):
            self.status("oracle check skipped: some answer keeps undecided integer constraints")
            return code
        gamma = self.engine.last_context or collect_context(f)
        query_vars = [v for v in vars_in_order(f) if not self.engine.supply.is_fresh(v)]
        try:
            report = agree(f, gamma, self.cfg.oracle_bound, answers, query_vars, self.engine.schemes())
        except (NotDerived, UnboundVariable, ExplosionGuard, TypeCheckError) as e:
            self.status(f"oracle check skipped: {e}")
            return code
        print(report.render(), file=self.out)
        return code if report.ok else EXIT_ORACLE

    # --- interactive ---
    def statement(self, text: str) -> Optional[int]:
        """Run one REPL statement; None means quit."""
        body = text.strip()
        if body.startswith(":"):
            word, _, rest = body[1:].rstrip(".").partition(" ")
            rest = rest.strip()
            if word == "quit":
                return None
            if word == "consult" and rest:
                return self.consult(Path(rest.strip("'\"")))
            if word == "typecheck" and rest in ("on", "off"):
                self.engine.set_typecheck(rest == "on")
                self.status(f"typechecking {rest}")
                return EXIT_SAT
            print(f"unknown command {body!r} (try :consult FILE. :typecheck on|off. :quit.)", file=self.out)
            return EXIT_USAGE
        return self.query(body)

    def repl(self, stdin: TextIO, *, prompt: bool) -> int:
        for text in _statements(stdin, self.out if prompt else None):
            try:
                if self.statement(text) is None:
                    break
            except KeyboardInterrupt:
                self.status("interrupted")
        return EXIT_SAT


def _code_part(line: str) -> str:
    return line.split("%", 1)[0].rstrip()


def _statements(stdin: TextIO, prompt_to: Optional[TextIO]):
    """Statements terminated by a `.` at the end of a line."""
    buf: list[str] = []
    while True:
        if prompt_to is not None:
            print("tset> " if not buf else "   |  ", end="", file=prompt_to, flush=True)
        line = stdin.readline()
        if not line:
            break
        buf.append(line)
        if _code_part(line).endswith("."):
            text = "".join(buf)
            buf = []
            if text.strip():
                yield text
        elif not _code_part("".join(buf)).strip():
            buf = []
    rest = "".join(buf)
    if _code_part(rest).strip():
        yield rest


def run(
    argv: Optional[list[str]] = None,
    *,
    stdin: Optional[TextIO] = None,
    stdout: Optional[TextIO] = None,
    stderr: Optional[TextIO] = None,
) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        cfg = session_config(list(sys.argv[1:] if argv is None else argv))
    except UsageError as e:
        print(f"[tset] usage error: {e}", file=stderr)
        return EXIT_USAGE
    logging.basicConfig(level=cfg.log_level, stream=stderr, format="%(levelname)s %(name)s: %(message)s")

    session = Session(cfg, stdout=stdout, stderr=stderr)
    for path in cfg.consult:
        code = session.consult(path)
        if code != EXIT_SAT:
            return code
    if cfg.solve is not None:
        return session.query(cfg.solve)
    return session.repl(stdin, prompt=stdin.isatty())


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
