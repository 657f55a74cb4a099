from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional

from .ast import PRIMITIVES, Clause, Constraint, Directive, Formula, SourceProgram, VarSupply
from .config import SolveOptions
from .derived import Registry, default_registry, instantiate
from .errors import ConsultError, ErrorKind, NameCollision, TSetError, TypeCheckError
from .parser import parse_formula, parse_program
from .solver import AnswerFormula, Solver
from .typechecker import TypingContext, check_clause, check_directive, typecheck_formula

logger = logging.getLogger(__name__)


@dataclass
class ClauseStore:
    """User predicates by (name, arity): optional directive plus clauses in textual order."""

    directives: dict[tuple[str, int], Directive] = field(default_factory=dict)
    clauses: dict[tuple[str, int], list[Clause]] = field(default_factory=dict)

    def __contains__(self, key: tuple[str, int]) -> bool:
        return key in self.clauses

    def keys(self) -> list[tuple[str, int]]:
        return sorted(set(self.clauses) | set(self.directives))

    def merged(self, program: SourceProgram) -> "ClauseStore":
        # Clauses of a predicate defined in `program` replace earlier ones.
        directives = dict(self.directives)
        clauses = {k: list(v) for k, v in self.clauses.items()}
        fresh: dict[tuple[str, int], list[Clause]] = {}
        for c in program.clauses:
            fresh.setdefault(c.key, []).append(c)
        clauses.update(fresh)
        for d in program.directives:
            directives[d.key] = d
        return ClauseStore(directives, clauses)


class Engine:
    def __init__(
        self,
        *,
        typecheck: bool = True,
        options: SolveOptions | None = None,
        supply: VarSupply | None = None,
    ):
        self.typecheck = typecheck
        self.options = options or SolveOptions()
        self.supply = supply or VarSupply()
        self.registry: Registry = default_registry(self.supply)
        self.store = ClauseStore()
        # Typing context of the last typechecked query, used by oracle checks.
        self.last_context: Optional[TypingContext] = None

    def set_typecheck(self, flag: bool) -> None:
        self.typecheck = flag
        logger.info("typechecking %s", "on" if flag else "off")

    def schemes(self) -> dict[tuple[str, int], Directive]:
        return {**self.registry.schemes(), **self.store.directives}

    # --- consulting ---
    def consult(self, program: SourceProgram | str) -> ClauseStore:
        """Add a program's clauses; nothing changes unless every clause is accepted."""
        if isinstance(program, str):
            program = parse_program(program, self.supply)
        errors: list[TSetError] = []
        for key in {c.key for c in program.clauses} | {d.key for d in program.directives}:
            name, arity = key
            if PRIMITIVES.get(name) == arity or key in self.registry:
                errors.append(NameCollision(f"{name}/{arity} is a built-in constraint"))
        if self.typecheck:
            errors.extend(self._check_program(program))
        if errors:
            raise ConsultError(errors)
        self.store = self.store.merged(program)
        logger.info(
            "consulted %d clause(s), %d directive(s)", len(program.clauses), len(program.directives)
        )
        return self.store

    def consult_file(self, path: str | Path) -> ClauseStore:
        return self.consult(Path(path).read_text(encoding="utf-8"))

    def _check_program(self, program: SourceProgram) -> list[TSetError]:
        errors: list[TSetError] = []
        schemes = {**self.schemes(), **{d.key: d for d in program.directives}}
        for d in program.directives:
            try:
                check_directive(d)
            except TypeCheckError as e:
                errors.append(e)
        for c in program.clauses:
            d = schemes.get(c.key)
            if d is None:
                errors.append(
                    TypeCheckError(
                        ErrorKind.MISSING_DIRECTIVE,
                        f"clause for {c.head.name}/{c.head.arity} has no dec_p_type or dec_pp_type directive",
                        c.loc,
                    )
                )
                continue
            try:
                check_clause(d, c, schemes)
            except TypeCheckError as e:
                errors.append(e)
        return errors

    # --- querying ---
    def parse(self, text: str) -> Formula:
        return parse_formula(text, self.supply)

    def check(self, f: Formula) -> Optional[TypingContext]:
        """Typecheck a query when typechecking is on; raises TypeCheckError."""
        self.last_context = typecheck_formula(f, self.schemes()) if self.typecheck else None
        return self.last_context

    def query(self, f: Formula | str, options: SolveOptions | None = None) -> Iterator[AnswerFormula]:
        """Typecheck eagerly, then return the lazy stream of answers."""
        if isinstance(f, str):
            f = self.parse(f)
        self.check(f)
        solver = Solver(self.supply, options or self.options, self._expand)
        return solver.solve(f)

    def _expand(self, c: Constraint) -> Optional[list[Formula]]:
        if c.key in self.registry:
            return self.registry.alternatives(c)
        clauses = self.store.clauses.get(c.key)
        if clauses is None:
            return None
        return [instantiate(cl, c, self.supply) for cl in clauses]
