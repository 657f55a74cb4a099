__all__ = [
    "Engine",
    "SolveOptions",
    "DomainBound",
    "AnswerFormula",
    "parse_formula",
    "parse_program",
    "render",
    "render_answers",
    "typecheck_formula",
    "agree",
    "enumerate_models",
]

from .config import DomainBound, SolveOptions
from .engine import Engine
from .oracle import agree, enumerate_models
from .parser import parse_formula, parse_program, render
from .solver import AnswerFormula, render_answers
from .typechecker import typecheck_formula
