from __future__ import annotations

import re
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import UsageError


class SolveOptions(BaseModel):
    """Per-query solver limits."""

    model_config = ConfigDict(frozen=True)

    max_answers: int = Field(default=1, ge=1)
    step_budget: int = Field(default=1_000_000, ge=1)
    # Witness search range for otherwise unbounded integer variables.
    int_bound: Optional[tuple[int, int]] = None
    int_search_limit: int = Field(default=100_000, ge=1)

    @model_validator(mode="after")
    def _check_bound(self) -> "SolveOptions":
        if self.int_bound is not None and self.int_bound[0] > self.int_bound[1]:
            raise ValueError(f"int_bound {self.int_bound[0]}..{self.int_bound[1]} is empty")
        return self


class DomainBound(BaseModel):
    """Bounds of the finite domain the oracle enumerates."""

    model_config = ConfigDict(frozen=True)

    atom_pool_size: int = Field(default=3, ge=0)
    int_range: tuple[int, int] = (-2, 2)
    max_set_depth: int = Field(default=2, ge=0)
    max_set_cardinality: int = Field(default=3, ge=0)
    max_valuations: int = Field(default=2_000_000, ge=1)

    @model_validator(mode="after")
    def _check_range(self) -> "DomainBound":
        if self.int_range[0] > self.int_range[1]:
            raise ValueError(f"int_range {self.int_range[0]}..{self.int_range[1]} is empty")
        return self

    @property
    def ints(self) -> range:
        return range(self.int_range[0], self.int_range[1] + 1)

    def label(self) -> str:
        lo, hi = self.int_range
        return f"ints={lo}..{hi},atoms={self.atom_pool_size},card={self.max_set_cardinality},depth={self.max_set_depth}"

    @classmethod
    def parse(cls, spec: str) -> "DomainBound":
        """Parse `ints=-2..2,atoms=3,card=3,depth=2` (any subset of keys)."""
        keys = {"ints": "int_range", "atoms": "atom_pool_size", "card": "max_set_cardinality", "depth": "max_set_depth", "max": "max_valuations"}
        values: dict[str, object] = {}
        for part in filter(None, (p.strip() for p in spec.split(","))):
            name, sep, raw = part.partition("=")
            if not sep or name not in keys:
                raise UsageError(f"bad oracle bound item {part!r} (keys: {', '.join(keys)})")
            if name == "ints":
                values[keys[name]] = parse_int_range(raw)
            else:
                try:
                    values[keys[name]] = int(raw)
                except ValueError:
                    raise UsageError(f"bad oracle bound value {part!r}") from None
        try:
            return cls(**values)
        except ValidationError as e:
            raise UsageError(_first_message(e)) from None


_RANGE_RE = re.compile(r"^\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*$")


def parse_int_range(text: str) -> tuple[int, int]:
    m = _RANGE_RE.match(text)
    if not m:
        raise UsageError(f"expected LO..HI, got {text!r}")
    lo, hi = int(m.group(1)), int(m.group(2))
    if lo > hi:
        raise UsageError(f"empty range {text!r}")
    return lo, hi


class SessionConfig(BaseModel):
    typecheck: bool = True
    solve: Optional[str] = None
    consult: list[Path] = Field(default_factory=list)
    options: SolveOptions = Field(default_factory=SolveOptions)
    oracle_check: bool = False
    oracle_bound: DomainBound = Field(default_factory=DomainBound)
    log_level: str = "WARNING"


def build_options(**values) -> SolveOptions:
    """SolveOptions from loose values; validation failures become UsageError."""
    try:
        return SolveOptions(**{k: v for k, v in values.items() if v is not None})
    except ValidationError as e:
        raise UsageError(_first_message(e)) from None


def _first_message(e: ValidationError) -> str:
    err = e.errors()[0]
    where = ".".join(str(p) for p in err.get("loc", ()))
    return f"{where}: {err['msg']}" if where else err["msg"]
