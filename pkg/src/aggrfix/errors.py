"""Exception hierarchy. The CLI maps each family to an exit code."""
from __future__ import annotations

from dataclasses import dataclass


class AggrfixError(Exception):
    exit_code = 3


class UserError(AggrfixError):
    exit_code = 1


@dataclass(frozen=True)
class Diagnostic:
    kind: str  # lexical | syntax | sort | unknown-symbol
    message: str
    line: int = 0
    column: int = 0
    source: str = "<input>"

    def __str__(self):
        return f"{self.source}:{self.line}:{self.column}: {self.kind} error: {self.message}"


class ParseError(UserError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


class StratificationError(UserError):
    def __init__(self, cycle, via):
        self.cycle = tuple(cycle)
        self.via = via
        super().__init__(f"program is not stratified: cycle {' -> '.join(self.cycle)} through {via}")


class DefinitenessError(UserError):
    pass


class UnsupportedShapeError(UserError):
    pass


class CapacityError(AggrfixError):
    exit_code = 2


class MonotonicityError(AggrfixError):
    pass


class DomainError(AggrfixError):
    pass
