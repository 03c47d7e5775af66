"""Abstract syntax for aggregate programs.

Domain values are ``Fraction`` for numbers and ``str`` for symbols. Every
variable node carries its resolved sort.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

Value = Union[Fraction, str]


# terms

@dataclass(frozen=True)
class Var:
    name: str
    sort: str | None = None


@dataclass(frozen=True)
class Const:
    value: Value


@dataclass(frozen=True)
class Func:
    name: str
    args: tuple = ()


@dataclass(frozen=True)
class BinOp:
    op: str  # + - *
    left: object
    right: object


@dataclass(frozen=True)
class Neg:
    arg: object


# formulas

@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple = ()


@dataclass(frozen=True)
class AggAtom:
    name: str
    vars: tuple  # of Var
    cond: object
    term: object


@dataclass(frozen=True)
class Not:
    arg: object


@dataclass(frozen=True)
class And:
    args: tuple


@dataclass(frozen=True)
class Or:
    args: tuple


@dataclass(frozen=True)
class Exists:
    var: Var
    body: object


@dataclass(frozen=True)
class Forall:
    var: Var
    body: object


@dataclass(frozen=True)
class Compare:
    op: str  # = != < <= > >=
    left: object
    right: object


@dataclass(frozen=True)
class Truth:
    value: bool


TRUE = Truth(True)
FALSE = Truth(False)


# declarations and programs

@dataclass(frozen=True)
class SortDecl:
    name: str
    kind: str  # enum | int | rat
    params: tuple  # enum: the values; int: (lo, hi); rat: (lo, hi, step)

    @property
    def values(self) -> tuple:
        if self.kind == "enum":
            return self.params
        if self.kind == "int":
            lo, hi = self.params
            return tuple(Fraction(i) for i in range(int(lo), int(hi) + 1))
        lo, hi, step = self.params
        out, v = [], Fraction(lo)
        while v <= hi:
            out.append(v)
            v += step
        return tuple(out)


@dataclass(frozen=True)
class PredDecl:
    name: str
    sorts: tuple
    defined: bool


@dataclass(frozen=True)
class FuncDecl:
    name: str
    sorts: tuple
    result: str


@dataclass
class Signature:
    sorts: dict = field(default_factory=dict)
    preds: dict = field(default_factory=dict)
    funcs: dict = field(default_factory=dict)

    def is_defined(self, pred: str) -> bool:
        d = self.preds.get(pred)
        return d is not None and d.defined

    @property
    def defined_preds(self) -> list:
        return [p for p, d in self.preds.items() if d.defined]


@dataclass(frozen=True)
class Rule:
    head: Atom
    body: object
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Fact:
    pred: str
    args: tuple  # of values


@dataclass(frozen=True)
class FuncEntry:
    name: str
    args: tuple
    value: Value


@dataclass
class Program:
    signature: Signature
    rules: tuple = ()
    facts: tuple = ()
    func_entries: tuple = ()


def flatten(cls, items):
    out = []
    for it in items:
        if isinstance(it, cls):
            out.extend(it.args)
        else:
            out.append(it)
    return tuple(out)
