"""Kleene truth values and three-valued sets.

A truth value is stored as a two-bit code: bit 0 says "certainly true" and
bit 1 says "possibly true". F=0, U=2, T=3, so bitwise and/or are the Kleene
connectives and the integer order is the truth order.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum


def negate_code(c: int) -> int:
    return ((~c >> 1) & 1) | ((~c & 1) << 1)


class TruthValue3(IntEnum):
    F = 0
    U = 2
    T = 3

    @classmethod
    def of(cls, first: bool, second: bool) -> "TruthValue3":
        if first and not second:
            raise ValueError("inconsistent truth value")
        return cls(int(first) | (int(second) << 1))

    @classmethod
    def exact(cls, b: bool) -> "TruthValue3":
        return cls.T if b else cls.F

    @property
    def first(self) -> bool:
        return bool(int(self) & 1)

    @property
    def second(self) -> bool:
        return bool(int(self) & 2)

    def __and__(self, other):
        return TruthValue3(int(self) & int(other))

    def __or__(self, other):
        return TruthValue3(int(self) | int(other))

    def __invert__(self):
        return TruthValue3(negate_code(int(self)))

    def leq_p(self, other) -> bool:
        """Precision order: U is below both F and T."""
        return self is TruthValue3.U or self == other

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class ThreeValuedSet:
    certain: frozenset
    possible: frozenset

    def __post_init__(self):
        object.__setattr__(self, "certain", frozenset(self.certain))
        object.__setattr__(self, "possible", frozenset(self.possible))
        if not self.certain <= self.possible:
            raise ValueError("certain tuples must be a subset of possible tuples")

    @property
    def exact(self) -> bool:
        return self.certain == self.possible

    def leq_p(self, other: "ThreeValuedSet") -> bool:
        return self.certain <= other.certain and other.possible <= self.possible
