"""Aggregate kinds: two-valued relations, monotonicity, three-valued families.

A set argument is a frozenset of value tuples. Numeric aggregates read the
first component of each tuple, so distinct tuples with equal first
components behave as a multiset.

The three families map (certain, possible, d) to a pair of booleans
(component 1 = certainly holds, component 2 = possibly holds):

* triv: unknown unless the set is exact;
* ult:  component 1 is "every S in [certain, possible] satisfies R",
        component 2 is "some S does";
* bnd:  for count/sum/prod, compares d with F over the interval witnesses
        lmin/lmax; other kinds use ult.
"""
from __future__ import annotations

import math
import operator
from collections import Counter
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable

from .errors import CapacityError
from .truth import ThreeValuedSet, TruthValue3

BASES = ("count", "sum", "prod", "min", "max", "avg", "glb", "lub", "lb", "ub")
FUNCTION_BASES = ("count", "sum", "prod", "min", "max", "avg", "glb", "lub")
SUFFIXES = {"eq": "=", "neq": "!=", "leq": "<=", "geq": ">=", "lt": "<", "gt": ">"}
CMP = {"=": operator.eq, "!=": operator.ne, "<=": operator.le,
       ">=": operator.ge, "<": operator.lt, ">": operator.gt}

MONOTONE = "monotone"
ANTI = "anti-monotone"
NEITHER = "neither"

MAX_DENOMINATOR = 10 ** 6
MAX_DP_BITS = 1 << 24


@dataclass(frozen=True)
class Caps:
    interval: int = 2 ** 16
    subsets: int = 2 ** 20
    atoms: int = 24


@dataclass(frozen=True)
class MonotonicityTag:
    direction: str
    condition: str = ""


@dataclass(frozen=True)
class AggregateKind:
    name: str
    base: str
    cmp: str | None = None
    subset: bool = False
    # sort extrema, used for glb/lub of the empty set
    bottom: object = None
    top: object = None

    @property
    def fallback_only(self) -> bool:
        return self.base == "avg"

    def with_bounds(self, bottom, top) -> "AggregateKind":
        return replace(self, bottom=bottom, top=top)

    def without_subset(self) -> "AggregateKind":
        return replace(self, subset=False, name=self.name.removesuffix("_sub"))


@dataclass(frozen=True)
class CustomAggregate:
    """A user-registered aggregate kind.

    ``relation(S, d) -> bool`` is required. ``ult(S1, S2, d)`` and
    ``bnd(S1, S2, d)`` may return (component1, component2) closed forms;
    without them the interval-enumeration fallback is used.
    """
    name: str
    relation: Callable
    tag: MonotonicityTag = MonotonicityTag(NEITHER)
    ult: Callable | None = None
    bnd: Callable | None = None
    base: str = "custom"
    cmp: str | None = None
    subset: bool = False

    def with_bounds(self, bottom, top):
        return self


_CUSTOM: dict[str, CustomAggregate] = {}


def register_aggregate(name, relation, tag=MonotonicityTag(NEITHER), ult=None, bnd=None):
    """Register a custom aggregate kind under ``name`` for use in programs."""
    if name in _CUSTOM or _parse_name(name) is not None:
        raise ValueError(f"aggregate {name!r} already exists")
    kind = CustomAggregate(name, relation, tag, ult, bnd)
    _CUSTOM[name] = kind
    return kind


def unregister_aggregate(name):
    _CUSTOM.pop(name, None)


def _parse_name(name: str):
    subset = name.endswith("_sub")
    core = name[:-4] if subset else name
    base, _, suffix = core.partition("_")
    if base not in BASES:
        return None
    if suffix:
        if suffix not in SUFFIXES or base in ("lb", "ub"):
            return None
        return AggregateKind(name, base, SUFFIXES[suffix], subset)
    return AggregateKind(name, base, None, subset)


def lookup(name: str):
    """Kind for an aggregate name such as ``count``, ``sum_geq`` or ``sum_sub``."""
    if name in _CUSTOM:
        return _CUSTOM[name]
    return _parse_name(name)


# two-valued relations

def _is_num(v) -> bool:
    return isinstance(v, (Fraction, int)) and not isinstance(v, bool)


def _compare(op: str, a, b) -> bool:
    try:
        return CMP[op](a, b)
    except TypeError:
        return op == "!="


def _firsts(S):
    return [t[0] for t in S]


def _prod(xs):
    p = Fraction(1)
    for x in xs:
        p *= x
    return p


def aggregate_function(kind, S):
    """F(S) for function kinds, or None where F is undefined."""
    b = kind.base
    if b == "count":
        return Fraction(len(S))
    xs = _firsts(S)
    if b == "sum":
        return sum(xs, Fraction(0))
    if b == "prod":
        return _prod(xs)
    if b == "min":
        return min(xs) if xs else None
    if b == "max":
        return max(xs) if xs else None
    if b == "avg":
        return sum(xs, Fraction(0)) / len(xs) if xs else None
    if b == "glb":
        return min(xs) if xs else kind.top
    if b == "lub":
        return max(xs) if xs else kind.bottom
    raise ValueError(f"{kind.name} is not a function kind")


def eval_aggregate2(kind, S, d) -> bool:
    if isinstance(kind, CustomAggregate):
        return bool(kind.relation(frozenset(S), d))
    if kind.subset:
        return subset_closure_eval(kind, S, d)
    if kind.base == "lb":
        return all(_compare("<=", d, x) for x in _firsts(S))
    if kind.base == "ub":
        return all(_compare(">=", d, x) for x in _firsts(S))
    v = aggregate_function(kind, S)
    if v is None:
        return False
    return _compare(kind.cmp or "=", v, d)


def subset_closure_eval(kind, S, d, caps: Caps = Caps()) -> bool:
    """True iff some subset of S is related to d by the base relation."""
    base = kind.without_subset() if kind.subset else kind
    if base.base == "count" and (base.cmp or "=") == "=":
        # closing the cardinality graph under subsets gives count_geq
        return _is_num(d) and d.denominator == 1 and 0 <= d <= len(S)
    return _ult_components(base, frozenset(), frozenset(S), d, caps, None)[1]


# monotonicity

def _value_range(S):
    xs = _firsts(S)
    if not xs or not all(_is_num(x) for x in xs):
        return None
    return min(xs), max(xs)


def monotonicity(kind, value_range=None) -> MonotonicityTag:
    """Classify ``kind`` given the (min, max) range of the aggregated values."""
    if isinstance(kind, CustomAggregate):
        return kind.tag
    if kind.subset:
        return MonotonicityTag(MONOTONE, "subset-closed")
    b, c = kind.base, kind.cmp
    if b in ("lb", "ub"):
        return MonotonicityTag(ANTI)
    up = c in (">=", ">")
    down = c in ("<=", "<")
    if not (up or down):
        return MonotonicityTag(NEITHER)
    if b == "count":
        return MonotonicityTag(MONOTONE if up else ANTI)
    lo, hi = value_range if value_range else (None, None)
    if b == "sum" and lo is not None:
        if lo >= 0:
            return MonotonicityTag(MONOTONE if up else ANTI, "values >= 0")
        if hi <= 0:
            return MonotonicityTag(ANTI if up else MONOTONE, "values <= 0")
    if b == "prod" and lo is not None:
        if lo >= 1:
            return MonotonicityTag(MONOTONE if up else ANTI, "values >= 1")
        if lo >= 0 and hi < 1:
            return MonotonicityTag(ANTI if up else MONOTONE, "values in [0,1)")
    if b == "min" and down:
        return MonotonicityTag(MONOTONE)
    if b == "max" and up:
        return MonotonicityTag(MONOTONE)
    if b == "glb" and kind.top is not None:
        return MonotonicityTag(MONOTONE if down else ANTI)
    if b == "lub" and kind.bottom is not None:
        return MonotonicityTag(MONOTONE if up else ANTI)
    return MonotonicityTag(NEITHER)


# exact subset searches

def exists_subset_sum(values, target, caps: Caps = Caps()) -> bool:
    """Is ``target`` the sum of some sub-multiset of ``values``?"""
    values = [Fraction(v) for v in values]
    target = Fraction(target)
    den = math.lcm(target.denominator, *(v.denominator for v in values))
    if den <= MAX_DENOMINATOR:
        ints = [int(v * den) for v in values]
        t = int(target * den)
        neg = -sum(v for v in ints if v < 0)
        pos = sum(v for v in ints if v > 0)
        if not -neg <= t <= pos:
            return False
        if pos + neg <= MAX_DP_BITS:
            reach = 1 << neg
            for v in ints:
                reach |= (reach << v) if v >= 0 else (reach >> -v)
            return bool((reach >> (t + neg)) & 1)
    reach = {Fraction(0)}
    for v in values:
        reach |= {r + v for r in reach}
        if len(reach) > caps.subsets:
            raise CapacityError(f"subset-sum search exceeds cap {caps.subsets}")
    return target in reach


def exists_subset_product(start, values, target, caps: Caps = Caps()) -> bool:
    """Is ``target`` equal to start times the product of some sub-multiset?"""
    reach = {Fraction(start)}
    for v in values:
        if target in reach:
            return True
        reach |= {r * v for r in reach}
        if len(reach) > caps.subsets:
            raise CapacityError(f"subset-product search exceeds cap {caps.subsets}")
    return target in reach


# interval witnesses

def _interval_members(S1, S2, cap):
    extra = sorted(S2 - S1, key=repr)
    if (1 << len(extra)) > cap:
        raise CapacityError(f"interval of 2^{len(extra)} sets exceeds cap {cap}")
    for mask in range(1 << len(extra)):
        yield S1 | frozenset(t for i, t in enumerate(extra) if mask >> i & 1)


def lminmax(base: str, S1, S2, caps: Caps = Caps(), stats: Counter | None = None):
    """Members of [S1, S2] minimising and maximising F (count/sum/prod)."""
    S1, S2 = frozenset(S1), frozenset(S2)
    if base == "count":
        return S1, S2
    if base == "sum":
        pos1 = frozenset(t for t in S1 if t[0] >= 0)
        pos2 = frozenset(t for t in S2 if t[0] >= 0)
        return pos1 | (S2 - pos2), (S1 - pos1) | pos2
    if base == "prod":
        if all(t[0] >= 0 for t in S2):
            big1 = frozenset(t for t in S1 if t[0] >= 1)
            big2 = frozenset(t for t in S2 if t[0] >= 1)
            return big1 | (S2 - big2), (S1 - big1) | big2
        if stats is not None:
            stats["prod_negative_fallback"] += 1
        kind = AggregateKind("prod", "prod")
        best_lo = best_hi = None
        for S in _interval_members(S1, S2, caps.interval):
            v = aggregate_function(kind, S)
            if best_lo is None or v < best_lo[0]:
                best_lo = (v, S)
            if best_hi is None or v > best_hi[0]:
                best_hi = (v, S)
        return best_lo[1], best_hi[1]
    raise ValueError(f"no interval witnesses for {base}")


def _by_bounds(op: str, lo, hi, d):
    """Components for F_op given the least and greatest value of F."""
    if op in (">=", ">"):
        return _compare(op, lo, d), _compare(op, hi, d)
    return _compare(op, hi, d), _compare(op, lo, d)


# component computations

def _enumerate(kind, S1, S2, d, caps, stats):
    if stats is not None:
        stats["interval_enumerations"] += 1
    all_hold, some_hold = True, False
    for S in _interval_members(S1, S2, caps.interval):
        if eval_aggregate2(kind, S, d):
            some_hold = True
        else:
            all_hold = False
        if some_hold and not all_hold:
            break
    return all_hold, some_hold


def _extremal_components(kind, S1, S2, d):
    """min/max/glb/lub with a comparison, via the set of achievable values."""
    smallest = kind.base in ("min", "glb")
    better = operator.lt if smallest else operator.gt
    v1 = _firsts(S1)
    extra = _firsts(S2 - S1)
    if v1:
        anchor = min(v1) if smallest else max(v1)
    elif kind.base == "glb" and kind.top is not None:
        anchor = kind.top
    elif kind.base == "lub" and kind.bottom is not None:
        anchor = kind.bottom
    else:
        anchor = None
    if anchor is None:
        # the empty set is in the interval and satisfies nothing
        achievable, empty_possible = set(extra), True
    else:
        achievable = {anchor} | {x for x in extra if better(x, anchor)}
        empty_possible = False
    op = kind.cmp or "="
    first = not empty_possible and all(_compare(op, v, d) for v in achievable)
    second = any(_compare(op, v, d) for v in achievable)
    return first, second


def _table_rows(kind, S1, S2, d):
    """Graph kinds of min/max/glb/lub, row by row."""
    v1, v2 = set(_firsts(S1)), set(_firsts(S2))
    if kind.base in ("min", "max"):
        pick = min if kind.base == "min" else max
        beats = operator.lt if kind.base == "min" else operator.gt
        first = d in v1 and pick(v2) == d
        second = d in v2 and not any(beats(x, d) for x in v1)
        return first, second
    rel = lambda S: eval_aggregate2(replace(kind, cmp=None), S, d)
    if kind.base == "glb":
        first = rel(S1) and rel(S2)
        second = rel(S1 | frozenset(t for t in S2 if _compare(">=", t[0], d)))
        return first, second
    first = rel(S1) and rel(S2)
    second = rel(S1 | frozenset(t for t in S2 if _compare("<=", t[0], d)))
    return first, second


def _ult_components(kind, S1, S2, d, caps: Caps, stats):
    if S1 == S2:
        r = eval_aggregate2(kind, S1, d)
        return r, r
    if isinstance(kind, CustomAggregate):
        if kind.ult is not None:
            return tuple(kind.ult(S1, S2, d))
        return _enumerate(kind, S1, S2, d, caps, stats)
    if kind.subset:
        base = kind.without_subset()
        return subset_closure_eval(base, S1, d, caps), subset_closure_eval(base, S2, d, caps)
    tag = monotonicity(kind, _value_range(S2))
    if tag.direction == MONOTONE:
        return eval_aggregate2(kind, S1, d), eval_aggregate2(kind, S2, d)
    if tag.direction == ANTI:
        return eval_aggregate2(kind, S2, d), eval_aggregate2(kind, S1, d)
    b, op = kind.base, kind.cmp or "="
    numeric_d = _is_num(d)
    if b in ("count", "sum", "prod"):
        if not numeric_d:
            return (op == "!=",) * 2
        if op == "!=":
            e1, e2 = _ult_components(replace(kind, cmp="="), S1, S2, d, caps, stats)
            return not e2, not e1
        if b == "count":
            n1, n2 = len(S1), len(S2)
            if op == "=":
                return n1 == d == n2, n1 <= d <= n2 and d.denominator == 1
            return _by_bounds(op, n1, n2, d)
        extra = _firsts(S2 - S1)
        if op == "=":
            if b == "sum":
                s1 = sum(_firsts(S1), Fraction(0))
                first = s1 == d and all(x == 0 for x in extra)
                return first, exists_subset_sum(extra, d - s1, caps)
            p1 = _prod(_firsts(S1))
            first = p1 == d and (d == 0 or all(x == 1 for x in extra))
            return first, exists_subset_product(p1, extra, d, caps)
        smin, smax = lminmax(b, S1, S2, caps, stats)
        return _by_bounds(op, aggregate_function(kind, smin), aggregate_function(kind, smax), d)
    if b in ("min", "max", "glb", "lub"):
        if op == "=" and not (b in ("glb", "lub") and (kind.top is None or kind.bottom is None)):
            return _table_rows(kind, S1, S2, d)
        return _extremal_components(kind, S1, S2, d)
    return _enumerate(kind, S1, S2, d, caps, stats)


def _bnd_components(kind, S1, S2, d, caps: Caps, stats):
    if S1 == S2:
        r = eval_aggregate2(kind, S1, d)
        return r, r
    if isinstance(kind, CustomAggregate):
        if kind.bnd is not None:
            return tuple(kind.bnd(S1, S2, d))
        return _ult_components(kind, S1, S2, d, caps, stats)
    if kind.subset or kind.base not in ("count", "sum", "prod"):
        return _ult_components(kind, S1, S2, d, caps, stats)
    op = kind.cmp or "="
    if not _is_num(d):
        return (op == "!=",) * 2
    smin, smax = lminmax(kind.base, S1, S2, caps, stats)
    lo, hi = aggregate_function(kind, smin), aggregate_function(kind, smax)
    if op in ("=", "!="):
        first, second = lo == d == hi, lo <= d <= hi
        return (first, second) if op == "=" else (not second, not first)
    return _by_bounds(op, lo, hi, d)


def _triv_components(kind, S1, S2, d, caps, stats):
    if S1 == S2:
        r = eval_aggregate2(kind, S1, d)
        return r, r
    return False, True


def _as_truth(pair) -> TruthValue3:
    return TruthValue3.of(*pair)


def _sets(s):
    if isinstance(s, ThreeValuedSet):
        return s.certain, s.possible
    c, p = s
    return frozenset(c), frozenset(p)


def triv_eval(kind, s, d) -> TruthValue3:
    return _as_truth(_triv_components(kind, *_sets(s), d, Caps(), None))


def ult_eval(kind, s, d, caps: Caps = Caps()) -> TruthValue3:
    return _as_truth(_ult_components(kind, *_sets(s), d, caps, None))


def bnd_eval(kind, s, d, caps: Caps = Caps()) -> TruthValue3:
    return _as_truth(_bnd_components(kind, *_sets(s), d, caps, None))


# families used by the three-valued evaluator

_COMPONENTS = {"triv": _triv_components, "ult": _ult_components, "bnd": _bnd_components}
FAMILIES = tuple(_COMPONENTS)


@dataclass
class AggregateFamily:
    name: str
    caps: Caps = Caps()
    stats: Counter = field(default_factory=Counter)

    def __post_init__(self):
        if self.name not in _COMPONENTS:
            raise ValueError(f"unknown aggregate family {self.name!r}")
        self._fn = _COMPONENTS[self.name]

    def components(self, kind, S1, S2, d):
        return self._fn(kind, S1, S2, d, self.caps, self.stats)

    def code(self, kind, S1, S2, d) -> int:
        a, b = self._fn(kind, S1, S2, d, self.caps, self.stats)
        return int(a) | (int(b) << 1)

    def evaluate(self, kind, s, d) -> TruthValue3:
        return _as_truth(self.components(kind, *_sets(s), d))
