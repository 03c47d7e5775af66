"""Approximation fixpoint machinery over finite complete lattices.

Everything here is generic in the lattice. The powerset instance encodes a
subset of ``range(n)`` as an int bitmask, which is what the semantics layer
uses for interpretations.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Iterator, NamedTuple, Protocol

from .errors import CapacityError, DomainError, MonotonicityError

DEFAULT_ENUMERATION_CAP = 2 ** 20
DEFAULT_INTERVAL_CAP = 2 ** 16


class LatticeSpace(Protocol):
    bot: Hashable
    top: Hashable

    def leq(self, x, y) -> bool: ...
    def glb(self, xs: Iterable) -> Hashable: ...
    def lub(self, xs: Iterable) -> Hashable: ...
    def interval(self, lo, hi) -> Iterator: ...
    def interval_size(self, lo, hi) -> int: ...


class PowersetLattice:
    """Subsets of ``range(n)`` as int bitmasks, ordered by inclusion."""

    def __init__(self, n: int):
        self.n = n
        self.bot = 0
        self.top = (1 << n) - 1

    def leq(self, x: int, y: int) -> bool:
        return x & ~y == 0

    def glb(self, xs):
        r = self.top
        for x in xs:
            r &= x
        return r

    def lub(self, xs):
        r = 0
        for x in xs:
            r |= x
        return r

    def interval(self, lo: int, hi: int):
        free = hi & ~lo
        sub = free
        while True:
            yield lo | sub
            if sub == 0:
                return
            sub = (sub - 1) & free

    def interval_size(self, lo: int, hi: int) -> int:
        return 1 << bin(hi & ~lo).count("1")

    def elements(self):
        return iter(range(self.top + 1))

    def __repr__(self):
        return f"PowersetLattice({self.n})"


class ExplicitLattice:
    """A finite lattice given by its elements and a partial order."""

    def __init__(self, elements, leq: Callable):
        self._elements = tuple(elements)
        self._leq = leq
        self.bot = self._extreme(lambda a, b: leq(a, b))
        self.top = self._extreme(lambda a, b: leq(b, a))

    def _extreme(self, below):
        for e in self._elements:
            if all(below(e, o) for o in self._elements):
                return e
        raise ValueError("not a bounded lattice")

    def leq(self, x, y):
        return self._leq(x, y)

    def _bound(self, xs, lower: bool):
        xs = list(xs)
        if lower:
            cands = [e for e in self._elements if all(self._leq(e, x) for x in xs)]
            best = [c for c in cands if all(self._leq(o, c) for o in cands)]
        else:
            cands = [e for e in self._elements if all(self._leq(x, e) for x in xs)]
            best = [c for c in cands if all(self._leq(c, o) for o in cands)]
        if len(best) != 1:
            raise ValueError("bound does not exist")
        return best[0]

    def glb(self, xs):
        return self._bound(xs, True)

    def lub(self, xs):
        return self._bound(xs, False)

    def interval(self, lo, hi):
        return (e for e in self._elements if self._leq(lo, e) and self._leq(e, hi))

    def interval_size(self, lo, hi):
        return sum(1 for _ in self.interval(lo, hi))

    def elements(self):
        return iter(self._elements)


class ConsistentPair(NamedTuple):
    lower: Hashable
    upper: Hashable

    @property
    def exact(self) -> bool:
        return self.lower == self.upper


def is_consistent(lattice, p) -> bool:
    return lattice.leq(p[0], p[1])


def leq_p(lattice, p, q) -> bool:
    """Precision order: q is at least as precise as p."""
    return lattice.leq(p[0], q[0]) and lattice.leq(q[1], p[1])


class Approximator:
    """A pair operator A(x, y) = (A1(x, y), A2(x, y)) with an application tally.

    The tally is per instance; build a fresh approximator per computation when
    counts matter.
    """

    def __init__(self, lattice, fn, base_op=None, name="A"):
        self.lattice = lattice
        self._fn = fn
        self._base = base_op
        self.name = name
        self.applications = 0

    def __call__(self, x, y) -> ConsistentPair:
        self.applications += 1
        u, v = self._fn(x, y)
        return ConsistentPair(u, v)

    def first(self, x, y):
        return self(x, y)[0]

    def second(self, x, y):
        return self(x, y)[1]

    def base(self, x):
        if self._base is not None:
            return self._base(x)
        return self(x, x)[0]

    def reset(self):
        self.applications = 0


def lfp_monotone(lattice, op, start=None, ceiling=None):
    """Least fixpoint of a monotone ``op`` above ``start`` by iteration.

    ``ceiling``, when given, must be known to bound the fixpoint from above;
    reaching it ends the iteration without a confirming application.
    """
    x = lattice.bot if start is None else start
    while True:
        if ceiling is not None and x == ceiling:
            return x
        y = op(x)
        if y == x:
            return x
        if not lattice.leq(x, y):
            raise MonotonicityError("successive iterates are not increasing")
        if ceiling is not None and not lattice.leq(y, ceiling):
            raise MonotonicityError("iterate exceeded its known upper bound")
        x = y


def kripke_kleene(A: Approximator) -> ConsistentPair:
    L = A.lattice
    p = ConsistentPair(L.bot, L.top)
    while True:
        q = A(*p)
        if q == p:
            return p
        if not leq_p(L, p, q):
            raise MonotonicityError("approximator iterates are not increasing in precision")
        p = q


def _glb_of_prefixpoints(L, f, lo, hi, cap):
    if L.interval_size(lo, hi) > cap:
        raise CapacityError(f"pre-fixpoint enumeration exceeds cap {cap}")
    members = [z for z in L.interval(lo, hi) if L.leq(f(z), z)]
    return L.glb(members) if members else L.top


def lower_stable(A: Approximator, b, method="iterate", cap=DEFAULT_ENUMERATION_CAP):
    """glb of {x <= b : A1(x, b) <= x}, or top when that set is empty."""
    L = A.lattice
    f = lambda x: A.first(x, b)
    if method == "enumerate":
        return _glb_of_prefixpoints(L, f, L.bot, b, cap)
    x = L.bot
    while True:
        y = f(x)
        if y == x:
            return x
        if not L.leq(x, y):
            return _glb_of_prefixpoints(L, f, L.bot, b, cap)
        if not L.leq(y, b):
            # every pre-fixpoint below b would lie above y
            return L.top
        x = y


def upper_stable(A: Approximator, a, method="iterate", cap=DEFAULT_ENUMERATION_CAP):
    """glb of {y >= a : A2(a, y) <= y}."""
    L = A.lattice
    f = lambda y: A.second(a, y)
    if method == "enumerate":
        return _glb_of_prefixpoints(L, f, a, L.top, cap)
    y = a
    while True:
        z = L.lub((a, f(y)))
        if z == y:
            return y
        if not L.leq(y, z):
            return _glb_of_prefixpoints(L, f, a, L.top, cap)
        y = z


def is_reliable(A: Approximator, p) -> bool:
    return leq_p(A.lattice, p, A(*p))


def is_prudent(A: Approximator, p) -> bool:
    return A.lattice.leq(p[0], lower_stable(A, p[1]))


def stable_revision(A: Approximator, p, check=True) -> ConsistentPair:
    if check and not (is_reliable(A, p) and is_prudent(A, p)):
        raise DomainError("stable revision needs a reliable and prudent pair")
    return ConsistentPair(lower_stable(A, p[1]), upper_stable(A, p[0]))


def well_founded(A: Approximator) -> ConsistentPair:
    """Alternating fixpoint: J = lfp A2(I, .) above I, then I = lfp A1(., J)."""
    L = A.lattice

    def upper_from(lower, ceiling):
        return lfp_monotone(L, lambda y: L.lub((lower, A.second(lower, y))),
                            start=lower, ceiling=ceiling)

    lower = L.bot
    upper = upper_from(lower, L.top)
    while lower != upper:
        new_lower = lfp_monotone(L, lambda x: A.first(x, upper), start=lower, ceiling=upper)
        if new_lower == lower:
            break
        lower = new_lower
        if lower == upper:
            break
        new_upper = upper_from(lower, upper)
        if new_upper == upper:
            break
        upper = new_upper
    return ConsistentPair(lower, upper)


def well_founded_by_revision(A: Approximator) -> ConsistentPair:
    """Generic path: iterate stable revision from (bot, top)."""
    L = A.lattice
    p = ConsistentPair(L.bot, L.top)
    while True:
        q = stable_revision(A, p, check=False)
        if q == p:
            return p
        p = q


def exact_stable_fixpoints(A: Approximator, candidates) -> list:
    L = A.lattice
    out = []
    for x in candidates:
        if A.base(x) != x:
            continue
        if lfp_monotone(L, lambda z: A.first(z, x), start=L.bot, ceiling=x) == x:
            out.append(x)
    return out


def ultimate_of(lattice, op, cap=DEFAULT_INTERVAL_CAP, memo=True) -> Approximator:
    """The most precise approximator of ``op``: glb/lub of op over [x, y]."""
    cache: dict = {}

    def base(z):
        if not memo:
            return op(z)
        r = cache.get(z)
        if r is None:
            r = cache[z] = op(z)
        return r

    def fn(x, y):
        size = lattice.interval_size(x, y)
        if size > cap:
            raise CapacityError(f"interval of {size} members exceeds cap {cap}")
        lo, hi = lattice.top, lattice.bot
        if isinstance(lattice, PowersetLattice):
            for z in lattice.interval(x, y):
                v = base(z)
                lo &= v
                hi |= v
                if lo == 0 and hi == lattice.top:
                    break
            return lo, hi
        for z in lattice.interval(x, y):
            v = base(z)
            lo = lattice.glb((lo, v))
            hi = lattice.lub((hi, v))
        return lo, hi

    return Approximator(lattice, fn, base_op=base, name="ultimate")


@dataclass
class PrecisionReport:
    operator_leq: bool
    counterexample: object = None
    kk_leq: bool = True
    wf_leq: bool = True
    stable_subset: bool = True
    details: dict = field(default_factory=dict)


def compare_precision(A: Approximator, B: Approximator, samples, candidates=()) -> PrecisionReport:
    """Check A <=p B pointwise on samples and the induced fixpoint orderings."""
    L = A.lattice
    bad = None
    for p in samples:
        if not leq_p(L, A(*p), B(*p)):
            bad = p
            break
    kk_a, kk_b = kripke_kleene(A), kripke_kleene(B)
    wf_a, wf_b = well_founded(A), well_founded(B)
    candidates = list(candidates)
    st_a = set(exact_stable_fixpoints(A, candidates))
    st_b = set(exact_stable_fixpoints(B, candidates))
    return PrecisionReport(
        operator_leq=bad is None,
        counterexample=bad,
        kk_leq=leq_p(L, kk_a, kk_b),
        wf_leq=leq_p(L, wf_a, wf_b),
        stable_subset=st_a <= st_b,
        details={"kk": (kk_a, kk_b), "wf": (wf_a, wf_b), "stable": (st_a, st_b)},
    )
