"""Brute-force reference implementations.

Everything here works directly on the AST with naive loops: rule instances
are all variable assignments, formulas are evaluated by substitution
environments, interpretations are frozensets of (pred, args) tuples, and
three-valued aggregates are literal quantification over the interval of
sets. Nothing is shared with the engine's grounder or evaluators.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .errors import CapacityError
from .language.ast import (AggAtom, And, Atom, BinOp, Compare, Const, Exists, Forall, Func,
                           Neg, Not, Or, Program, Truth, Var)

_BASES = ("count", "sum", "prod", "min", "max", "avg", "glb", "lub", "lb", "ub")
_SUFFIX = {"eq": "=", "neq": "!=", "leq": "<=", "geq": ">=", "lt": "<", "gt": ">"}
_OUT = object()


@dataclass(frozen=True)
class OracleBudget:
    max_atoms: int = 16
    max_interval: int = 2 ** 16
    max_subsets: int = 2 ** 20

    def __post_init__(self):
        if min(self.max_atoms, self.max_interval, self.max_subsets) <= 0:
            raise ValueError("budgets must be positive")


class OracleBudgetError(CapacityError):
    pass


def _cmp(op, a, b):
    try:
        return {"=": a == b, "!=": a != b}[op] if op in ("=", "!=") else {
            "<": lambda: a < b, "<=": lambda: a <= b,
            ">": lambda: a > b, ">=": lambda: a >= b}[op]()
    except TypeError:
        return op == "!="


def _split_name(name):
    subset = name.endswith("_sub")
    core = name[:-4] if subset else name
    base, _, suffix = core.partition("_")
    return base, _SUFFIX.get(suffix), subset


def naive_relation(base, cmp, subset, S, d, bottom=None, top=None, budget=OracleBudget()):
    """Aggregate relation by definition; ``subset`` tries every subset."""
    S = list(S)
    if subset:
        if (1 << len(S)) > budget.max_subsets:
            raise OracleBudgetError("subset closure beyond budget")
        for mask in range(1 << len(S)):
            sub = [t for i, t in enumerate(S) if mask >> i & 1]
            if naive_relation(base, cmp, False, sub, d, bottom, top):
                return True
        return False
    xs = [t[0] for t in S]
    if base == "lb":
        return all(_cmp("<=", d, x) for x in xs)
    if base == "ub":
        return all(_cmp(">=", d, x) for x in xs)
    if base == "count":
        v = Fraction(len(S))
    elif base == "sum":
        v = Fraction(0)
        for x in xs:
            v += x
    elif base == "prod":
        v = Fraction(1)
        for x in xs:
            v *= x
    elif base in ("min", "glb"):
        v = min(xs) if xs else (top if base == "glb" else None)
    elif base in ("max", "lub"):
        v = max(xs) if xs else (bottom if base == "lub" else None)
    elif base == "avg":
        v = sum(xs, Fraction(0)) / len(xs) if xs else None
    else:
        raise ValueError(f"unknown aggregate {base}")
    if v is None:
        return False
    return _cmp(cmp or "=", v, d)


def _members(certain, possible, budget):
    extra = list(possible - certain)
    if (1 << len(extra)) > budget.max_interval:
        raise OracleBudgetError("interval beyond budget")
    for mask in range(1 << len(extra)):
        yield frozenset(certain) | {t for i, t in enumerate(extra) if mask >> i & 1}


def brute_ult_aggregate(kind, certain, possible, d, budget=OracleBudget()):
    """(all members satisfy, some member satisfies) as a truth code name T/U/F."""
    base, cmp, subset = kind.base, kind.cmp, kind.subset
    if base == "custom":
        rel = lambda S: bool(kind.relation(frozenset(S), d))
    else:
        bottom, top = getattr(kind, "bottom", None), getattr(kind, "top", None)
        rel = lambda S: naive_relation(base, cmp, subset, S, d, bottom, top, budget)
    vals = [rel(S) for S in _members(frozenset(certain), frozenset(possible), budget)]
    return _truth(all(vals), any(vals))


def brute_bnd_aggregate(kind, certain, possible, d, budget=OracleBudget()):
    base, cmp, subset = kind.base, kind.cmp, kind.subset
    if subset or base not in ("count", "sum", "prod"):
        return brute_ult_aggregate(kind, certain, possible, d, budget)
    if not isinstance(d, Fraction):
        return _truth(cmp == "!=", cmp == "!=")
    vals = []
    for S in _members(frozenset(certain), frozenset(possible), budget):
        if base == "count":
            vals.append(Fraction(len(S)))
        elif base == "sum":
            vals.append(sum((t[0] for t in S), Fraction(0)))
        else:
            p = Fraction(1)
            for t in S:
                p *= t[0]
            vals.append(p)
    lo, hi = min(vals), max(vals)
    op = cmp or "="
    if op in ("=", "!="):
        a, b = lo == d == hi, lo <= d <= hi
        return _truth(a, b) if op == "=" else _truth(not b, not a)
    if op in (">=", ">"):
        return _truth(_cmp(op, lo, d), _cmp(op, hi, d))
    return _truth(_cmp(op, hi, d), _cmp(op, lo, d))


def _truth(first, second):
    if first and second:
        return "T"
    return "U" if second else "F"


class NaiveProgram:
    """A program instantiated by brute force, with naive operators."""

    def __init__(self, program: Program, budget=OracleBudget()):
        self.program = program
        self.budget = budget
        sig = program.signature
        self.sig = sig
        self.domains = {name: tuple(decl.values) for name, decl in sig.sorts.items()}
        self.facts = {p: set() for p, d in sig.preds.items() if not d.defined}
        for f in program.facts:
            self.facts[f.pred].add(tuple(f.args))
        self.tables = {name: {} for name in sig.funcs}
        for e in program.func_entries:
            self.tables[e.name][tuple(e.args)] = e.value
        self.base = []
        for name, decl in sig.preds.items():
            if decl.defined:
                for args in itertools.product(*(self.domains[s] for s in decl.sorts)):
                    self.base.append((name, args))
        self.instances = []
        for rule in program.rules:
            names, sorts = _rule_vars(rule)
            for values in itertools.product(*(self.domains[s] for s in sorts)):
                env = dict(zip(names, values))
                head = self.atom(rule.head, env)
                if head is not None:
                    self.instances.append((head, rule.body, env))

    # terms and atoms
    def term(self, t, env):
        if isinstance(t, Const):
            return t.value
        if isinstance(t, Var):
            return env[t.name]
        if isinstance(t, BinOp):
            a, b = self.term(t.left, env), self.term(t.right, env)
            if a is _OUT or b is _OUT:
                return _OUT
            return a + b if t.op == "+" else a - b if t.op == "-" else a * b
        if isinstance(t, Neg):
            a = self.term(t.arg, env)
            return _OUT if a is _OUT else -a
        if isinstance(t, Func):
            args = tuple(self.term(a, env) for a in t.args)
            return self.tables[t.name].get(args, _OUT)
        raise TypeError(t)

    def atom(self, a: Atom, env):
        sorts = self.sig.preds[a.pred].sorts
        args = []
        for t, s in zip(a.args, sorts):
            v = self.term(t, env)
            if v is _OUT or v not in self.domains[s]:
                return None
            args.append(v)
        return (a.pred, tuple(args))

    def _agg_parts(self, f: AggAtom, env):
        base, cmp, subset = _split_name(f.name)
        dom = self.domains[f.vars[0].sort] if f.vars else ()
        nums = [v for v in dom if isinstance(v, Fraction)]
        bottom, top = (min(nums), max(nums)) if nums and len(nums) == len(dom) else (None, None)
        tuples = list(itertools.product(*(self.domains[v.sort] for v in f.vars)))
        names = [v.name for v in f.vars]
        return base, cmp, subset, bottom, top, tuples, names

    # two-valued
    def holds(self, f, env, I) -> bool:
        if isinstance(f, Atom):
            a = self.atom(f, env)
            if a is None:
                return False
            if self.sig.preds[f.pred].defined:
                return a in I
            return a[1] in self.facts[f.pred]
        if isinstance(f, Truth):
            return f.value
        if isinstance(f, Compare):
            a, b = self.term(f.left, env), self.term(f.right, env)
            return a is not _OUT and b is not _OUT and _cmp(f.op, a, b)
        if isinstance(f, Not):
            return not self.holds(f.arg, env, I)
        if isinstance(f, And):
            return all(self.holds(g, env, I) for g in f.args)
        if isinstance(f, Or):
            return any(self.holds(g, env, I) for g in f.args)
        if isinstance(f, Exists):
            return any(self.holds(f.body, {**env, f.var.name: v}, I)
                       for v in self.domains[f.var.sort])
        if isinstance(f, Forall):
            return all(self.holds(f.body, {**env, f.var.name: v}, I)
                       for v in self.domains[f.var.sort])
        if isinstance(f, AggAtom):
            d = self.term(f.term, env)
            if d is _OUT:
                return False
            base, cmp, subset, bottom, top, tuples, names = self._agg_parts(f, env)
            S = [t for t in tuples if self.holds(f.cond, {**env, **dict(zip(names, t))}, I)]
            return self._relation(f.name, base, cmp, subset, S, d, bottom, top)
        raise TypeError(f)

    def _relation(self, name, base, cmp, subset, S, d, bottom, top):
        if base not in _BASES:
            from .aggregates import lookup
            return bool(lookup(name).relation(frozenset(S), d))
        return naive_relation(base, cmp, subset, S, d, bottom, top, self.budget)

    # three-valued, values are "T"/"U"/"F"
    def value3(self, f, env, lo, hi, family) -> str:
        if isinstance(f, Atom):
            a = self.atom(f, env)
            if a is None:
                return "F"
            if self.sig.preds[f.pred].defined:
                return "T" if a in lo else "U" if a in hi else "F"
            return "T" if a[1] in self.facts[f.pred] else "F"
        if isinstance(f, (Truth, Compare)):
            return "T" if self.holds(f, env, frozenset()) else "F"
        if isinstance(f, Not):
            return {"T": "F", "F": "T", "U": "U"}[self.value3(f.arg, env, lo, hi, family)]
        order = "FUT"
        if isinstance(f, And):
            return min((self.value3(g, env, lo, hi, family) for g in f.args), key=order.index)
        if isinstance(f, Or):
            return max((self.value3(g, env, lo, hi, family) for g in f.args), key=order.index)
        if isinstance(f, (Exists, Forall)):
            vals = [self.value3(f.body, {**env, f.var.name: v}, lo, hi, family)
                    for v in self.domains[f.var.sort]]
            pick = max if isinstance(f, Exists) else min
            return pick(vals, key=order.index) if vals else ("F" if pick is max else "T")
        if isinstance(f, AggAtom):
            d = self.term(f.term, env)
            if d is _OUT:
                return "F"
            base, cmp, subset, bottom, top, tuples, names = self._agg_parts(f, env)
            certain, possible = set(), set()
            for t in tuples:
                v = self.value3(f.cond, {**env, **dict(zip(names, t))}, lo, hi, family)
                if v == "T":
                    certain.add(t)
                if v != "F":
                    possible.add(t)
            kind = _NaiveKind(f.name, base, cmp, subset, bottom, top)
            if family == "triv":
                if certain != possible:
                    return "U"
                r = self._relation(f.name, base, cmp, subset, certain, d, bottom, top)
                return "T" if r else "F"
            if base not in _BASES:
                from .aggregates import lookup
                kind = lookup(f.name)
            if family == "bnd":
                return brute_bnd_aggregate(kind, certain, possible, d, self.budget)
            return brute_ult_aggregate(kind, certain, possible, d, self.budget)
        raise TypeError(f)

    # operators
    def tp(self, I) -> frozenset:
        return frozenset(h for h, body, env in self.instances if self.holds(body, env, I))

    def phi(self, lo, hi, family):
        vals = {}
        for h, body, env in self.instances:
            v = self.value3(body, env, lo, hi, family)
            if "FUT".index(v) > "FUT".index(vals.get(h, "F")):
                vals[h] = v
        return (frozenset(h for h, v in vals.items() if v == "T"),
                frozenset(h for h, v in vals.items() if v != "F"))

    def ultimate(self, lo, hi):
        extra = [a for a in hi if a not in lo]
        if (1 << len(extra)) > self.budget.max_interval:
            raise OracleBudgetError("interval beyond budget")
        low, high = None, frozenset()
        for mask in range(1 << len(extra)):
            I = frozenset(lo) | {a for i, a in enumerate(extra) if mask >> i & 1}
            v = self.tp(I)
            low = v if low is None else low & v
            high |= v
        return low, high

    def operator(self, family):
        if family == "ultimate":
            return self.ultimate
        return lambda lo, hi: self.phi(lo, hi, family)

    def _all_interpretations(self):
        n = len(self.base)
        if n > self.budget.max_atoms:
            raise OracleBudgetError(f"{n} atoms beyond budget {self.budget.max_atoms}")
        for mask in range(1 << n):
            yield frozenset(a for i, a in enumerate(self.base) if mask >> i & 1)


def _rule_vars(rule):
    seen = {}

    def term(t, bound):
        if isinstance(t, Var) and t.name not in bound:
            seen.setdefault(t.name, t.sort)
        elif isinstance(t, Func):
            for a in t.args:
                term(a, bound)
        elif isinstance(t, BinOp):
            term(t.left, bound)
            term(t.right, bound)
        elif isinstance(t, Neg):
            term(t.arg, bound)

    def form(f, bound):
        if isinstance(f, Atom):
            for a in f.args:
                term(a, bound)
        elif isinstance(f, Compare):
            term(f.left, bound)
            term(f.right, bound)
        elif isinstance(f, Not):
            form(f.arg, bound)
        elif isinstance(f, (And, Or)):
            for g in f.args:
                form(g, bound)
        elif isinstance(f, (Exists, Forall)):
            form(f.body, bound | {f.var.name})
        elif isinstance(f, AggAtom):
            form(f.cond, bound | {v.name for v in f.vars})
            term(f.term, bound)

    form(rule.head, frozenset())
    form(rule.body, frozenset())
    return list(seen), list(seen.values())


@dataclass(frozen=True)
class _NaiveKind:
    name: str
    base: str
    cmp: str | None
    subset: bool
    bottom: object
    top: object


def _naive(program_or_naive, budget=OracleBudget()) -> NaiveProgram:
    if isinstance(program_or_naive, NaiveProgram):
        return program_or_naive
    return NaiveProgram(program_or_naive, budget)


def brute_models(program, budget=OracleBudget()) -> list:
    np_ = _naive(program, budget)
    return [I for I in np_._all_interpretations() if np_.tp(I) <= I]


def brute_supported(program, budget=OracleBudget()) -> list:
    np_ = _naive(program, budget)
    return [I for I in np_._all_interpretations() if np_.tp(I) == I]


def brute_minimal_models(program, budget=OracleBudget()) -> list:
    ms = brute_models(program, budget)
    return [m for m in ms if not any(o < m for o in ms)]


def _lfp(f, start=frozenset()):
    x = start
    while True:
        y = f(x)
        if y == x:
            return x
        x = y


def brute_stable_check(program, family, I, budget=OracleBudget()) -> bool:
    """tp(I) = I and the least fixpoint of x -> A1(x, I) from the empty set is I."""
    np_ = _naive(program, budget)
    I = frozenset(I)
    if np_.tp(I) != I:
        return False
    op = np_.operator(family)
    return _lfp(lambda x: op(x, I)[0]) == I


def brute_stable_models(program, family, budget=OracleBudget()) -> list:
    np_ = _naive(program, budget)
    return [I for I in brute_supported(np_) if brute_stable_check(np_, family, I)]


def naive_kk(program, family, budget=OracleBudget()):
    np_ = _naive(program, budget)
    op = np_.operator(family)
    p = (frozenset(), frozenset(np_.base))
    while True:
        q = op(*p)
        if q == p:
            return p
        p = q


def naive_wf(program, family, budget=OracleBudget()):
    """Alternating fixpoint: J = lfp A2(I, .) and I = lfp A1(., J), both from empty."""
    np_ = _naive(program, budget)
    op = np_.operator(family)
    I, J = frozenset(), None
    while True:
        J2 = _lfp(lambda y: op(I, y)[1])
        I2 = _lfp(lambda x: op(x, J2)[0])
        if I2 == I and J2 == J:
            return I, J
        I, J = I2, J2


def naive_least(program, budget=OracleBudget()):
    np_ = _naive(program, budget)
    return _lfp(np_.tp)


def naive_standard(program, levels, budget=OracleBudget()):
    """Per-level least fixpoints, lower levels frozen."""
    np_ = _naive(program, budget)
    I = frozenset()
    for lvl in sorted(set(levels.values())):
        inst = [x for x in np_.instances if levels[x[0][0]] == lvl]
        frozen = I
        I = _lfp(lambda J: frozen | {h for h, b, e in inst if np_.holds(b, e, J)}, frozen)
    return I


def company_control_oracle(shares) -> set:
    """shares: {(owner, company): fraction}. Returns the controlling pairs."""
    companies = {x for pair in shares for x in pair}
    C: set = set()
    while True:
        nxt = set()
        for a in companies:
            via = {a} | {c for (x, c) in C if x == a}
            for b in companies:
                total = sum((shares.get((c, b), Fraction(0)) for c in via), Fraction(0))
                if total > Fraction(1, 2):
                    nxt.add((a, b))
        if nxt == C:
            return C
        C = nxt


def shortest_path_oracle(nodes, edges):
    """Bellman-Ford over paths of at least one edge.

    Returns (dist, no_shortest): dist maps (u, v) to the least path weight;
    no_shortest holds pairs joined by paths of unbounded negative weight.
    """
    nodes = list(nodes)
    dist, unbounded = {}, set()
    for s in nodes:
        d = {}
        for (u, v, w) in edges:
            if u == s and (v not in d or w < d[v]):
                d[v] = Fraction(w)

        def relax():
            changed = set()
            for (u, v, w) in edges:
                if u in d and (v not in d or d[u] + w < d[v]):
                    d[v] = d[u] + w
                    changed.add(v)
            return changed

        for _ in range(len(nodes)):
            relax()
        bad = set()
        for _ in range(len(nodes)):
            bad |= relax()
        frontier = list(bad)
        while frontier:
            u = frontier.pop()
            for (x, v, _) in edges:
                if x == u and v not in bad:
                    bad.add(v)
                    frontier.append(v)
        for v, w in d.items():
            if v in bad:
                unbounded.add((s, v))
            else:
                dist[(s, v)] = w
    return dist, unbounded


def brute_flp_models(program, budget=OracleBudget()) -> list:
    """Models I that are minimal models of the rules whose body holds in I."""
    np_ = _naive(program, budget)
    out = []
    for I in brute_models(np_):
        kept = [(h, b, e) for h, b, e in np_.instances if np_.holds(b, e, I)]
        extra = sorted(I, key=str)
        minimal = True
        for mask in range((1 << len(extra)) - 1):
            J = frozenset(a for i, a in enumerate(extra) if mask >> i & 1)
            if all(h in J for h, b, e in kept if np_.holds(b, e, J)):
                minimal = False
                break
        if minimal:
            out.append(I)
    return out
