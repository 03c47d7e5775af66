"""Static analyses: free variables, polarity, definiteness, stratification."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .. import aggregates
from .ast import (AggAtom, And, Atom, BinOp, Compare, Const, Exists, Forall, Func, Neg, Not,
                  Or, Program, Signature, Truth, Var)

POSITIVE, NEGATIVE, NEUTRAL, MIXED, ABSENT = "positive", "negative", "neutral", "mixed", "absent"


def term_variables(t) -> set:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, (Func,)):
        return set().union(*(term_variables(a) for a in t.args)) if t.args else set()
    if isinstance(t, BinOp):
        return term_variables(t.left) | term_variables(t.right)
    if isinstance(t, Neg):
        return term_variables(t.arg)
    return set()


def free_variables(f) -> frozenset:
    """Names of the variables occurring free in a formula."""
    if isinstance(f, Atom):
        return frozenset().union(*(term_variables(a) for a in f.args))
    if isinstance(f, Compare):
        return frozenset(term_variables(f.left) | term_variables(f.right))
    if isinstance(f, Truth):
        return frozenset()
    if isinstance(f, Not):
        return free_variables(f.arg)
    if isinstance(f, (And, Or)):
        return frozenset().union(*(free_variables(g) for g in f.args))
    if isinstance(f, (Exists, Forall)):
        return free_variables(f.body) - {f.var.name}
    if isinstance(f, AggAtom):
        inner = free_variables(f.cond) - {v.name for v in f.vars}
        return frozenset(inner | term_variables(f.term))
    raise TypeError(f"not a formula: {f!r}")


def rule_variables(rule) -> dict:
    """Free variables of a rule (head and body) mapped to their sorts, in order."""
    out: dict = {}

    def visit_term(t):
        if isinstance(t, Var):
            out.setdefault(t.name, t.sort)
        elif isinstance(t, Func):
            for a in t.args:
                visit_term(a)
        elif isinstance(t, BinOp):
            visit_term(t.left)
            visit_term(t.right)
        elif isinstance(t, Neg):
            visit_term(t.arg)

    def visit(f, bound):
        if isinstance(f, Atom):
            for a in f.args:
                visit_bound(a, bound)
        elif isinstance(f, Compare):
            visit_bound(f.left, bound)
            visit_bound(f.right, bound)
        elif isinstance(f, Not):
            visit(f.arg, bound)
        elif isinstance(f, (And, Or)):
            for g in f.args:
                visit(g, bound)
        elif isinstance(f, (Exists, Forall)):
            visit(f.body, bound | {f.var.name})
        elif isinstance(f, AggAtom):
            visit(f.cond, bound | {v.name for v in f.vars})
            visit_bound(f.term, bound)

    def visit_bound(t, bound):
        if isinstance(t, Var):
            if t.name not in bound:
                out.setdefault(t.name, t.sort)
        elif isinstance(t, Func):
            for a in t.args:
                visit_bound(a, bound)
        elif isinstance(t, BinOp):
            visit_bound(t.left, bound)
            visit_bound(t.right, bound)
        elif isinstance(t, Neg):
            visit_bound(t.arg, bound)

    for a in rule.head.args:
        visit_term(a)
    visit(rule.body, frozenset())
    return out


def value_range(sig: Signature, sort: str | None):
    if sort is None or sort not in sig.sorts:
        return None
    vals = sig.sorts[sort].values
    if not vals or not all(isinstance(v, Fraction) for v in vals):
        return None
    return min(vals), max(vals)


def aggregate_kind(node: AggAtom, sig: Signature):
    """Registry kind of an aggregate atom, with sort extrema attached."""
    kind = aggregates.lookup(node.name)
    rng = value_range(sig, node.vars[0].sort if node.vars else None)
    if rng is not None:
        kind = kind.with_bounds(*rng)
    return kind, rng


def aggregate_tag(node: AggAtom, sig: Signature):
    kind, rng = aggregate_kind(node, sig)
    return aggregates.monotonicity(kind, rng)


def occurrences(f, sig: Signature, sign=1, neutral=False, in_agg=False):
    """Yield (pred, polarity, inside_aggregate, via) for each predicate occurrence."""
    if isinstance(f, Atom):
        pol = NEUTRAL if neutral else (POSITIVE if sign > 0 else NEGATIVE)
        yield f.pred, pol, in_agg[0] if in_agg else False, in_agg[1] if in_agg else None
    elif isinstance(f, Not):
        yield from occurrences(f.arg, sig, -sign, neutral, in_agg)
    elif isinstance(f, (And, Or)):
        for g in f.args:
            yield from occurrences(g, sig, sign, neutral, in_agg)
    elif isinstance(f, (Exists, Forall)):
        yield from occurrences(f.body, sig, sign, neutral, in_agg)
    elif isinstance(f, AggAtom):
        tag = aggregate_tag(f, sig)
        if tag.direction == aggregates.NEITHER:
            neutral = True
        elif tag.direction == aggregates.ANTI:
            sign = -sign
        yield from occurrences(f.cond, sig, sign, neutral, in_agg or (True, f.name))


def polarity(f, pred: str, sig: Signature) -> str:
    kinds = {pol for p, pol, _, _ in occurrences(f, sig) if p == pred}
    if not kinds:
        return ABSENT
    if len(kinds) == 1:
        return next(iter(kinds))
    return MIXED


def is_positive_formula(f, sig: Signature) -> bool:
    return all(pol == POSITIVE for p, pol, _, _ in occurrences(f, sig) if sig.is_defined(p))


def is_negative_formula(f, sig: Signature) -> bool:
    return all(pol == NEGATIVE for p, pol, _, _ in occurrences(f, sig) if sig.is_defined(p))


def is_definite(program: Program) -> bool:
    return all(is_positive_formula(r.body, program.signature) for r in program.rules)


@dataclass
class Stratification:
    levels: dict | None = None
    cycle: tuple | None = None
    via: str | None = None

    @property
    def ok(self) -> bool:
        return self.levels is not None


def dependency_edges(program: Program):
    """(q, p, strict, via) for each defined q occurring in a body of a rule for p."""
    sig = program.signature
    edges = {}
    for r in program.rules:
        p = r.head.pred
        for q, pol, in_agg, via in occurrences(r.body, sig):
            if not sig.is_defined(q):
                continue
            strict = in_agg or pol != POSITIVE
            label = via if in_agg else ("not" if pol != POSITIVE else None)
            key = (q, p)
            if strict and not edges.get(key, (False, None))[0]:
                edges[key] = (True, label)
            else:
                edges.setdefault(key, (strict, label))
    return [(q, p, s, v) for (q, p), (s, v) in edges.items()]


def _sccs(nodes, succ):
    """Tarjan's algorithm, iterative; components come out in reverse topological order."""
    index, low, on, stack, out = {}, {}, set(), [], []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ.get(root, ())))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on.add(root)
        while work:
            v, it = work[-1]
            nxt = next(it, None)
            if nxt is not None:
                if nxt not in index:
                    index[nxt] = low[nxt] = counter
                    counter += 1
                    stack.append(nxt)
                    on.add(nxt)
                    work.append((nxt, iter(succ.get(nxt, ()))))
                elif nxt in on:
                    low[v] = min(low[v], index[nxt])
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
    return out


def _path(succ, start, goal, allowed):
    prev, frontier = {start: None}, [start]
    while frontier:
        nxt = []
        for v in frontier:
            for w in succ.get(v, ()):
                if w in allowed and w not in prev:
                    prev[w] = v
                    nxt.append(w)
        frontier = nxt
    path, v = [], goal
    while v is not None:
        path.append(v)
        v = prev[v]
    return path[::-1]


def stratify(program: Program) -> Stratification:
    """Pointwise-minimal level assignment, or a cycle through a strict edge."""
    nodes = list(program.signature.defined_preds)
    edges = dependency_edges(program)
    succ: dict = {}
    for q, p, _, _ in edges:
        succ.setdefault(q, []).append(p)
    comps = _sccs(nodes, succ)
    comp_of = {v: i for i, c in enumerate(comps) for v in c}
    for q, p, strict, via in edges:
        if strict and comp_of[q] == comp_of[p]:
            # read as "p depends on q depends on ... p"
            back = _path(succ, p, q, set(comps[comp_of[q]]))[::-1] if p != q else [p]
            return Stratification(cycle=tuple([p] + back), via=via)
    level = {v: 1 for v in nodes}
    incoming: dict = {}
    for q, p, strict, _ in edges:
        incoming.setdefault(p, []).append((q, strict))
    for comp in reversed(comps):  # topological order
        need = 1
        for v in comp:
            for q, strict in incoming.get(v, ()):
                if comp_of[q] != comp_of[v]:
                    need = max(need, level[q] + (1 if strict else 0))
        for v in comp:
            level[v] = need
    return Stratification(levels=level)


def is_normal_body(f) -> bool:
    """Conjunction of literals, comparisons and aggregate atoms."""
    parts = f.args if isinstance(f, And) else (f,)
    for g in parts:
        if isinstance(g, Not):
            g = g.arg
        if not isinstance(g, (Atom, AggAtom, Compare, Truth)):
            return False
    return True
