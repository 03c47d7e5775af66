"""Finite structures, grounding, and the two- and three-valued truth functions.

Interpretations are subsets of the ground base. Internally a subset is an int
bitmask over base indices; ``Base.encode``/``Base.decode`` convert to and from
frozensets of ``GroundAtom``.

Grounding partially evaluates every body against the structure: pre-defined
atoms, comparisons and fully static aggregate atoms become constants, and
instances whose body is constantly false are dropped. This never changes
the value of a body under any interpretation.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from .aggregates import AggregateFamily, eval_aggregate2
from .language.analysis import aggregate_kind, free_variables, rule_variables
from .language.ast import (AggAtom, And, Atom, BinOp, Compare, Const, Exists, Forall, Func,
                           Neg, Not, Or, Program, Signature, Truth, Var)
from .language.printer import format_value
from .truth import ThreeValuedSet, TruthValue3, negate_code


class GroundAtom(NamedTuple):
    pred: str
    args: tuple = ()

    def __str__(self):
        if not self.args:
            return self.pred
        return f"{self.pred}({','.join(format_value(a) for a in self.args)})"


class _OutOfRange:
    def __repr__(self):
        return "OUT_OF_RANGE"


OUT_OF_RANGE = _OutOfRange()


@dataclass
class Structure:
    signature: Signature
    domains: dict  # sort -> tuple of values
    relations: dict  # pre-defined pred -> frozenset of tuples
    functions: dict  # func -> {args: value}

    def __post_init__(self):
        self.domain_sets = {s: frozenset(v) for s, v in self.domains.items()}

    @classmethod
    def from_program(cls, program: Program) -> "Structure":
        sig = program.signature
        domains = {name: decl.values for name, decl in sig.sorts.items()}
        relations = {p: set() for p, d in sig.preds.items() if not d.defined}
        for f in program.facts:
            relations[f.pred].add(tuple(f.args))
        functions = {name: {} for name in sig.funcs}
        for e in program.func_entries:
            functions[e.name][tuple(e.args)] = e.value
        return cls(sig, domains, {p: frozenset(r) for p, r in relations.items()}, functions)

    def in_sort(self, value, sort) -> bool:
        return value in self.domain_sets[sort]


class Base:
    """The ground base with a fixed atom order."""

    def __init__(self, atoms):
        self.atoms = tuple(atoms)
        self.index = {a: i for i, a in enumerate(self.atoms)}

    def __len__(self):
        return len(self.atoms)

    def encode(self, atoms) -> int:
        m = 0
        for a in atoms:
            m |= 1 << self.index[a]
        return m

    def decode(self, mask: int) -> frozenset:
        out, i = [], 0
        while mask:
            if mask & 1:
                out.append(self.atoms[i])
            mask >>= 1
            i += 1
        return frozenset(out)


def ground_base(structure: Structure) -> Base:
    atoms = []
    for name, decl in structure.signature.preds.items():
        if decl.defined:
            for args in itertools.product(*(structure.domains[s] for s in decl.sorts)):
                atoms.append(GroundAtom(name, args))
    return Base(atoms)


def eval_term(structure: Structure, t, env=None, sort=None):
    """Value of a term, or OUT_OF_RANGE when arithmetic leaves its sort."""
    v = _term(structure, t, env or {})
    if sort is not None and v is not OUT_OF_RANGE and v not in structure.domain_sets[sort]:
        return OUT_OF_RANGE
    return v


def _term(structure, t, env):
    if isinstance(t, Const):
        return t.value
    if isinstance(t, Var):
        return env[t.name]
    if isinstance(t, BinOp):
        a, b = _term(structure, t.left, env), _term(structure, t.right, env)
        if not (isinstance(a, Fraction) and isinstance(b, Fraction)):
            return OUT_OF_RANGE
        if t.op == "+":
            return a + b
        if t.op == "-":
            return a - b
        return a * b
    if isinstance(t, Neg):
        a = _term(structure, t.arg, env)
        return -a if isinstance(a, Fraction) else OUT_OF_RANGE
    if isinstance(t, Func):
        args = tuple(_term(structure, a, env) for a in t.args)
        if any(a is OUT_OF_RANGE for a in args):
            return OUT_OF_RANGE
        return structure.functions[t.name].get(args, OUT_OF_RANGE)
    raise TypeError(f"not a term: {t!r}")


# ground formulas
#
# three(lo, hi, fam, memo) returns a two-bit truth code (see truth.py);
# memo caches set-expression values within one operator application.

class GConst:
    __slots__ = ("value",)

    def __init__(self, value: bool):
        self.value = value

    def two(self, I, memo):
        return self.value

    def three(self, lo, hi, fam, memo):
        return 3 if self.value else 0

    def atoms(self):
        return ()

    def __repr__(self):
        return "true" if self.value else "false"


G_TRUE, G_FALSE = GConst(True), GConst(False)


class GAtom:
    __slots__ = ("index",)

    def __init__(self, index: int):
        self.index = index

    def two(self, I, memo):
        return bool(I >> self.index & 1)

    def three(self, lo, hi, fam, memo):
        i = self.index
        return (lo >> i & 1) | ((hi >> i & 1) << 1)

    def atoms(self):
        return (self.index,)

    def __repr__(self):
        return f"#{self.index}"


class GNot:
    __slots__ = ("arg",)

    def __init__(self, arg):
        self.arg = arg

    def two(self, I, memo):
        return not self.arg.two(I, memo)

    def three(self, lo, hi, fam, memo):
        return negate_code(self.arg.three(lo, hi, fam, memo))

    def atoms(self):
        return self.arg.atoms()

    def __repr__(self):
        return f"not {self.arg!r}"


class GAnd:
    __slots__ = ("args",)

    def __init__(self, args):
        self.args = tuple(args)

    def two(self, I, memo):
        for a in self.args:
            if not a.two(I, memo):
                return False
        return True

    def three(self, lo, hi, fam, memo):
        c = 3
        for a in self.args:
            c &= a.three(lo, hi, fam, memo)
            if not c:
                break
        return c

    def atoms(self):
        return tuple(i for a in self.args for i in a.atoms())

    def __repr__(self):
        return "(" + " & ".join(map(repr, self.args)) + ")"


class GOr:
    __slots__ = ("args",)

    def __init__(self, args):
        self.args = tuple(args)

    def two(self, I, memo):
        for a in self.args:
            if a.two(I, memo):
                return True
        return False

    def three(self, lo, hi, fam, memo):
        c = 0
        for a in self.args:
            c |= a.three(lo, hi, fam, memo)
            if c == 3:
                break
        return c

    def atoms(self):
        return tuple(i for a in self.args for i in a.atoms())

    def __repr__(self):
        return "(" + " | ".join(map(repr, self.args)) + ")"


class GSet:
    """A ground set expression: candidate tuples with their conditions."""
    __slots__ = ("elements",)

    def __init__(self, elements):
        self.elements = tuple(elements)

    def two(self, I, memo):
        key = id(self)
        r = memo.get(key)
        if r is None:
            r = memo[key] = frozenset(t for t, c in self.elements if c.two(I, memo))
        return r

    def three(self, lo, hi, fam, memo):
        key = id(self)
        r = memo.get(key)
        if r is None:
            certain, possible = [], []
            for t, c in self.elements:
                v = c.three(lo, hi, fam, memo)
                if v & 1:
                    certain.append(t)
                if v & 2:
                    possible.append(t)
            r = memo[key] = (frozenset(certain), frozenset(possible))
        return r

    def atoms(self):
        return tuple(i for _, c in self.elements for i in c.atoms())


class GAgg:
    __slots__ = ("kind", "gset", "value")

    def __init__(self, kind, gset: GSet, value):
        self.kind, self.gset, self.value = kind, gset, value

    def two(self, I, memo):
        return eval_aggregate2(self.kind, self.gset.two(I, memo), self.value)

    def three(self, lo, hi, fam, memo):
        S1, S2 = self.gset.three(lo, hi, fam, memo)
        return fam.code(self.kind, S1, S2, self.value)

    def atoms(self):
        return self.gset.atoms()

    def __repr__(self):
        return f"{self.kind.name}(<{len(self.gset.elements)}>, {format_value(self.value)})"


def _mk_not(g):
    if isinstance(g, GConst):
        return G_FALSE if g.value else G_TRUE
    if isinstance(g, GNot):
        return g.arg
    return GNot(g)


def _mk_junction(items, conj: bool):
    neutral, absorbing = (True, False) if conj else (False, True)
    out = []
    for g in items:
        if isinstance(g, GConst):
            if g.value == absorbing:
                return G_FALSE if conj else G_TRUE
            continue
        if isinstance(g, GAnd if conj else GOr):
            out.extend(g.args)
        else:
            out.append(g)
    if not out:
        return G_TRUE if neutral else G_FALSE
    if len(out) == 1:
        return out[0]
    return GAnd(out) if conj else GOr(out)


@dataclass(frozen=True)
class GroundRule:
    head: int
    body: object
    source: int = -1  # index of the originating rule

    def __repr__(self):
        return f"#{self.head} <- {self.body!r}"


@dataclass
class GroundProgram:
    structure: Structure
    base: Base
    rules: tuple
    truncations: int = 0
    program: Program | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return len(self.base)

    def rules_by_head(self) -> dict:
        out: dict = {}
        for r in self.rules:
            out.setdefault(r.head, []).append(r)
        return out


class Grounder:
    def __init__(self, structure: Structure, base: Base | None = None):
        self.structure = structure
        self.sig = structure.signature
        self.base = base or ground_base(structure)
        self.truncations = 0
        self._sets: dict = {}
        self._free: dict = {}

    def args(self, terms, sorts, env):
        vals = []
        for t, s in zip(terms, sorts):
            v = eval_term(self.structure, t, env, s)
            if v is OUT_OF_RANGE:
                self.truncations += 1
                return None
            vals.append(v)
        return tuple(vals)

    def formula(self, f, env):
        if isinstance(f, Atom):
            decl = self.sig.preds[f.pred]
            args = self.args(f.args, decl.sorts, env)
            if args is None:
                return G_FALSE
            if decl.defined:
                return GAtom(self.base.index[GroundAtom(f.pred, args)])
            return G_TRUE if args in self.structure.relations[f.pred] else G_FALSE
        if isinstance(f, Truth):
            return G_TRUE if f.value else G_FALSE
        if isinstance(f, Compare):
            a = eval_term(self.structure, f.left, env)
            b = eval_term(self.structure, f.right, env)
            if a is OUT_OF_RANGE or b is OUT_OF_RANGE:
                self.truncations += 1
                return G_FALSE
            return G_TRUE if _compare(f.op, a, b) else G_FALSE
        if isinstance(f, Not):
            return _mk_not(self.formula(f.arg, env))
        if isinstance(f, (And, Or)):
            conj = isinstance(f, And)
            out = []
            for g in f.args:
                gg = self.formula(g, env)
                if isinstance(gg, GConst) and gg.value != conj:
                    return gg
                out.append(gg)
            return _mk_junction(out, conj)
        if isinstance(f, (Exists, Forall)):
            conj = isinstance(f, Forall)
            out = []
            for v in self.structure.domains[f.var.sort]:
                gg = self.formula(f.body, {**env, f.var.name: v})
                if isinstance(gg, GConst) and gg.value != conj:
                    return gg
                out.append(gg)
            return _mk_junction(out, conj)
        if isinstance(f, AggAtom):
            return self.aggregate(f, env)
        raise TypeError(f"not a formula: {f!r}")

    def aggregate(self, f: AggAtom, env):
        d = eval_term(self.structure, f.term, env)
        if d is OUT_OF_RANGE:
            self.truncations += 1
            return G_FALSE
        kind, _ = aggregate_kind(f, self.sig)
        free = self._free.get(id(f))
        if free is None:
            free = self._free[id(f)] = tuple(sorted(free_variables(
                AggAtom(f.name, f.vars, f.cond, Const(0)))))
        key = (id(f), tuple(env[v] for v in free))
        gset = self._sets.get(key)
        if gset is None:
            elements = []
            names = [v.name for v in f.vars]
            for tup in itertools.product(*(self.structure.domains[v.sort] for v in f.vars)):
                c = self.formula(f.cond, {**env, **dict(zip(names, tup))})
                if c is not G_FALSE:
                    elements.append((tup, c))
            gset = self._sets[key] = (GSet(elements), f)
        gset = gset[0]
        if all(c is G_TRUE for _, c in gset.elements):
            return G_TRUE if eval_aggregate2(kind, frozenset(t for t, _ in gset.elements), d) \
                else G_FALSE
        return GAgg(kind, gset, d)

    # rules
    def rule(self, rule, source=-1):
        """All non-trivial ground instances of a rule."""
        sig, st = self.sig, self.structure
        variables = rule_variables(rule)
        conjuncts = rule.body.args if isinstance(rule.body, And) else (rule.body,)
        static = [c for c in conjuncts if not _mentions_defined(c, sig)]
        joins = [c for c in static if isinstance(c, Atom)
                 and any(isinstance(a, Var) for a in c.args)]
        plan, bound = [], set()
        for c in joins:
            if any(isinstance(a, Var) and a.name not in bound for a in c.args):
                plan.append(("join", c))
                bound |= {a.name for a in c.args if isinstance(a, Var)}
        for name, sort in variables.items():
            if name not in bound:
                plan.append(("enum", name, sort))
                bound.add(name)
        # run each static conjunct as soon as its variables are bound
        checks = [[] for _ in range(len(plan) + 1)]
        seen: set = set()
        for c in static:
            need = free_variables(c)
            step = 0
            for i, s in enumerate(plan, 1):
                seen_now = _plan_vars(plan[:i])
                if need <= seen_now:
                    step = i
                    break
            else:
                step = len(plan)
            checks[step].append(c)
        out = []
        hdecl = sig.preds[rule.head.pred]

        def passes(step, env):
            for c in checks[step]:
                if self.formula(c, env) is not G_TRUE:
                    return False
            return True

        def go(step, env):
            if step == len(plan):
                args = self.args(rule.head.args, hdecl.sorts, env)
                if args is None:
                    return
                body = self.formula(rule.body, env)
                if body is G_FALSE:
                    return
                head = self.base.index[GroundAtom(rule.head.pred, args)]
                out.append(GroundRule(head, body, source))
                return
            s = plan[step]
            if s[0] == "enum":
                for v in st.domains[s[2]]:
                    env2 = {**env, s[1]: v}
                    if passes(step + 1, env2):
                        go(step + 1, env2)
                return
            atom = s[1]
            for tup in st.relations[atom.pred]:
                env2 = _match(atom.args, tup, env, variables, st)
                if env2 is not None and passes(step + 1, env2):
                    go(step + 1, env2)

        if passes(0, {}):
            go(0, {})
        return out

    def program(self, program: Program) -> GroundProgram:
        rules = []
        for i, r in enumerate(program.rules):
            rules.extend(self.rule(r, i))
        return GroundProgram(self.structure, self.base, tuple(rules), self.truncations, program)


def _plan_vars(steps):
    out = set()
    for s in steps:
        if s[0] == "enum":
            out.add(s[1])
        else:
            out |= {a.name for a in s[1].args if isinstance(a, Var)}
    return out


def _match(args, tup, env, variables, st):
    env2 = dict(env)
    for a, v in zip(args, tup):
        if isinstance(a, Var):
            if a.name in env2:
                if env2[a.name] != v:
                    return None
            else:
                if v not in st.domain_sets[variables[a.name]]:
                    return None
                env2[a.name] = v
    return env2


def _mentions_defined(f, sig) -> bool:
    if isinstance(f, Atom):
        return sig.is_defined(f.pred)
    if isinstance(f, Not):
        return _mentions_defined(f.arg, sig)
    if isinstance(f, (And, Or)):
        return any(_mentions_defined(g, sig) for g in f.args)
    if isinstance(f, (Exists, Forall)):
        return _mentions_defined(f.body, sig)
    if isinstance(f, AggAtom):
        return _mentions_defined(f.cond, sig)
    return False


def _compare(op, a, b):
    try:
        if op == "=":
            return a == b
        if op == "!=":
            return a != b
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        return a >= b
    except TypeError:
        return op == "!="


def instantiate(program: Program, structure: Structure | None = None) -> GroundProgram:
    structure = structure or Structure.from_program(program)
    return Grounder(structure).program(program)


def ground(program: Program) -> GroundProgram:
    return instantiate(program)


# public truth functions on closed formulas

def _grounder_for(structure, base=None):
    return Grounder(structure, base)


def eval2(structure: Structure, interpretation, formula, env=None, base=None) -> bool:
    """Two-valued truth of a closed formula in the given interpretation."""
    g = _grounder_for(structure, base)
    node = g.formula(formula, env or {})
    return node.two(g.base.encode(interpretation), {})


def eval3(structure: Structure, family, lower, upper, formula, env=None, base=None) -> TruthValue3:
    """Kleene value of a closed formula under the pair (lower, upper)."""
    g = _grounder_for(structure, base)
    fam = family if isinstance(family, AggregateFamily) else AggregateFamily(family)
    node = g.formula(formula, env or {})
    return TruthValue3(node.three(g.base.encode(lower), g.base.encode(upper), fam, {}))


def eval_setexpr3(structure: Structure, lower, upper, variables, condition, env=None,
                  base=None) -> ThreeValuedSet:
    """Three-valued set {variables : condition} under the pair (lower, upper)."""
    g = _grounder_for(structure, base)
    env = env or {}
    names = [v.name for v in variables]
    lo, hi = g.base.encode(lower), g.base.encode(upper)
    fam = AggregateFamily("ult")
    certain, possible = set(), set()
    for tup in itertools.product(*(structure.domains[v.sort] for v in variables)):
        c = g.formula(condition, {**env, **dict(zip(names, tup))}).three(lo, hi, fam, {})
        if c & 1:
            certain.add(tup)
        if c & 2:
            possible.add(tup)
    return ThreeValuedSet(frozenset(certain), frozenset(possible))
