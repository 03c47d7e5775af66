"""Lexer, recursive-descent parser and resolver for the program language.

Parsing happens in two stages. The parser builds a raw tree of tuples that
records source positions; the resolver then classifies identifiers
(variable, constant, function), infers variable sorts and type-checks,
producing the AST of ``ast.py``. All failures surface as ``ParseError``
carrying positioned diagnostics.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .. import aggregates
from ..errors import Diagnostic, ParseError
from .ast import (AggAtom, And, Atom, BinOp, Compare, Const, Exists, Fact, Forall, Func,
                  FuncDecl, FuncEntry, Neg, Not, Or, PredDecl, Program, Rule, Signature,
                  SortDecl, TRUE, Truth, Var, flatten)

KEYWORDS = {"sort", "defined", "pred", "func", "rule", "not", "exists", "forall",
            "true", "false", "int", "rat", "in"}
CMP_OPS = {"=", "!=", "<", "<=", ">", ">="}
EXTREMAL = ("min", "max", "glb", "lub")

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\f]+)
  | (?P<nl>\n)
  | (?P<comment>%[^\n]*)
  | (?P<num>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><-|<=|>=|!=|\.\.|->|[=<>(){},.:&|+\-*/⊂])
""", re.X)


@dataclass(frozen=True)
class Token:
    kind: str  # num | name | op | eof
    text: str
    line: int
    col: int


def tokenize(text: str, source: str, diags: list) -> list[Token]:
    toks, line, start, pos = [], 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            diags.append(Diagnostic("lexical", f"unexpected character {text[pos]!r}",
                                    line, pos - start + 1, source))
            pos += 1
            continue
        kind = m.lastgroup
        if kind == "nl":
            line, start = line + 1, m.end()
        elif kind not in ("ws", "comment"):
            toks.append(Token(kind, m.group(), line, pos - start + 1))
        pos = m.end()
    toks.append(Token("eof", "", line, pos - start + 1))
    return toks


class _Fail(Exception):
    def __init__(self, tok: Token, message: str):
        self.tok, self.message = tok, message


class _Parser:
    def __init__(self, toks, source):
        self.toks, self.i, self.source = toks, 0, source

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k=1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text, tok=None) -> bool:
        tok = tok or self.tok
        return tok.kind in ("op", "name") and tok.text == text

    def take(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text) -> Token:
        if not self.at(text):
            raise _Fail(self.tok, f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.take()

    def ident(self, what="identifier") -> Token:
        t = self.tok
        if t.kind != "name" or t.text in KEYWORDS:
            raise _Fail(t, f"expected {what}, found {t.text or 'end of input'!r}")
        return self.take()

    def pos(self, tok=None):
        tok = tok or self.tok
        return (self.source, tok.line, tok.col)

    # statements
    def statements(self, diags):
        items = []
        while self.tok.kind != "eof":
            start = self.i
            try:
                items.append(self.statement())
            except _Fail as e:
                diags.append(Diagnostic("syntax", e.message, e.tok.line, e.tok.col, self.source))
                self.i = max(self.i, start + 1)
                while self.tok.kind != "eof" and not self.at("."):
                    self.i += 1
                if self.at("."):
                    self.i += 1
        return items

    def statement(self):
        t = self.tok
        if self.at("sort"):
            return self.sort_decl()
        if self.at("defined") or self.at("pred"):
            self.take()
            name = self.ident("predicate name")
            sorts = self.sort_list() if self.at("(") else ()
            self.expect(".")
            return ("pred", name.text, sorts, t.text == "defined", self.pos(name))
        if self.at("func"):
            self.take()
            name = self.ident("function name")
            sorts = self.sort_list() if self.at("(") else ()
            self.expect("->")
            result = self.ident("sort name").text
            self.expect(".")
            return ("func", name.text, sorts, result, self.pos(name))
        if self.at("rule"):
            self.take()
            head = self.head()
            self.expect("<-")
            body = self.formula()
            self.expect(".")
            return ("rule", head, body, self.pos(t))
        head = self.head()
        if self.at("."):
            self.take()
            return ("fact", head, self.pos(t))
        if self.at("<-"):
            self.take()
            body = self.formula()
            self.expect(".")
            return ("rule", head, body, self.pos(t))
        if self.at("="):
            self.take()
            value = self.term()
            self.expect(".")
            return ("entry", head[1], head[2], value, self.pos(t))
        raise _Fail(self.tok, f"unexpected {self.tok.text or 'end of input'!r}")

    def sort_list(self):
        self.expect("(")
        sorts = [self.ident("sort name").text]
        while self.at(","):
            self.take()
            sorts.append(self.ident("sort name").text)
        self.expect(")")
        return tuple(sorts)

    def sort_decl(self):
        self.expect("sort")
        name = self.ident("sort name")
        self.expect("=")
        if self.at("{"):
            self.take()
            values = [self.value()]
            while self.at(","):
                self.take()
                values.append(self.value())
            self.expect("}")
            kind, params = "enum", tuple(values)
        elif self.at("int") or self.at("rat"):
            kind = self.take().text
            self.expect("(")
            lo = self.number()
            self.expect("..")
            hi = self.number()
            params = (lo, hi)
            if kind == "rat":
                self.expect(",")
                params = (lo, hi, self.number())
            self.expect(")")
        else:
            raise _Fail(self.tok, "expected '{', 'int' or 'rat' in sort declaration")
        self.expect(".")
        return ("sort", name.text, kind, params, self.pos(name))

    def number(self) -> Fraction:
        sign = 1
        if self.at("-"):
            self.take()
            sign = -1
        if self.tok.kind != "num":
            raise _Fail(self.tok, "expected a number")
        v = Fraction(int(self.take().text))
        if self.at("/") and self.peek().kind == "num":
            self.take()
            den = int(self.take().text)
            if den == 0:
                raise _Fail(self.tok, "zero denominator")
            v /= den
        return sign * v

    def value(self):
        if self.tok.kind == "name" and self.tok.text not in KEYWORDS:
            return self.take().text
        return self.number()

    def head(self):
        name = self.ident("atom")
        args = self.args() if self.at("(") else ()
        return ("atom", name.text, args, self.pos(name))

    def args(self):
        self.expect("(")
        if self.at(")"):
            self.take()
            return ()
        out = [self.term()]
        while self.at(","):
            self.take()
            out.append(self.term())
        self.expect(")")
        return tuple(out)

    # formulas
    def formula(self):
        f = self.disj()
        while self.at("<-") or self.at("⊂"):
            t = self.take()
            g = self.disj()
            f = ("or", [f, ("not", g, self.pos(t))], self.pos(t))
        return f

    def disj(self):
        t = self.tok
        items = [self.conj()]
        while self.at("|"):
            self.take()
            items.append(self.conj())
        return items[0] if len(items) == 1 else ("or", items, self.pos(t))

    def conj(self):
        t = self.tok
        items = [self.unary()]
        while self.at("&"):
            self.take()
            items.append(self.unary())
        return items[0] if len(items) == 1 else ("and", items, self.pos(t))

    def unary(self):
        if self.at("not"):
            t = self.take()
            return ("not", self.unary(), self.pos(t))
        return self.primary()

    def primary(self):
        t = self.tok
        if self.at("true") or self.at("false"):
            self.take()
            return ("truth", t.text == "true", self.pos(t))
        if self.at("exists") or self.at("forall"):
            self.take()
            binder = self.binder()
            self.expect(":")
            return ("q", t.text, binder, self.formula(), self.pos(t))
        if self.at("("):
            save = self.i
            try:
                self.take()
                f = self.formula()
                self.expect(")")
                if not (self.tok.text in CMP_OPS or self.tok.text in ("+", "-", "*")):
                    return f
            except _Fail:
                pass
            self.i = save
            return self.comparison()
        if t.kind == "name" and t.text not in KEYWORDS:
            if self.at("(", self.peek()) and self.at("{", self.peek(2)):
                return self.aggregate()
            save = self.i
            lhs = self.term()
            if self.tok.text in CMP_OPS:
                op = self.take().text
                return ("cmp", op, lhs, self.term(), self.pos(t))
            if lhs[0] == "sym":
                return ("atom", lhs[1], (), lhs[2])
            if lhs[0] == "app":
                return ("atom", lhs[1], lhs[2], lhs[3])
            self.i = save
            raise _Fail(t, "expected an atom or a comparison")
        return self.comparison()

    def comparison(self):
        t = self.tok
        lhs = self.term()
        if self.tok.text not in CMP_OPS:
            raise _Fail(self.tok, "expected a comparison operator")
        op = self.take().text
        return ("cmp", op, lhs, self.term(), self.pos(t))

    def binder(self):
        name = self.ident("variable")
        sort = None
        if self.at("in"):
            self.take()
            sort = self.ident("sort name").text
        return (name.text, sort, self.pos(name))

    def aggregate(self):
        name = self.ident("aggregate name")
        self.expect("(")
        self.expect("{")
        paren = self.at("(")
        if paren:
            self.take()
        binders = [self.binder()]
        while self.at(","):
            self.take()
            binders.append(self.binder())
        if paren:
            self.expect(")")
        self.expect(":")
        cond = self.formula()
        self.expect("}")
        self.expect(",")
        term = self.term()
        self.expect(")")
        return ("agg", name.text, tuple(binders), cond, term, self.pos(name))

    # terms
    def term(self):
        t = self.tok
        left = self.product()
        while self.at("+") or self.at("-"):
            op = self.take().text
            left = ("bin", op, left, self.product(), self.pos(t))
        return left

    def product(self):
        t = self.tok
        left = self.unary_term()
        while self.at("*"):
            self.take()
            left = ("bin", "*", left, self.unary_term(), self.pos(t))
        return left

    def unary_term(self):
        t = self.tok
        if self.at("-"):
            if self.peek().kind == "num":
                return ("num", self.number(), self.pos(t))
            self.take()
            return ("neg", self.unary_term(), self.pos(t))
        if t.kind == "num":
            return ("num", self.number(), self.pos(t))
        if t.kind == "name" and t.text not in KEYWORDS:
            self.take()
            if self.at("("):
                return ("app", t.text, self.args(), self.pos(t))
            return ("sym", t.text, self.pos(t))
        if self.at("("):
            self.take()
            inner = self.term()
            self.expect(")")
            return inner
        raise _Fail(t, f"expected a term, found {t.text or 'end of input'!r}")


class _Resolver:
    def __init__(self, items, diags):
        self.items = items
        self.diags = diags
        self.sig = Signature()
        self.constants: dict[str, set] = {}

    def error(self, kind, message, pos):
        source, line, col = pos
        self.diags.append(Diagnostic(kind, message, line, col, source))

    def run(self) -> Program:
        for it in self.items:
            if it[0] == "sort":
                self.declare_sort(*it[1:])
        for it in self.items:
            if it[0] == "pred":
                self.declare_pred(*it[1:])
            elif it[0] == "func":
                self.declare_func(*it[1:])
        rules, facts, entries = [], [], []
        for it in self.items:
            try:
                if it[0] == "fact":
                    r = self.fact(*it[1:])
                    if isinstance(r, Rule):
                        rules.append(r)
                    elif r is not None:
                        facts.append(r)
                elif it[0] == "entry":
                    e = self.entry(*it[1:])
                    if e is not None:
                        entries.append(e)
                elif it[0] == "rule":
                    r = _RuleResolver(self, it).resolve()
                    if r is not None:
                        rules.append(r)
            except _Abort:
                pass
        return Program(self.sig, tuple(rules), tuple(dict.fromkeys(facts)), tuple(entries))

    # declarations
    def declare_sort(self, name, kind, params, pos):
        if kind == "int" and any(p.denominator != 1 for p in params):
            return self.error("sort", f"int sort {name} needs integer bounds", pos)
        if kind == "rat" and params[2] <= 0:
            return self.error("sort", f"rat sort {name} needs a positive step", pos)
        if kind != "enum" and params[0] > params[1]:
            return self.error("sort", f"empty range in sort {name}", pos)
        if kind == "enum":
            params = tuple(dict.fromkeys(params))
        decl = SortDecl(name, kind, params)
        old = self.sig.sorts.get(name)
        if old is not None and old != decl:
            return self.error("sort", f"conflicting declarations of sort {name}", pos)
        self.sig.sorts[name] = decl
        for v in decl.values if kind == "enum" else ():
            if isinstance(v, str):
                self.constants.setdefault(v, set()).add(name)

    def check_sorts(self, sorts, pos) -> bool:
        ok = True
        for s in sorts:
            if s not in self.sig.sorts:
                self.error("sort", f"undeclared sort {s}", pos)
                ok = False
        return ok

    def declare_pred(self, name, sorts, defined, pos):
        if not self.check_sorts(sorts, pos):
            return
        decl = PredDecl(name, tuple(sorts), defined)
        old = self.sig.preds.get(name)
        if name in self.sig.funcs or (old is not None and old != decl):
            return self.error("sort", f"conflicting declarations of {name}", pos)
        self.sig.preds[name] = decl

    def declare_func(self, name, sorts, result, pos):
        if not self.check_sorts(tuple(sorts) + (result,), pos):
            return
        decl = FuncDecl(name, tuple(sorts), result)
        old = self.sig.funcs.get(name)
        if name in self.sig.preds or (old is not None and old != decl):
            return self.error("sort", f"conflicting declarations of {name}", pos)
        self.sig.funcs[name] = decl

    # ground statements
    def ground_value(self, raw, sort, pos):
        if raw[0] == "num":
            v = raw[1]
        elif raw[0] == "sym" and raw[1] in self.constants:
            v = raw[1]
        else:
            self.error("sort", "facts and table entries need constant arguments", raw[-1])
            raise _Abort
        if sort is not None and v not in self.sig.sorts[sort].values:
            self.error("sort", f"{_show(v)} is not in sort {sort}", raw[-1])
            raise _Abort
        return v

    def fact(self, head, pos):
        _, name, args, apos = head
        decl = self.sig.preds.get(name)
        if decl is None:
            self.error("unknown-symbol", f"unknown predicate {name}", apos)
            return None
        if len(args) != len(decl.sorts):
            self.error("sort", f"{name} expects {len(decl.sorts)} arguments", apos)
            return None
        values = tuple(self.ground_value(a, s, apos) for a, s in zip(args, decl.sorts))
        if decl.defined:
            return Rule(Atom(name, tuple(Const(v) for v in values)), TRUE, pos[1])
        return Fact(name, values)

    def entry(self, name, args, value, pos):
        decl = self.sig.funcs.get(name)
        if decl is None:
            self.error("unknown-symbol", f"unknown function {name}", pos)
            return None
        if len(args) != len(decl.sorts):
            self.error("sort", f"{name} expects {len(decl.sorts)} arguments", pos)
            return None
        vals = tuple(self.ground_value(a, s, pos) for a, s in zip(args, decl.sorts))
        return FuncEntry(name, vals, self.ground_value(value, decl.result, pos))


class _Abort(Exception):
    pass


class _Binder:
    __slots__ = ("name", "pos", "sorts", "sort")

    def __init__(self, name, pos, sort=None):
        self.name, self.pos = name, pos
        self.sorts = {sort} if sort else set()
        self.sort = sort


class _RuleResolver:
    """Sort inference and type checking for a single rule."""

    def __init__(self, outer: _Resolver, item):
        self.o = outer
        self.sig = outer.sig
        _, self.head, self.body, self.pos = item
        self.rule_scope: dict[str, _Binder] = {}
        self.res: dict[int, tuple] = {}  # id(raw sym) -> resolution
        self.binder_of: dict[int, _Binder] = {}  # id(raw binder) -> binder
        self.links: list[tuple] = []
        self.failed = False

    def error(self, kind, message, pos):
        self.o.error(kind, message, pos)
        self.failed = True

    def resolve(self):
        hname, hargs, hpos = self.head[1], self.head[2], self.head[3]
        hdecl = self.sig.preds.get(hname)
        if hdecl is None:
            self.error("unknown-symbol", f"unknown predicate {hname}", hpos)
            return None
        if not hdecl.defined:
            self.error("sort", f"rule head {hname} is not a defined predicate", hpos)
            return None
        self.collect_atom(self.head, {})
        self.collect(self.body, {})
        if self.failed:
            return None
        self.solve()
        if self.failed:
            return None
        head = self.build_formula(self.head)
        body = self.build_formula(self.body)
        if self.failed:
            return None
        return Rule(head, body, self.pos[1])

    # pass 1
    def lookup(self, name, scope, pos):
        if name in scope:
            return ("var", scope[name])
        if name in self.rule_scope:
            return ("var", self.rule_scope[name])
        if name in self.o.constants:
            return ("const", name)
        f = self.sig.funcs.get(name)
        if f is not None and not f.sorts:
            return ("func", name)
        if name[0].isupper() or name[0] == "_":
            b = self.rule_scope[name] = _Binder(name, pos)
            return ("var", b)
        self.error("unknown-symbol", f"unknown symbol {name}", pos)
        return None

    def collect_term(self, t, scope, sort=None):
        kind = t[0]
        if kind == "sym":
            r = self.lookup(t[1], scope, t[2])
            if r is None:
                return None
            self.res[id(t)] = r
            if r[0] == "var" and sort is not None:
                r[1].sorts.add(sort)
            return r
        if kind == "app":
            f = self.sig.funcs.get(t[1])
            if f is None:
                self.error("unknown-symbol", f"unknown function {t[1]}", t[3])
                return None
            if len(t[2]) != len(f.sorts):
                self.error("sort", f"{t[1]} expects {len(f.sorts)} arguments", t[3])
                return None
            for a, s in zip(t[2], f.sorts):
                self.collect_term(a, scope, s)
        elif kind == "bin":
            self.collect_term(t[2], scope)
            self.collect_term(t[3], scope)
        elif kind == "neg":
            self.collect_term(t[1], scope)
        return None

    def collect_atom(self, f, scope):
        _, name, args, pos = f
        decl = self.sig.preds.get(name)
        if decl is None:
            self.error("unknown-symbol", f"unknown predicate {name}", pos)
            return
        if len(args) != len(decl.sorts):
            self.error("sort", f"{name} expects {len(decl.sorts)} arguments", pos)
            return
        for a, s in zip(args, decl.sorts):
            self.collect_term(a, scope, s)

    def new_binder(self, raw, scope):
        name, sort, pos = raw
        if name in self.o.constants or name in self.sig.funcs:
            self.error("sort", f"{name} is a constant and cannot be bound", pos)
        if sort is not None and sort not in self.sig.sorts:
            self.error("sort", f"undeclared sort {sort}", pos)
            sort = None
        b = _Binder(name, pos, sort)
        self.binder_of[id(raw)] = b
        inner = dict(scope)
        inner[name] = b
        return b, inner

    def collect(self, f, scope):
        kind = f[0]
        if kind == "atom":
            self.collect_atom(f, scope)
        elif kind == "not":
            self.collect(f[1], scope)
        elif kind in ("and", "or"):
            for g in f[1]:
                self.collect(g, scope)
        elif kind == "q":
            _, inner = self.new_binder(f[2], scope)
            self.collect(f[3], inner)
        elif kind == "cmp":
            left = self.collect_term(f[2], scope)
            right = self.collect_term(f[3], scope)
            for a, b in ((left, right), (right, left)):
                if a and a[0] == "var" and b:
                    if b[0] == "var":
                        self.links.append((a[1], b[1]))
                    elif b[0] == "const" and len(self.o.constants[b[1]]) == 1:
                        a[1].sorts.add(next(iter(self.o.constants[b[1]])))
        elif kind == "agg":
            _, name, binders, cond, term, pos = f
            kind_ = aggregates.lookup(name)
            if kind_ is None:
                self.error("unknown-symbol", f"unknown aggregate {name}", pos)
                return
            inner = scope
            bs = []
            for raw in binders:
                b, inner = self.new_binder(raw, inner)
                bs.append(b)
            self.collect(cond, inner)
            r = self.collect_term(term, scope)
            if r and r[0] == "var" and kind_.base in EXTREMAL and bs:
                self.links.append((r[1], bs[0]))

    def solve(self):
        binders = list(self.rule_scope.values()) + list(self.binder_of.values())
        for b in binders:
            if len(b.sorts) > 1:
                self.error("sort", f"variable {b.name} used with sorts "
                           f"{', '.join(sorted(b.sorts))}", b.pos)
            elif b.sorts:
                b.sort = next(iter(b.sorts))
        changed = True
        while changed:
            changed = False
            for a, b in self.links:
                if a.sort is None and b.sort is not None:
                    a.sort, changed = b.sort, True
        for b in binders:
            if b.sort is None and not self.failed:
                self.error("sort", f"cannot infer the sort of variable {b.name}", b.pos)

    # pass 2
    def build_term(self, t, sort=None):
        kind = t[0]
        if kind == "num":
            out = Const(t[1])
        elif kind == "sym":
            r = self.res[id(t)]
            if r[0] == "var":
                out = Var(r[1].name, r[1].sort)
            elif r[0] == "const":
                out = Const(r[1])
            else:
                out = Func(r[1], ())
        elif kind == "app":
            f = self.sig.funcs[t[1]]
            out = Func(t[1], tuple(self.build_term(a, s) for a, s in zip(t[2], f.sorts)))
        elif kind == "bin":
            out = BinOp(t[1], self.build_term(t[2]), self.build_term(t[3]))
        else:
            out = Neg(self.build_term(t[1]))
        if sort is not None and isinstance(out, Const) \
                and out.value not in self.sig.sorts[sort].values:
            self.error("sort", f"{_show(out.value)} is not in sort {sort}", t[-1])
        return out

    def build_formula(self, f):
        kind = f[0]
        if kind == "atom":
            decl = self.sig.preds[f[1]]
            return Atom(f[1], tuple(self.build_term(a, s) for a, s in zip(f[2], decl.sorts)))
        if kind == "truth":
            return Truth(f[1])
        if kind == "not":
            return Not(self.build_formula(f[1]))
        if kind == "and":
            return And(flatten(And, [self.build_formula(g) for g in f[1]]))
        if kind == "or":
            return Or(flatten(Or, [self.build_formula(g) for g in f[1]]))
        if kind == "q":
            b = self.binder_of[id(f[2])]
            cls = Exists if f[1] == "exists" else Forall
            return cls(Var(b.name, b.sort), self.build_formula(f[3]))
        if kind == "cmp":
            return Compare(f[1], self.build_term(f[2]), self.build_term(f[3]))
        _, name, binders, cond, term, pos = f
        vs = tuple(Var(self.binder_of[id(r)].name, self.binder_of[id(r)].sort) for r in binders)
        k = aggregates.lookup(name)
        if k.base not in ("count", "custom"):
            decl = self.sig.sorts[vs[0].sort]
            if not all(not isinstance(v, str) for v in decl.values):
                self.error("sort", f"{name} needs a numeric first variable", pos)
        return AggAtom(name, vs, self.build_formula(cond), self.build_term(term))


def _show(v) -> str:
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return str(v)


def parse_program(*texts: str, sources=None) -> Program:
    """Parse and resolve one or more source texts into a single program."""
    sources = sources or [f"<input{i}>" if i else "<input>" for i in range(len(texts))]
    diags, items = [], []
    for text, source in zip(texts, sources):
        toks = tokenize(text, source, diags)
        items.extend(_Parser(toks, source).statements(diags))
    if diags:
        raise ParseError(diags)
    program = _Resolver(items, diags).run()
    if diags:
        raise ParseError(diags)
    return program
