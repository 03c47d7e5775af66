"""Pretty-printer producing text that parses back to the same AST."""
from __future__ import annotations

from fractions import Fraction

from .ast import (AggAtom, And, Atom, BinOp, Compare, Const, Exists, Forall, Func, Neg, Not,
                  Or, Program, Rule, TRUE, Truth, Var)


def format_value(v) -> str:
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, int):
        return str(v)
    return v


def term_to_text(t) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        return format_value(t.value)
    if isinstance(t, Func):
        if not t.args:
            return t.name
        return f"{t.name}({', '.join(term_to_text(a) for a in t.args)})"
    if isinstance(t, BinOp):
        wrap = lambda s: f"({term_to_text(s)})" if isinstance(s, BinOp) else term_to_text(s)
        return f"{wrap(t.left)} {t.op} {wrap(t.right)}"
    if isinstance(t, Neg):
        return f"-({term_to_text(t.arg)})"
    raise TypeError(f"not a term: {t!r}")


def atom_to_text(a: Atom) -> str:
    if not a.args:
        return a.pred
    return f"{a.pred}({', '.join(term_to_text(x) for x in a.args)})"


_PREC = {Or: 1, And: 2, Not: 3}


def _prec(f) -> int:
    return _PREC.get(type(f), 4 if not isinstance(f, (Exists, Forall)) else 0)


def formula_to_text(f, top=True) -> str:
    if isinstance(f, Atom):
        return atom_to_text(f)
    if isinstance(f, Truth):
        return "true" if f.value else "false"
    if isinstance(f, Compare):
        return f"{term_to_text(f.left)} {f.op} {term_to_text(f.right)}"
    if isinstance(f, AggAtom):
        vs = ", ".join(f"{v.name} in {v.sort}" for v in f.vars)
        return f"{f.name}({{{vs} : {formula_to_text(f.cond)}}}, {term_to_text(f.term)})"
    if isinstance(f, (Exists, Forall)):
        q = "exists" if isinstance(f, Exists) else "forall"
        s = f"{q} {f.var.name} in {f.var.sort} : {formula_to_text(f.body)}"
        return s if top else f"({s})"
    if isinstance(f, Not):
        inner = formula_to_text(f.arg, top=False)
        return f"not {inner}" if _prec(f.arg) >= 3 else f"not ({formula_to_text(f.arg)})"
    if isinstance(f, (And, Or)):
        me = _prec(f)
        sep = " & " if isinstance(f, And) else " | "
        parts = []
        for g in f.args:
            s = formula_to_text(g, top=False)
            if _prec(g) <= me and not isinstance(g, (Exists, Forall)):
                s = f"({formula_to_text(g)})"
            parts.append(s)
        return sep.join(parts)
    raise TypeError(f"not a formula: {f!r}")


def rule_to_text(r: Rule) -> str:
    if r.body == TRUE and all(isinstance(a, Const) for a in r.head.args):
        return f"{atom_to_text(r.head)}."
    return f"rule {atom_to_text(r.head)} <- {formula_to_text(r.body)}."


def program_to_text(p: Program) -> str:
    sig = p.signature
    lines = []
    for s in sig.sorts.values():
        if s.kind == "enum":
            body = "{" + ", ".join(format_value(v) for v in s.params) + "}"
        elif s.kind == "int":
            body = f"int({format_value(s.params[0])}..{format_value(s.params[1])})"
        else:
            lo, hi, step = (format_value(x) for x in s.params)
            body = f"rat({lo}..{hi}, {step})"
        lines.append(f"sort {s.name} = {body}.")
    for d in sig.preds.values():
        kw = "defined" if d.defined else "pred"
        args = f"({', '.join(d.sorts)})" if d.sorts else ""
        lines.append(f"{kw} {d.name}{args}.")
    for d in sig.funcs.values():
        args = f"({', '.join(d.sorts)})" if d.sorts else ""
        lines.append(f"func {d.name}{args} -> {d.result}.")
    for e in p.func_entries:
        args = f"({', '.join(format_value(v) for v in e.args)})" if e.args else ""
        lines.append(f"{e.name}{args} = {format_value(e.value)}.")
    for fact in p.facts:
        args = f"({', '.join(format_value(v) for v in fact.args)})" if fact.args else ""
        lines.append(f"{fact.pred}{args}.")
    for r in p.rules:
        lines.append(rule_to_text(r))
    return "\n".join(lines) + "\n"
