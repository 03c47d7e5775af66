"""Random program and graph generators for property tests and experiments.

Programs are produced as source text so that every generated case also
goes through the parser. All generators take a ``random.Random``.
"""
from __future__ import annotations

import os
import random
from dataclasses import dataclass

# every aggregate kind the generators may emit
ALL_AGGREGATES = ("count", "count_geq", "count_leq", "count_neq", "count_gt",
                  "sum", "sum_geq", "sum_lt", "sum_neq", "prod_geq", "prod_leq",
                  "min", "max", "min_leq", "max_geq", "min_gt", "max_lt",
                  "avg", "avg_geq", "glb_leq", "lub_geq", "glb", "lub", "lb", "ub",
                  "count_eq_sub", "sum_sub", "sum_leq_sub")
# monotone over a non-negative value sort
MONOTONE_AGGREGATES = ("count_geq", "count_gt", "sum_geq", "sum_gt", "max_geq", "max_gt",
                       "min_leq", "min_lt", "lub_geq", "glb_leq", "count_eq_sub", "sum_sub")


def seed_from_env(default: int = 0) -> int:
    return int(os.environ.get("AGGRFIX_SEED", default))


@dataclass
class ProgramShape:
    max_atoms: int = 12
    max_rules_per_pred: int = 2
    max_conjuncts: int = 3
    domain_sizes: tuple = (1, 2, 3)


class _Builder:
    def __init__(self, rng: random.Random, shape: ProgramShape):
        self.rng = rng
        self.k = rng.choice(shape.domain_sizes)
        self.m = rng.randint(1, max(1, shape.max_atoms // self.k))
        self.shape = shape
        self.preds = [f"p{i}" for i in range(self.m)]

    def header(self):
        k, rng = self.k, self.rng
        lines = [f"sort d = int(0..{k - 1}).", "pred e(d, d)."]
        lines += [f"defined {p}(d)." for p in self.preds]
        for x in range(k):
            for y in range(k):
                if rng.random() < 0.4:
                    lines.append(f"e({x}, {y}).")
        return lines

    def head(self, p):
        # X is only available in the body when the head binds it
        self.x = "X" if self.rng.random() < 0.75 else str(self.rng.randrange(self.k))
        return f"{p}({self.x})"

    def arg(self):
        return self.x if self.rng.random() < 0.6 else str(self.rng.randrange(self.k))

    def positive(self, q):
        r = self.rng.random()
        if r < 0.6:
            return f"{q}({self.arg()})"
        if r < 0.85:
            return f"(exists Y in d : e({self.x}, Y) & {q}(Y))"
        return f"e({self.x}, {self.rng.randrange(self.k)})"

    def aggregate(self, name, q, positive_cond=False):
        rng = self.rng
        cond = f"{q}(Y)"
        if rng.random() < 0.3:
            cond = f"{q}(Y) & e({self.x}, Y)"
        elif not positive_cond and rng.random() < 0.15:
            cond = f"not {q}(Y)"
        t = self.x if rng.random() < 0.3 else str(rng.randint(0, self.k + 1))
        return f"{name}({{Y in d : {cond}}}, {t})"

    def rules(self, p, conjunct):
        out = []
        for _ in range(self.rng.randint(1, self.shape.max_rules_per_pred)):
            head = self.head(p)
            parts = [conjunct() for _ in range(self.rng.randint(1, self.shape.max_conjuncts))]
            parts = [x for x in parts if x] or ["true"]
            out.append(f"rule {head} <- {' & '.join(parts)}.")
        return out


def random_stratified(rng: random.Random, shape: ProgramShape = ProgramShape()) -> str:
    """Levels increase with predicate index; strict edges only go downwards."""
    b = _Builder(rng, shape)
    levels, lvl = [], 0
    for _ in b.preds:
        if rng.random() < 0.5:
            lvl += 1
        levels.append(lvl)
    lines = b.header()
    for i, p in enumerate(b.preds):
        same = [q for j, q in enumerate(b.preds) if levels[j] <= levels[i]]
        lower = [q for j, q in enumerate(b.preds) if levels[j] < levels[i]]

        def conjunct(same=same, lower=lower):
            r = rng.random()
            if lower and r < 0.3:
                return f"not {rng.choice(lower)}({b.arg()})"
            if lower and r < 0.6:
                return b.aggregate(rng.choice(ALL_AGGREGATES), rng.choice(lower))
            return b.positive(rng.choice(same))

        lines += b.rules(p, conjunct)
    return "\n".join(lines) + "\n"


def random_definite(rng: random.Random, shape: ProgramShape = ProgramShape()) -> str:
    """Positive bodies with monotone aggregates; recursion is unrestricted."""
    b = _Builder(rng, shape)
    lines = b.header()
    for p in b.preds:
        def conjunct():
            q = rng.choice(b.preds)
            if rng.random() < 0.35:
                return b.aggregate(rng.choice(MONOTONE_AGGREGATES), q, positive_cond=True)
            return b.positive(q)

        lines += b.rules(p, conjunct)
    return "\n".join(lines) + "\n"


def random_general(rng: random.Random, shape: ProgramShape = ProgramShape(max_atoms=10)) -> str:
    """Arbitrary recursion through negation, disjunction and any aggregate."""
    b = _Builder(rng, shape)
    lines = b.header()
    for p in b.preds:
        def conjunct():
            q = rng.choice(b.preds)
            r = rng.random()
            if r < 0.25:
                return f"not {q}({b.arg()})"
            if r < 0.55:
                return b.aggregate(rng.choice(ALL_AGGREGATES), q)
            if r < 0.65:
                return f"({b.positive(q)} | not {rng.choice(b.preds)}({b.arg()}))"
            return b.positive(q)

        lines += b.rules(p, conjunct)
    return "\n".join(lines) + "\n"


def random_normal(rng: random.Random, shape: ProgramShape = ProgramShape(max_atoms=8)) -> str:
    """Conjunctions of literals and aggregate atoms only."""
    b = _Builder(rng, shape)
    lines = b.header()
    for p in b.preds:
        def conjunct():
            q = rng.choice(b.preds)
            r = rng.random()
            if r < 0.3:
                return f"not {q}({b.arg()})"
            if r < 0.6:
                return b.aggregate(rng.choice(ALL_AGGREGATES), q)
            return f"{q}({b.arg()})"

        lines += b.rules(p, conjunct)
    return "\n".join(lines) + "\n"


# graphs

def random_graph(rng: random.Random, max_nodes=6, wmin=0, wmax=8, density=0.35):
    n = rng.randint(2, max_nodes)
    nodes = [f"n{i}" for i in range(n)]
    edges = []
    for u in nodes:
        for v in nodes:
            if u != v and rng.random() < density:
                edges.append((u, v, rng.randint(wmin, wmax)))
    return nodes, edges


def shortest_path_text(nodes, edges, version=1, wmin=0, wmax=8) -> str:
    """Shortest-path program; version 1 is stratified, version 2 recurses through min."""
    lines = [f"sort node = {{{', '.join(nodes)}}}.",
             f"sort w = int({wmin}..{wmax}).",
             "pred edge(node, node, w).",
             "defined cp(node, node, w).",
             "defined sp(node, node, w)."]
    lines += [f"edge({u}, {v}, {w})." for u, v, w in edges]
    lines.append("rule sp(X, Y, W) <- min({C : cp(X, Y, C)}, W).")
    lines.append("rule cp(X, Y, C) <- edge(X, Y, C).")
    prefix = "cp" if version == 1 else "sp"
    lines.append(f"rule cp(X, Y, C1 + C2) <- {prefix}(X, Z, C1) & edge(Z, Y, C2).")
    return "\n".join(lines) + "\n"
