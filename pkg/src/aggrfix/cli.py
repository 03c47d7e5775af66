"""Command-line driver: ``aggrfix run`` and ``aggrfix bench``.

Exit codes: 0 success, 1 user error (input, parse, sort, stratification),
2 capacity exceeded, 3 internal invariant failure.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import oracle
from .aggregates import FAMILIES, Caps
from .errors import AggrfixError, CapacityError, UserError
from .generators import seed_from_env
from .language import parse_program
from .language.analysis import stratify
from .semantics import ALIASES, PAIR_SEMANTICS, SEMANTICS, SemanticsResult, solve
from .structures import GroundAtom, instantiate


@dataclass
class RunConfig:
    program: str
    facts: list = field(default_factory=list)
    semantics: str = "wf"
    family: str = "ult"
    caps: Caps = field(default_factory=Caps)
    format: str = "text"
    oracle: bool = False
    seed: int | None = None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # bad invocations are user errors, not capacity errors
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="aggrfix", description="Solve aggregate programs under fixpoint semantics.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    run = sub.add_parser("run", help="solve one program")
    run.add_argument("file")
    run.add_argument("--facts", action="append", default=[])
    run.add_argument("--semantics", required=True, choices=SEMANTICS + tuple(ALIASES))
    run.add_argument("--approx", default="ult", choices=FAMILIES)
    run.add_argument("--format", default="text", choices=("text", "json"))
    run.add_argument("--oracle", action="store_true", help="cross-check with brute force")
    run.add_argument("--cap-interval", type=int, default=Caps.interval)
    run.add_argument("--cap-subsets", type=int, default=Caps.subsets)
    run.add_argument("--cap-atoms", type=int, default=Caps.atoms)
    bench = sub.add_parser("bench", help="operator counts over a corpus directory")
    bench.add_argument("dir")
    bench.add_argument("--approx", default="ult", choices=FAMILIES)
    bench.add_argument("--format", default="text", choices=("text", "json"))
    return p


def config_from_args(ns) -> RunConfig:
    caps = Caps(interval=ns.cap_interval, subsets=ns.cap_subsets, atoms=ns.cap_atoms)
    if min(caps.interval, caps.subsets, caps.atoms) <= 0:
        raise UserError("caps must be positive")
    return RunConfig(ns.file, ns.facts, ALIASES.get(ns.semantics, ns.semantics), ns.approx,
                     caps, ns.format, ns.oracle, seed_from_env())


def _read(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise UserError(f"cannot read {path}: {e.strerror}") from None


def load(cfg: RunConfig):
    paths = [cfg.program, *cfg.facts]
    return parse_program(*(_read(p) for p in paths), sources=[str(p) for p in paths])


# serialization

def _names(atoms) -> list:
    return sorted(str(a) for a in atoms)


def _model_text(m) -> str:
    return "{" + ", ".join(_names(m)) + "}" if m else "∅"


def to_json(result: SemanticsResult) -> dict:
    out = {"semantics": result.semantics, "family": result.family,
           "exact": result.exact, "base": _names(result.atoms)}
    if result.lower is not None:
        out["atoms"] = {str(a): result.value(a) for a in sorted(result.atoms, key=str)}
    else:
        out["atoms"] = {}
    out["models"] = None if result.models is None else [_names(m) for m in result.models]
    out["stats"] = result.stats
    return out


def emit(result: SemanticsResult, fmt="text") -> str:
    if fmt == "json":
        return json.dumps(to_json(result), sort_keys=True, indent=1, ensure_ascii=False) + "\n"
    lines = [f"semantics: {result.semantics}" + (f" ({result.family})" if result.family else "")]
    if result.lower is not None:
        lines.append(f"exact: {'yes' if result.exact else 'no'}")
        if result.exact:
            lines.append(f"model: {_model_text(result.lower)}")
        for v in "TUF":
            names = [str(a) for a in sorted(result.atoms, key=str) if result.value(a) == v]
            lines.append(f"{v}: {' '.join(names)}".rstrip())
    if result.models is not None:
        lines.append(f"models: {len(result.models)}")
        lines += [f"  {_model_text(m)}" for m in result.models]
    st = result.stats
    lines.append(f"stats: phi_applications={st.get('phi_applications', 0)} "
                 f"truncation={st.get('truncation', 0)} caps_hit={str(st.get('caps_hit', False)).lower()}")
    if st.get("fallbacks"):
        lines.append("fallbacks: " + " ".join(f"{k}={v}" for k, v in st["fallbacks"].items()))
    return "\n".join(lines) + "\n"


_ATOM = re.compile(r"^([^(]+)(?:\((.*)\))?$")
_NUM = re.compile(r"^-?\d+(/\d+)?$")


def atom_from_text(text: str) -> GroundAtom:
    m = _ATOM.match(text)
    if not m:
        raise ValueError(f"not an atom: {text!r}")
    args = ()
    if m.group(2) is not None:
        args = tuple(Fraction(a) if _NUM.match(a) else a for a in m.group(2).split(","))
    return GroundAtom(m.group(1), args)


def result_from_json(data) -> SemanticsResult:
    if isinstance(data, str):
        data = json.loads(data)
    atoms = tuple(atom_from_text(a) for a in data["base"])
    res = SemanticsResult(data["semantics"], data["family"], atoms, stats=dict(data["stats"]))
    if data["atoms"]:
        vals = {atom_from_text(k): v for k, v in data["atoms"].items()}
        res.lower = frozenset(a for a, v in vals.items() if v == "T")
        res.upper = frozenset(a for a, v in vals.items() if v != "F")
    if data["models"] is not None:
        res.models = [frozenset(atom_from_text(a) for a in m) for m in data["models"]]
    return res


# oracle cross-check

def cross_check(program, result: SemanticsResult, caps: Caps) -> str:
    """'agree', 'disagree' or 'skipped (...)'."""
    sem, fam = result.semantics, result.family or "ult"
    budget = oracle.OracleBudget(max_atoms=min(caps.atoms, 16), max_interval=caps.interval,
                                 max_subsets=caps.subsets)
    try:
        np_ = oracle.NaiveProgram(program, budget)
        if sem in PAIR_SEMANTICS:
            if sem == "least":
                m = oracle.naive_least(np_)
                expected = (m, m)
            elif sem == "standard":
                m = oracle.naive_standard(np_, stratify(program).levels)
                expected = (m, m)
            else:
                kind = sem.removeprefix("ultimate-")
                f = "ultimate" if sem.startswith("ultimate-") else fam
                expected = (oracle.naive_kk if kind == "kk" else oracle.naive_wf)(np_, f)
            got = (result.lower, result.upper)
        else:
            if sem == "supported":
                expected = oracle.brute_supported(np_)
            elif sem == "flp":
                expected = oracle.brute_flp_models(np_)
            else:
                f = "ultimate" if sem == "ultimate-stable" else fam
                expected = oracle.brute_stable_models(np_, f)
            expected, got = set(expected), set(result.models)
    except CapacityError as e:
        return f"skipped ({e})"
    return "agree" if got == expected else "disagree"


def run(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    program = load(cfg)
    result = solve(program, cfg.semantics, cfg.family, cfg.caps)
    verdict = cross_check(program, result, cfg.caps) if cfg.oracle else None
    if cfg.format == "json":
        data = json.loads(emit(result, "json"))
        if verdict:
            data["oracle"] = verdict
        out.write(json.dumps(data, sort_keys=True, indent=1, ensure_ascii=False) + "\n")
    else:
        out.write(emit(result))
        if verdict:
            out.write(f"oracle: {verdict}\n")
    return 3 if verdict == "disagree" else 0


# bench

@dataclass
class BenchRow:
    program: str
    n: int
    kk: int
    wf: int
    seconds: float

    @property
    def ok(self) -> bool:
        return self.wf <= 4 * self.n * self.n and self.kk <= self.n + 1


def bench(directory, family="ult") -> list:
    rows = []
    for path in sorted(Path(directory).glob("*.agg")):
        t = time.perf_counter()
        program = parse_program(path.read_text(), sources=[str(path)])
        gp = instantiate(program)
        kk = solve(program, "kk", family, ground=gp).stats["phi_applications"]
        wf = solve(program, "wf", family, ground=gp).stats["phi_applications"]
        rows.append(BenchRow(path.name, len(gp.base), kk, wf, time.perf_counter() - t))
    return rows


def format_bench(rows, fmt="text") -> str:
    if fmt == "json":
        return json.dumps([dict(vars(r), ok=r.ok) for r in rows], indent=1) + "\n"
    lines = [f"{'program':<24} {'n':>5} {'kk':>5} {'wf':>6} {'4n^2':>7} {'sec':>7}  ok"]
    for r in rows:
        lines.append(f"{r.program:<24} {r.n:>5} {r.kk:>5} {r.wf:>6} {4 * r.n * r.n:>7} "
                     f"{r.seconds:>7.3f}  {'yes' if r.ok else 'NO'}")
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        if ns.command == "run":
            return run(config_from_args(ns))
        rows = bench(ns.dir, ns.approx)
        sys.stdout.write(format_bench(rows, ns.format))
        return 0 if all(r.ok for r in rows) else 3
    except AggrfixError as e:
        kind = "capacity" if isinstance(e, CapacityError) else "error"
        print(f"{kind}: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:  # anything else is an engine bug
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
