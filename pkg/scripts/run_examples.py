"""Solve every example program under each semantics and print a summary table."""
import sys
from pathlib import Path

from aggrfix import parse_program, solve
from aggrfix.errors import AggrfixError
from aggrfix.structures import instantiate

ROOT = Path(__file__).resolve().parent.parent / "programs"
RUNS = [("supported", "ult"), ("kk", "ult"), ("wf", "triv"), ("wf", "bnd"), ("wf", "ult"),
        ("ultimate-wf", "ult"), ("stable", "ult"), ("ultimate-stable", "ult"), ("standard", "ult")]


def show(res):
    if res.models is not None:
        return "; ".join("{" + ",".join(sorted(map(str, m))) + "}" for m in res.models) or "none"
    if res.exact:
        return "{" + ",".join(sorted(map(str, res.lower))) + "}"
    u = len(res.upper - res.lower)
    return f"T={len(res.lower)} U={u}"


paths = [Path(p) for p in sys.argv[1:]] or sorted(ROOT.glob("*.agg"))
for path in paths:
    program = parse_program(path.read_text())
    gp = instantiate(program)
    print(f"{path.name}  ({len(gp.base)} atoms, {len(gp.rules)} ground rules)")
    for sem, fam in RUNS:
        try:
            res = solve(program, sem, fam, ground=gp)
            text = show(res)
        except AggrfixError as e:
            text = f"[{type(e).__name__}] {e}"
        label = sem if sem.startswith(("ultimate", "supported", "standard")) else f"{sem}/{fam}"
        print(f"  {label:<16} {text[:100]}")
