"""How often do the approximator families differ on random programs?

Counts, over random general programs, how many KK/WF results are strictly
less precise for triv, bnd and ult than for the ultimate approximator, and
how many stable models each family finds.
"""
import argparse
import random
from collections import Counter

from aggrfix import parse_program, solve
from aggrfix.generators import random_general, seed_from_env
from aggrfix.structures import instantiate

ap = argparse.ArgumentParser()
ap.add_argument("--programs", type=int, default=200)
ap.add_argument("--seed", type=int, default=seed_from_env())
args = ap.parse_args()

rng = random.Random(args.seed)
less_precise, exact, stable = Counter(), Counter(), Counter()
for _ in range(args.programs):
    p = parse_program(random_general(rng))
    gp = instantiate(p)
    for kind in ("kk", "wf"):
        ref = solve(p, f"ultimate-{kind}", ground=gp)
        exact[f"{kind}/ultimate"] += ref.exact
        for fam in ("triv", "bnd", "ult"):
            r = solve(p, kind, fam, ground=gp)
            exact[f"{kind}/{fam}"] += r.exact
            less_precise[f"{kind}/{fam}"] += (r.lower, r.upper) != (ref.lower, ref.upper)
    for fam in ("triv", "bnd", "ult"):
        stable[fam] += len(solve(p, "stable", fam, ground=gp).models)
    stable["ultimate"] += len(solve(p, "ultimate-stable", ground=gp).models)

print(f"{args.programs} programs, seed {args.seed}")
print(f"{'result':<14} {'exact':>6} {'< ultimate':>11}")
for key in sorted(exact):
    print(f"{key:<14} {exact[key]:>6} {less_precise.get(key, 0):>11}")
print("stable models found:", dict(stable))
