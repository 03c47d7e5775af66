"""Write a corpus of generated stratified programs for ``aggrfix bench``."""
import argparse
import random
from pathlib import Path

from aggrfix.generators import ProgramShape, random_stratified, seed_from_env

ap = argparse.ArgumentParser()
ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "programs" / "corpus"))
ap.add_argument("--count", type=int, default=10)
ap.add_argument("--max-atoms", type=int, default=12)
ap.add_argument("--seed", type=int, default=seed_from_env())
args = ap.parse_args()

rng = random.Random(args.seed)
out = Path(args.out)
out.mkdir(parents=True, exist_ok=True)
for i in range(args.count):
    text = random_stratified(rng, ProgramShape(max_atoms=args.max_atoms))
    (out / f"strat_{i:02d}.agg").write_text(f"% generated, seed {args.seed}, index {i}\n" + text)
print(f"wrote {args.count} programs to {out}")
