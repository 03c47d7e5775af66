"""Program operators (T_P, Phi_P, U_P) and the semantics drivers."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from . import lattice as aft
from .aggregates import FAMILIES, AggregateFamily, Caps
from .errors import CapacityError, DefinitenessError, StratificationError, UnsupportedShapeError
from .language.analysis import is_definite, is_normal_body, stratify
from .language.ast import Program
from .structures import GroundProgram, instantiate

SEMANTICS = ("supported", "least", "standard", "kk", "wf", "stable",
             "ultimate-kk", "ultimate-wf", "ultimate-stable", "flp")
PAIR_SEMANTICS = ("least", "standard", "kk", "wf", "ultimate-kk", "ultimate-wf")
ALIASES = {"least-definite": "least", "standard-stratified": "standard", "flp-stable": "flp"}


# operators on bitmask interpretations

def tp_mask(gp: GroundProgram, I: int) -> int:
    memo: dict = {}
    out = 0
    for r in gp.rules:
        bit = 1 << r.head
        if not out & bit and r.body.two(I, memo):
            out |= bit
    return out


def phi_mask(gp: GroundProgram, family: AggregateFamily, lo: int, hi: int):
    memo: dict = {}
    nlo = nhi = 0
    for r in gp.rules:
        bit = 1 << r.head
        if nlo & bit:
            continue
        c = r.body.three(lo, hi, family, memo)
        if c & 1:
            nlo |= bit
        if c & 2:
            nhi |= bit
    return nlo, nhi


def _family(family, caps=None) -> AggregateFamily:
    if isinstance(family, AggregateFamily):
        return family
    return AggregateFamily(family, caps or Caps())


def lattice_of(gp: GroundProgram) -> aft.PowersetLattice:
    return aft.PowersetLattice(len(gp.base))


def phi_approximator(gp: GroundProgram, family="ult", caps=None) -> aft.Approximator:
    fam = _family(family, caps)
    return aft.Approximator(lattice_of(gp), lambda x, y: phi_mask(gp, fam, x, y),
                            base_op=lambda x: tp_mask(gp, x), name=f"phi[{fam.name}]")


def ultimate_approximator(gp: GroundProgram, caps=None) -> aft.Approximator:
    caps = caps or Caps()
    return aft.ultimate_of(lattice_of(gp), lambda x: tp_mask(gp, x), cap=caps.interval)


# public operators on frozensets of ground atoms

def tp(gp: GroundProgram, interpretation) -> frozenset:
    return gp.base.decode(tp_mask(gp, gp.base.encode(interpretation)))


def phi(gp: GroundProgram, family, lower, upper) -> aft.ConsistentPair:
    lo, hi = phi_mask(gp, _family(family), gp.base.encode(lower), gp.base.encode(upper))
    return aft.ConsistentPair(gp.base.decode(lo), gp.base.decode(hi))


def ultimate_op(gp: GroundProgram, lower, upper, caps=None) -> aft.ConsistentPair:
    A = ultimate_approximator(gp, caps)
    lo, hi = A(gp.base.encode(lower), gp.base.encode(upper))
    return aft.ConsistentPair(gp.base.decode(lo), gp.base.decode(hi))


# model enumeration

def _check_atoms(gp, caps):
    n = len(gp.base)
    if n > caps.atoms:
        raise CapacityError(f"{n} ground atoms exceed the enumeration cap {caps.atoms}")


def supported_masks(gp: GroundProgram, caps=None) -> list:
    caps = caps or Caps()
    _check_atoms(gp, caps)
    return [I for I in range(1 << len(gp.base)) if tp_mask(gp, I) == I]


def model_masks(gp: GroundProgram, caps=None) -> list:
    caps = caps or Caps()
    _check_atoms(gp, caps)
    return [I for I in range(1 << len(gp.base)) if tp_mask(gp, I) & ~I == 0]


def minimal_masks(masks) -> list:
    masks = sorted(set(masks), key=lambda m: (bin(m).count("1"), m))
    out = []
    for m in masks:
        if not any(k & ~m == 0 for k in out):
            out.append(m)
    return out


def _canonical(gp, masks) -> list:
    sets = [gp.base.decode(m) for m in set(masks)]
    return sorted(sets, key=lambda s: sorted(str(a) for a in s))


def supported_models(gp: GroundProgram, caps=None) -> list:
    return _canonical(gp, supported_masks(gp, caps))


def models(gp: GroundProgram, caps=None) -> list:
    return _canonical(gp, model_masks(gp, caps))


def least_model_definite(gp: GroundProgram) -> frozenset:
    if gp.program is not None and not is_definite(gp.program):
        raise DefinitenessError("program is not definite")
    L = lattice_of(gp)
    return gp.base.decode(aft.lfp_monotone(L, lambda I: tp_mask(gp, I)))


def standard_model_mask(gp: GroundProgram) -> int:
    strat = stratify(gp.program)
    if not strat.ok:
        raise StratificationError(strat.cycle, strat.via)
    levels = strat.levels
    by_level: dict = {}
    for r in gp.rules:
        lvl = levels[gp.base.atoms[r.head].pred]
        by_level.setdefault(lvl, []).append(r)
    L = lattice_of(gp)
    I = 0
    for lvl in sorted(by_level):
        rules = by_level[lvl]
        frozen = I

        def step(J, rules=rules, frozen=frozen):
            memo: dict = {}
            out = frozen
            for r in rules:
                if r.body.two(J, memo):
                    out |= 1 << r.head
            return out

        I = aft.lfp_monotone(L, step, start=frozen)
    return I


def standard_model(gp: GroundProgram) -> frozenset:
    return gp.base.decode(standard_model_mask(gp))


# FLP

def _check_normal(gp: GroundProgram):
    if gp.program is None:
        return
    for r in gp.program.rules:
        if not is_normal_body(r.body):
            raise UnsupportedShapeError(
                f"rule for {r.head.pred} (line {r.line}) is not a conjunction of literals")


def flp_reduct(gp: GroundProgram, interpretation) -> GroundProgram:
    """Drop every ground rule with a body conjunct false in the interpretation."""
    _check_normal(gp)
    I = interpretation if isinstance(interpretation, int) else gp.base.encode(interpretation)
    memo: dict = {}
    # a conjunction is false iff one of its conjuncts is
    kept = tuple(r for r in gp.rules if r.body.two(I, memo))
    return GroundProgram(gp.structure, gp.base, kept, gp.truncations, gp.program)


def flp_stable_check(gp: GroundProgram, interpretation, caps=None) -> bool:
    caps = caps or Caps()
    I = interpretation if isinstance(interpretation, int) else gp.base.encode(interpretation)
    red = flp_reduct(gp, I)
    if tp_mask(red, I) & ~I:
        return False
    n = bin(I).count("1")
    if n > caps.atoms:
        raise CapacityError(f"minimality check over {n} atoms exceeds cap {caps.atoms}")
    L = lattice_of(gp)
    for J in L.interval(0, I):
        if J != I and tp_mask(red, J) & ~J == 0:
            return False
    return True


def flp_models(gp: GroundProgram, caps=None) -> list:
    _check_normal(gp)
    return [m for m in model_masks(gp, caps) if flp_stable_check(gp, m, caps)]


# driver

@dataclass
class SemanticsRequest:
    program: Program
    semantics: str
    family: str = "ult"
    caps: Caps = field(default_factory=Caps)
    ground: GroundProgram | None = None


@dataclass
class SemanticsResult:
    semantics: str
    family: str | None
    atoms: tuple  # the ground base
    lower: frozenset | None = None
    upper: frozenset | None = None
    models: list | None = None
    stats: dict = field(default_factory=dict)

    @property
    def exact(self) -> bool | None:
        if self.lower is None:
            return None
        return self.lower == self.upper

    def value(self, atom) -> str:
        if atom in self.lower:
            return "T"
        return "U" if atom in self.upper else "F"


def _uses_family(sem: str) -> bool:
    return sem in ("kk", "wf", "stable")


def run_semantics(req: SemanticsRequest) -> SemanticsResult:
    sem = ALIASES.get(req.semantics, req.semantics)
    if sem not in SEMANTICS:
        raise ValueError(f"unknown semantics {req.semantics!r}")
    if req.family not in FAMILIES:
        raise ValueError(f"unknown aggregate family {req.family!r}")
    gp = req.ground or instantiate(req.program)
    caps = req.caps
    fam = AggregateFamily(req.family, caps)
    family = req.family if _uses_family(sem) else None
    stats = {"phi_applications": 0, "truncation": gp.truncations, "caps_hit": False}
    res = SemanticsResult(sem, family, gp.base.atoms, stats=stats)

    def pair(lo, hi):
        res.lower, res.upper = gp.base.decode(lo), gp.base.decode(hi)

    if sem == "supported":
        res.models = _canonical(gp, supported_masks(gp, caps))
    elif sem == "flp":
        res.models = _canonical(gp, flp_models(gp, caps))
    elif sem == "least":
        m = gp.base.encode(least_model_definite(gp))
        pair(m, m)
    elif sem == "standard":
        m = standard_model_mask(gp)
        pair(m, m)
    else:
        ultimate = sem.startswith("ultimate-")
        A = ultimate_approximator(gp, caps) if ultimate else phi_approximator(gp, fam)
        kind = sem.removeprefix("ultimate-")
        if kind == "kk":
            pair(*aft.kripke_kleene(A))
        elif kind == "wf":
            pair(*aft.well_founded(A))
        else:
            cands = supported_masks(gp, caps)
            res.models = _canonical(gp, aft.exact_stable_fixpoints(A, cands))
        stats["phi_applications"] = A.applications
    fallbacks = sum(fam.stats.values())
    if fallbacks:
        stats["fallbacks"] = dict(sorted(fam.stats.items()))
    return res


def solve(program: Program, semantics: str, family="ult", caps=None, ground=None):
    return run_semantics(SemanticsRequest(program, semantics, family, caps or Caps(), ground))
