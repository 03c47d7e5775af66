import random
from fractions import Fraction as Fr

import pytest

from aggrfix import oracle
from aggrfix.aggregates import lookup
from aggrfix.generators import ProgramShape, random_definite, random_general
from aggrfix.language import parse_program
from aggrfix.semantics import least_model_definite, solve
from aggrfix.structures import GroundAtom, instantiate

from conftest import SEED, load

p0, p1 = GroundAtom("p", (Fr(0),)), GroundAtom("p", (Fr(1),))


def tups(*xs):
    return frozenset((Fr(x),) for x in xs)


def company_text(shares):
    names = sorted({x for pair in shares for x in pair}) or ["a"]
    lines = [f"sort company = {{{', '.join(names)}}}.", "sort share = rat(0..1, 1/10).",
             "pred owns_stock(company, company, share).", "defined controls(company, company)."]
    lines += [f"owns_stock({x}, {y}, {s.numerator}/{s.denominator})." for (x, y), s in shares.items()]
    lines.append("rule controls(X, Y) <- sum_gt({S, Z : (X = Z | controls(X, Z)) & "
                 "owns_stock(Z, Y, S)}, 1/2).")
    return "\n".join(lines) + "\n"


def test_budget_must_be_positive():
    with pytest.raises(ValueError):
        oracle.OracleBudget(max_atoms=0)


def test_brute_model_enumerations():
    assert set(oracle.brute_supported(load("ex_ult_sem"))) == {frozenset(), frozenset({p0})}
    party = oracle.brute_supported(load("party"))
    assert sorted(map(len, party)) == [0, 2]
    empty = parse_program("sort s = {0, 1}. defined p(s).")
    assert len(oracle.brute_models(empty)) == 4
    assert oracle.brute_minimal_models(empty) == [frozenset()]


def test_budget_exceeded():
    with pytest.raises(oracle.OracleBudgetError):
        oracle.brute_models(load("tautology"), oracle.OracleBudget(max_atoms=3))
    with pytest.raises(oracle.OracleBudgetError):
        oracle.brute_ult_aggregate(lookup("avg"), frozenset(), tups(*range(8)), Fr(1),
                                   oracle.OracleBudget(max_interval=16))


def test_brute_ult_aggregate_examples():
    assert oracle.brute_ult_aggregate(lookup("count"), tups(1, 3), tups(1, 2, 3, 5), Fr(3)) == "U"
    assert oracle.brute_ult_aggregate(lookup("count"), tups(1, 3), tups(1, 3), Fr(2)) == "T"
    assert oracle.brute_ult_aggregate(lookup("sum"), tups(1, 3), tups(1, 3), Fr(2)) == "F"


def test_brute_stable_check_examples():
    prog = load("ex_ult_sem")
    assert oracle.brute_stable_check(prog, "ult", frozenset())
    assert not oracle.brute_stable_check(prog, "ult", {p0})
    flp = load("flp")
    M = {("r", ()), ("p", ("A",)), ("p", ("B",))}
    assert not oracle.brute_stable_check(flp, "ult", M)
    assert oracle.brute_flp_models(flp) == [frozenset(M)]


def test_least_model_is_stable_for_definite_programs():
    rng = random.Random(SEED)
    for _ in range(20):
        prog = parse_program(random_definite(rng, ProgramShape(max_atoms=8)))
        lm = oracle.naive_least(prog)
        assert oracle.brute_stable_check(prog, "ult", lm)
        assert oracle.brute_stable_check(prog, "ultimate", lm)


def test_company_control_oracle():
    assert oracle.company_control_oracle({("a", "b"): Fr(6, 10)}) == {("a", "b")}
    assert oracle.company_control_oracle({}) == set()
    chain = {("a", "b"): Fr(6, 10), ("b", "c"): Fr(3, 10), ("a", "c"): Fr(3, 10),
             ("c", "a"): Fr(1, 10)}
    want = oracle.company_control_oracle(chain)
    assert want == {("a", "b"), ("a", "c")}
    gp = instantiate(parse_program(company_text(chain)))
    assert {a.args for a in least_model_definite(gp)} == want


def test_company_control_random_instances():
    rng = random.Random(SEED + 1)
    names = ["a", "b", "c", "d"]
    for _ in range(20):
        shares = {}
        for x in names:
            for y in names:
                if x != y and rng.random() < 0.4:
                    shares[x, y] = Fr(rng.randint(1, 7), 10)
        if not shares:
            continue
        gp = instantiate(parse_program(company_text(shares)))
        assert {a.args for a in least_model_definite(gp)} == oracle.company_control_oracle(shares)


def test_shortest_path_oracle():
    dist, bad = oracle.shortest_path_oracle("abc", [("a", "b", 1), ("b", "c", 2), ("a", "c", 5)])
    assert dist[("a", "c")] == 3 and not bad
    dist, bad = oracle.shortest_path_oracle("xy", [("x", "y", 4)])
    assert dist == {("x", "y"): 4}
    dist, bad = oracle.shortest_path_oracle("ab", [("a", "a", -1), ("a", "b", 0)])
    assert ("a", "b") in bad and ("a", "b") not in dist


def test_engine_matches_oracle_on_random_programs():
    rng = random.Random(SEED + 2)
    for _ in range(25):
        prog = parse_program(random_general(rng, ProgramShape(max_atoms=6)))
        gp = instantiate(prog)
        naive = oracle.NaiveProgram(prog)
        assert set(solve(prog, "supported", ground=gp).models) == set(oracle.brute_supported(naive))
        for fam in ("triv", "bnd", "ult"):
            for sem, fn in (("kk", oracle.naive_kk), ("wf", oracle.naive_wf)):
                r = solve(prog, sem, fam, ground=gp)
                assert (r.lower, r.upper) == fn(naive, fam)
            st = solve(prog, "stable", fam, ground=gp).models
            assert set(st) == set(oracle.brute_stable_models(naive, fam))
        r = solve(prog, "ultimate-wf", ground=gp)
        assert (r.lower, r.upper) == oracle.naive_wf(naive, "ultimate")


def test_negative_cycle_matches_alternating_fixpoint_oracle():
    prog = load("sp_negative_cycle")
    r = solve(prog, "wf", "ult")
    assert (r.lower, r.upper) == oracle.naive_wf(prog, "ult")
