import itertools
import random
from fractions import Fraction as Fr

import pytest
from hypothesis import given
from hypothesis import strategies as st

from aggrfix import aggregates as A
from aggrfix.errors import CapacityError
from aggrfix.oracle import brute_ult_aggregate, naive_relation
from aggrfix.truth import ThreeValuedSet, TruthValue3

from conftest import SEED

T, U, F = TruthValue3.T, TruthValue3.U, TruthValue3.F


def tups(*xs):
    return frozenset((Fr(x),) for x in xs)


def kind(name, lo=-4, hi=4):
    return A.lookup(name).with_bounds(Fr(lo), Fr(hi))


NAMES = [b + s for b in A.FUNCTION_BASES
         for s in ("", "_eq", "_neq", "_leq", "_geq", "_lt", "_gt")] + ["lb", "ub"]
NAMES += [n + "_sub" for n in NAMES]


# two-valued relations

def test_eval2_examples():
    assert A.eval_aggregate2(kind("count"), tups(1, 3), Fr(2))
    multiset = {(Fr(1), "u1"), (Fr(1), "u2")}
    assert A.eval_aggregate2(kind("sum"), multiset, Fr(2))
    for d in range(-3, 4):
        assert not A.eval_aggregate2(kind("avg"), frozenset(), Fr(d))
        assert not A.eval_aggregate2(kind("min"), frozenset(), Fr(d))


def test_glb_and_lub_of_empty_set_are_sort_extrema():
    assert A.eval_aggregate2(kind("glb"), frozenset(), Fr(4))
    assert A.eval_aggregate2(kind("lub"), frozenset(), Fr(-4))
    assert A.eval_aggregate2(kind("glb"), tups(2, 3), Fr(2))


def test_lb_and_ub():
    assert A.eval_aggregate2(kind("lb"), tups(2, 3), Fr(1))
    assert not A.eval_aggregate2(kind("ub"), tups(2, 3), Fr(2))
    assert A.eval_aggregate2(kind("ub"), frozenset(), Fr(0))


def test_symbolic_value_never_equals_a_number():
    assert not A.eval_aggregate2(kind("count"), tups(1), "a")
    assert A.eval_aggregate2(kind("count_neq"), tups(1), "a")


def test_unknown_names():
    assert A.lookup("median") is None
    assert A.lookup("count_approx") is None
    assert A.lookup("lb_geq") is None


# subset closure

def test_subset_closure_examples():
    abc = frozenset({("a",), ("b",), ("c",)})
    for d in range(0, 5):
        assert A.subset_closure_eval(kind("count"), abc, Fr(d)) == \
            A.eval_aggregate2(kind("count_geq"), abc, Fr(d))
    assert not A.subset_closure_eval(kind("sum"), tups(1, 3), Fr(2))
    assert A.subset_closure_eval(kind("sum"), tups(1, 3), Fr(4))


def test_closure_of_monotone_kind_is_itself():
    pool = [Fr(x) for x in (0, 1, 2, 3)]
    for name in ("count_geq", "sum_geq", "max_geq", "min_leq", "count_gt"):
        k = kind(name)
        for n in range(5):
            for S in itertools.combinations(pool, n):
                S = frozenset((x,) for x in S)
                for d in range(-1, 6):
                    assert A.subset_closure_eval(k, S, Fr(d)) == A.eval_aggregate2(k, S, Fr(d))


def test_subset_closure_matches_naive_enumeration():
    rng = random.Random(SEED)
    for _ in range(300):
        name = rng.choice([n for n in NAMES if not n.endswith("_sub")])
        S = tups(*rng.sample(range(-3, 5), rng.randint(0, 5)))
        d = Fr(rng.randint(-4, 6))
        k = kind(name + "_sub")
        want = naive_relation(k.base, k.cmp, True, S, d, k.bottom, k.top)
        assert A.eval_aggregate2(k, S, d) == want, (name, S, d)


# monotonicity

def test_monotonicity_examples():
    assert A.monotonicity(kind("count_geq")).direction == A.MONOTONE
    assert A.monotonicity(kind("lb")).direction == A.ANTI
    assert A.monotonicity(kind("min")).direction == A.NEITHER
    assert A.monotonicity(kind("sum_gt"), (Fr(0), Fr(1))).direction == A.MONOTONE
    assert A.monotonicity(kind("sum_gt"), (Fr(-1), Fr(1))).direction == A.NEITHER
    assert A.monotonicity(kind("prod_geq"), (Fr(1), Fr(3))).direction == A.MONOTONE
    assert A.monotonicity(kind("count_eq_sub")).direction == A.MONOTONE


@pytest.mark.parametrize("pool", [(0, 1, 2, 3), (1, 2, 3), (-3, -1, 0), (0, Fr(1, 2), Fr(1, 3))],
                         ids=["nonneg", "atleast1", "nonpos", "unit"])
def test_monotonicity_tags_hold_exhaustively(pool):
    pool = [Fr(x) for x in pool]
    rng_ = (min(pool), max(pool))
    sets = [frozenset((x,) for x in c) for n in range(len(pool) + 1)
            for c in itertools.combinations(pool, n)]
    ds = sorted({Fr(x) for x in range(-4, 5)} | set(pool))
    for name in NAMES:
        k = kind(name, min(pool), max(pool))
        tag = A.monotonicity(k, rng_)
        if tag.direction == A.NEITHER:
            continue
        for S1, S2 in itertools.product(sets, repeat=2):
            if not S1 <= S2:
                continue
            for d in ds:
                a, b = A.eval_aggregate2(k, S1, d), A.eval_aggregate2(k, S2, d)
                if tag.direction == A.MONOTONE:
                    assert a <= b, (name, S1, S2, d)
                else:
                    assert b <= a, (name, S1, S2, d)


# three-valued families

def test_triv_examples():
    c = kind("count")
    assert A.triv_eval(c, (frozenset(), tups(0)), Fr(1)) == U
    assert A.triv_eval(c, (tups(0), tups(0)), Fr(1)) == T
    for d in range(-2, 4):
        assert A.triv_eval(kind("sum_geq"), (tups(1), tups(1, 2)), Fr(d)) == U


S_EX = ThreeValuedSet(tups(1, 3), tups(1, 2, 3, 5))


def test_ult_count_table():
    for d in range(-1, 8):
        want = U if d in (2, 3, 4) else F
        assert A.ult_eval(kind("count"), S_EX, Fr(d)) == want


def test_ult_count_geq_table():
    for d in range(-1, 8):
        want = T if d <= 2 else U if d in (3, 4) else F
        assert A.ult_eval(kind("count_geq"), S_EX, Fr(d)) == want


def test_ult_and_bnd_disagree_on_unreachable_sum():
    s = (frozenset(), tups(1, 3))
    ult = A.AggregateFamily("ult").components(kind("sum"), *s, Fr(2))
    bnd = A.AggregateFamily("bnd").components(kind("sum"), *s, Fr(2))
    assert ult == (False, False)
    assert bnd == (False, True)


def test_lminmax_examples():
    assert A.lminmax("count", tups(1), tups(1, 2)) == (tups(1), tups(1, 2))
    assert A.lminmax("sum", frozenset(), tups(0))[0] == frozenset()
    lo, hi = A.lminmax("sum", tups(2), tups(2, -3, 5))
    assert lo == tups(2, -3) and hi == tups(2, 5)


def test_lminmax_witnesses_are_extremal():
    rng = random.Random(SEED)
    for _ in range(200):
        base = rng.choice(["count", "sum", "prod"])
        vals = [Fr(rng.randint(-3, 4), rng.choice([1, 2])) for _ in range(rng.randint(0, 6))]
        S2 = frozenset((v, i) for i, v in enumerate(vals))
        S1 = frozenset(t for t in S2 if rng.random() < 0.4)
        k = A.AggregateKind(base, base)
        f = lambda S: A.aggregate_function(k, S)
        lo, hi = A.lminmax(base, S1, S2)
        assert S1 <= lo <= S2 and S1 <= hi <= S2
        members = [S1 | frozenset(c) for n in range(len(S2 - S1) + 1)
                   for c in itertools.combinations(S2 - S1, n)]
        assert f(lo) == min(map(f, members)) and f(hi) == max(map(f, members))


def test_bnd_is_exact_on_exact_sets():
    for name in ("sum", "count_geq", "prod_leq", "sum_neq"):
        for d in range(-2, 6):
            want = A.eval_aggregate2(kind(name), tups(1, 3), Fr(d))
            assert A.bnd_eval(kind(name), (tups(1, 3), tups(1, 3)), Fr(d)) == TruthValue3.exact(want)


three_valued = st.builds(
    lambda pool, picks, extra: (frozenset(t for t, p in zip(pool, picks) if p), frozenset(pool),
                                extra),
    st.lists(st.tuples(st.fractions(min_value=-4, max_value=4, max_denominator=2)),
             unique=True, max_size=7),
    st.lists(st.booleans(), min_size=7, max_size=7),
    st.fractions(min_value=-5, max_value=8, max_denominator=2),
)


@given(st.sampled_from(NAMES), three_valued)
def test_ult_matches_interval_enumeration(name, case):
    S1, S2, d = case
    k = kind(name)
    assert A.ult_eval(k, (S1, S2), d).name == brute_ult_aggregate(k, S1, S2, d)


@given(st.sampled_from(NAMES), three_valued)
def test_family_chain_and_first_components(name, case):
    S1, S2, d = case
    k = kind(name)
    t, b, u = (A.AggregateFamily(f).evaluate(k, (S1, S2), d) for f in ("triv", "bnd", "ult"))
    assert t.leq_p(b) and b.leq_p(u)
    assert b.first == u.first


@given(st.sampled_from(NAMES), three_valued, st.data())
def test_families_are_precision_monotone(name, case, data):
    S1, S2, d = case
    k = kind(name)
    # shrink the interval from both ends
    extra = sorted(S2 - S1)
    add = frozenset(data.draw(st.sets(st.sampled_from(extra))) if extra else ())
    drop = frozenset(data.draw(st.sets(st.sampled_from(sorted(S2 - S1 - add)))) if S2 - S1 - add else ())
    T1, T2 = S1 | add, S2 - drop
    for fam in ("triv", "bnd", "ult"):
        f = A.AggregateFamily(fam)
        assert f.evaluate(k, (S1, S2), d).leq_p(f.evaluate(k, (T1, T2), d))
        assert f.evaluate(k, (T1, T1), d) == TruthValue3.exact(A.eval_aggregate2(k, T1, d))


def test_monotone_kinds_use_boundaries():
    rng = random.Random(SEED + 1)
    for _ in range(300):
        name = rng.choice(["count_geq", "count_gt", "count_leq", "lb", "ub", "count_eq_sub"])
        S2 = tups(*rng.sample(range(0, 6), rng.randint(0, 5)))
        S1 = frozenset(t for t in S2 if rng.random() < 0.5)
        d = Fr(rng.randint(-1, 6))
        k = kind(name)
        tag = A.monotonicity(k).direction
        got = A.ult_eval(k, (S1, S2), d)
        lo, hi = (S1, S2) if tag == A.MONOTONE else (S2, S1)
        assert got.first == A.eval_aggregate2(k, lo, d)
        assert got.second == A.eval_aggregate2(k, hi, d)


# subset searches

@given(st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=3), max_size=8),
       st.fractions(min_value=-10, max_value=10, max_denominator=3))
def test_subset_sum_matches_enumeration(values, target):
    want = any(sum(c, Fr(0)) == target for n in range(len(values) + 1)
               for c in itertools.combinations(values, n))
    assert A.exists_subset_sum(values, target) == want


def test_subset_sum_with_huge_denominators_uses_set_search():
    vals = [Fr(1, 1000003), Fr(1, 1000033), Fr(2, 1000003)]
    assert A.exists_subset_sum(vals, Fr(3, 1000003))
    assert not A.exists_subset_sum(vals, Fr(4, 1000003))
    with pytest.raises(CapacityError):
        A.exists_subset_sum([Fr(1, 10 ** 7 + i) for i in range(12)], Fr(1, 3), A.Caps(subsets=64))


def test_interval_cap_for_enumerated_kinds():
    S2 = tups(*range(12))
    with pytest.raises(CapacityError):
        A.ult_eval(kind("avg"), (frozenset(), S2), Fr(2), A.Caps(interval=64))


def test_prod_with_negative_values_falls_back_and_is_counted():
    fam = A.AggregateFamily("ult")
    v = fam.evaluate(kind("prod_geq"), (tups(-1), tups(-1, -2, 3)), Fr(2))
    assert v.name == brute_ult_aggregate(kind("prod_geq"), tups(-1), tups(-1, -2, 3), Fr(2))
    assert sum(fam.stats.values()) >= 1


# registry

def test_custom_aggregate_registration():
    rel = lambda S, d: len(S) % 2 == d
    k = A.register_aggregate("parity", rel)
    try:
        assert A.lookup("parity") is k
        assert A.ult_eval(k, (frozenset(), tups(1)), Fr(0)) == U
        assert A.ult_eval(k, (tups(1), tups(1)), Fr(1)) == T
        with pytest.raises(ValueError):
            A.register_aggregate("parity", rel)
        with pytest.raises(ValueError):
            A.register_aggregate("count_geq", rel)
    finally:
        A.unregister_aggregate("parity")
    assert A.lookup("parity") is None


def test_custom_closed_form_is_used():
    calls = []

    def ult(S1, S2, d):
        calls.append(d)
        return False, True

    A.register_aggregate("always_maybe", lambda S, d: True, ult=ult)
    try:
        assert A.ult_eval(A.lookup("always_maybe"), (frozenset(), tups(1)), Fr(0)) == U
        assert calls == [Fr(0)]
    finally:
        A.unregister_aggregate("always_maybe")
