import itertools
import random

import pytest

from aggrfix import lattice as aft
from aggrfix import parse_program
from aggrfix.errors import CapacityError, DomainError, MonotonicityError
from aggrfix.generators import ProgramShape, random_general
from aggrfix.semantics import phi_approximator, tp_mask, ultimate_approximator
from aggrfix.structures import instantiate

from conftest import SEED, loaded

P2 = aft.PowersetLattice(2)


def ground_text(text):
    return instantiate(parse_program(text))


def mask(gp, *names):
    return gp.base.encode(a for a in gp.base.atoms if str(a) in names)


def all_pairs(L):
    return [(x, y) for x in range(L.top + 1) for y in range(L.top + 1) if L.leq(x, y)]


# lattices

def test_powerset_interval_enumerates_exactly_the_interval():
    L = aft.PowersetLattice(4)
    got = sorted(L.interval(0b0001, 0b1011))
    want = sorted(z for z in range(16) if L.leq(1, z) and L.leq(z, 0b1011))
    assert got == want
    assert L.interval_size(0b0001, 0b1011) == 4


def test_powerset_bounds_and_order():
    L = aft.PowersetLattice(3)
    for x, y, z in itertools.product(range(8), repeat=3):
        assert L.leq(x, x)
        if L.leq(x, y) and L.leq(y, z):
            assert L.leq(x, z)
        g, u = L.glb((x, y)), L.lub((x, y))
        assert L.leq(g, x) and L.leq(g, y) and L.leq(x, u) and L.leq(y, u)
        assert L.leq(L.bot, x) and L.leq(x, L.top)


def test_explicit_lattice_diamond():
    order = {("b", "l"), ("b", "r"), ("b", "t"), ("l", "t"), ("r", "t")}
    L = aft.ExplicitLattice("blrt", lambda x, y: x == y or (x, y) in order)
    assert (L.bot, L.top) == ("b", "t")
    assert L.lub(("l", "r")) == "t" and L.glb(("l", "r")) == "b"
    assert aft.lfp_monotone(L, lambda x: "l" if x == "b" else x) == "l"
    A = aft.ultimate_of(L, lambda x: "r")
    assert A("b", "t") == ("r", "r")


def test_consistency_and_precision_order():
    assert aft.is_consistent(P2, (1, 3)) and not aft.is_consistent(P2, (2, 1))
    assert aft.leq_p(P2, (0, 3), (1, 1))
    assert not aft.leq_p(P2, (1, 1), (0, 3))
    assert aft.ConsistentPair(2, 2).exact


# lfp

def test_lfp_identity_from_bottom():
    assert aft.lfp_monotone(P2, lambda x: x) == 0


def test_lfp_constant_union():
    assert aft.lfp_monotone(P2, lambda x: x | 0b01) == 0b01


def test_lfp_of_definite_tp_is_least_of_all_fixpoints():
    gp = ground_text("defined q. defined r. rule q <- true. rule r <- q.")
    L = aft.PowersetLattice(len(gp.base))
    lfp = aft.lfp_monotone(L, lambda I: tp_mask(gp, I))
    fixpoints = [I for I in range(4) if tp_mask(gp, I) == I]
    assert lfp == mask(gp, "q", "r")
    assert all(L.leq(lfp, f) for f in fixpoints)


def test_lfp_detects_non_monotone_iterates():
    L = aft.PowersetLattice(1)
    with pytest.raises(MonotonicityError):
        aft.lfp_monotone(L, lambda x: x ^ 1, start=1)


# Kripke-Kleene

def test_kk_of_constant_bottom_operator():
    A = aft.Approximator(P2, lambda x, y: (0, 0), base_op=lambda x: 0)
    assert aft.kripke_kleene(A) == (0, 0)


def test_kk_ultimate_on_count_example():
    _, gp = loaded("ex_ult_sem")
    A = ultimate_approximator(gp)
    assert aft.kripke_kleene(A) == (0, mask(gp, "p(0)"))


def test_kk_below_every_fixpoint_on_random_small_programs():
    rng = random.Random(SEED)
    for _ in range(25):
        gp = ground_text(random_general(rng, ProgramShape(max_atoms=3)))
        A = phi_approximator(gp, "triv")
        L = A.lattice
        kk = aft.kripke_kleene(A)
        for x in L.elements():
            if tp_mask(gp, x) == x:
                assert aft.leq_p(L, kk, (x, x))


# stable operators

def test_lower_stable_of_self_support_is_empty():
    gp = ground_text("defined p. rule p <- p.")
    A = phi_approximator(gp, "ult")
    assert aft.lower_stable(A, 1) == 0
    assert aft.lower_stable(A, 1, method="enumerate") == 0


def test_upper_stable_ultimate_from_empty():
    _, gp = loaded("ex_ult_sem")
    assert aft.upper_stable(ultimate_approximator(gp), 0) == 0


def test_lower_stable_is_top_without_prefixpoints_below_b():
    L = aft.PowersetLattice(1)
    A = aft.Approximator(L, lambda x, y: (1, 1), base_op=lambda x: 1)
    # on the two-element lattice the only candidate is 0, and A1(0, 0) = 1 is not <= 0
    assert aft.lower_stable(A, 0, method="enumerate") == 1
    assert aft.lower_stable(A, 0) == 1


def test_lower_stable_enumeration_cap():
    L = aft.PowersetLattice(6)
    A = aft.Approximator(L, lambda x, y: (x, y), base_op=lambda x: x)
    with pytest.raises(CapacityError):
        aft.lower_stable(A, L.top, method="enumerate", cap=8)


def test_stable_revision_example():
    _, gp = loaded("ex_ult_sem")
    A = ultimate_approximator(gp)
    assert aft.stable_revision(A, (0, mask(gp, "p(0)", "p(1)"))) == (0, 0)


def test_stable_revision_fixes_exact_stable_fixpoint():
    _, gp = loaded("party")
    A = phi_approximator(gp, "ult")
    assert aft.stable_revision(A, (0, 0)) == (0, 0)


def test_reliability_of_bottom_top_and_a_bad_pair():
    gp = ground_text("defined p. rule p <- not p.")
    A = phi_approximator(gp, "ult")
    L = A.lattice
    assert aft.is_reliable(A, (L.bot, L.top)) and aft.is_prudent(A, (L.bot, L.top))
    assert A(1, 1) == (0, 0)
    assert not aft.is_reliable(A, (1, 1))
    with pytest.raises(DomainError):
        aft.stable_revision(A, (1, 1))


def test_stable_revision_increases_precision_on_random_programs():
    rng = random.Random(SEED + 1)
    for _ in range(20):
        gp = ground_text(random_general(rng, ProgramShape(max_atoms=4)))
        A = phi_approximator(gp, "ult")
        L = A.lattice
        p = (L.bot, L.top)
        for _ in range(6):
            q = aft.stable_revision(A, p)
            assert aft.leq_p(L, p, q)
            if q == p:
                break
            p = q


# well-founded and stable

def test_wf_ultimate_count_example_is_exact_empty():
    _, gp = loaded("ex_ult_sem")
    assert aft.well_founded(ultimate_approximator(gp)) == (0, 0)


def test_wf_ult_tautology_leaves_everything_undefined():
    _, gp = loaded("tautology")
    A = phi_approximator(gp, "ult")
    assert aft.well_founded(A) == (0, A.lattice.top)


@pytest.mark.parametrize("family", ["triv", "bnd", "ult"])
def test_wf_of_definite_program_is_least_model(family):
    gp = ground_text("defined q. defined r. rule q <- true. rule r <- q.")
    qr = mask(gp, "q", "r")
    assert aft.well_founded(phi_approximator(gp, family)) == (qr, qr)
    assert aft.well_founded(ultimate_approximator(gp)) == (qr, qr)


def test_alternating_schedule_matches_revision_iteration():
    rng = random.Random(SEED + 2)
    for _ in range(40):
        gp = ground_text(random_general(rng, ProgramShape(max_atoms=5)))
        for A in (phi_approximator(gp, "ult"), phi_approximator(gp, "triv"),
                  ultimate_approximator(gp)):
            assert aft.well_founded(A) == aft.well_founded_by_revision(A)


def test_exact_stable_fixpoints_examples():
    _, gp = loaded("ex_ult_sem")
    cands = [0, mask(gp, "p(0)")]
    assert aft.exact_stable_fixpoints(ultimate_approximator(gp), cands) == [0]
    _, gp = loaded("tautology")
    A = phi_approximator(gp, "ult")
    assert aft.exact_stable_fixpoints(A, [A.lattice.top]) == []


def test_stable_fixpoints_are_minimal_models_and_above_wf():
    rng = random.Random(SEED + 3)
    for _ in range(30):
        gp = ground_text(random_general(rng, ProgramShape(max_atoms=5)))
        A = phi_approximator(gp, "ult")
        L = A.lattice
        supported = [x for x in L.elements() if tp_mask(gp, x) == x]
        models = [x for x in L.elements() if L.leq(tp_mask(gp, x), x)]
        wf = aft.well_founded(A)
        for s in aft.exact_stable_fixpoints(A, supported):
            assert not any(m != s and L.leq(m, s) for m in models)
            assert aft.leq_p(L, wf, (s, s))


# ultimate approximation

def test_ultimate_of_monotone_operator_uses_endpoints():
    L = aft.PowersetLattice(3)
    op = lambda x: x | ((x & 1) << 1) | 0b100
    A = aft.ultimate_of(L, op)
    for x, y in all_pairs(L):
        assert A(x, y) == (op(x), op(y))
    wf = aft.well_founded(A)
    assert wf.exact and wf.lower == aft.lfp_monotone(L, op)


def test_ultimate_of_constant_is_exact():
    A = aft.ultimate_of(P2, lambda x: 0b10)
    assert all(A(x, y) == (2, 2) for x, y in all_pairs(P2))


def test_ultimate_operator_count_example_components():
    _, gp = loaded("ex_ult_sem")
    A = ultimate_approximator(gp)
    assert A(0, mask(gp, "p(0)", "p(1)")) == (0, mask(gp, "p(0)"))


def test_ultimate_of_cap():
    A = aft.ultimate_of(aft.PowersetLattice(5), lambda x: x, cap=16)
    with pytest.raises(CapacityError):
        A(0, 31)


def test_application_counter_and_reset():
    A = aft.Approximator(P2, lambda x, y: (x, y))
    A(0, 1)
    A(1, 1)
    assert A.applications == 2
    A.reset()
    assert A.applications == 0


# approximator properties and precision comparison

def test_approximators_extend_tp_and_are_precision_monotone():
    rng = random.Random(SEED + 4)
    for _ in range(15):
        gp = ground_text(random_general(rng, ProgramShape(max_atoms=4)))
        L = aft.PowersetLattice(len(gp.base))
        pairs = all_pairs(L)
        for A in (phi_approximator(gp, "triv"), phi_approximator(gp, "bnd"),
                  phi_approximator(gp, "ult"), ultimate_approximator(gp)):
            for x in L.elements():
                assert A(x, x) == (tp_mask(gp, x),) * 2
            vals = {p: A(*p) for p in pairs}
            for p, q in itertools.product(pairs, repeat=2):
                if aft.leq_p(L, p, q):
                    assert aft.leq_p(L, vals[p], vals[q])
            for p in pairs:
                assert L.leq(*vals[p])


def test_compare_precision_triv_vs_ult():
    rng = random.Random(SEED + 5)
    for _ in range(15):
        gp = ground_text(random_general(rng, ProgramShape(max_atoms=4)))
        L = aft.PowersetLattice(len(gp.base))
        cands = [x for x in L.elements() if tp_mask(gp, x) == x]
        rep = aft.compare_precision(phi_approximator(gp, "triv"), phi_approximator(gp, "ult"),
                                    all_pairs(L), cands)
        assert rep.operator_leq and rep.kk_leq and rep.wf_leq and rep.stable_subset
        same = phi_approximator(gp, "ult")
        rep = aft.compare_precision(same, same, all_pairs(L), cands)
        assert rep.operator_leq and rep.details["kk"][0] == rep.details["kk"][1]
