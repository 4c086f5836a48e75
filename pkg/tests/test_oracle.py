import pytest

from apnverify.equation import HomogeneousEquation, satisfies
from apnverify.errors import BoundsExhausted, UsageError
from apnverify.net import Net, NetStructure, Transition, enabled, fire
from apnverify.oracle import (
    Bounds,
    Counterexample,
    HoldsUpToBound,
    NoCounterexampleWithinBounds,
    ViolatedAt,
    brute_stability,
    brute_zeros,
    bounded_reachability,
    enabled_modes,
    enumerate_ground_terms,
)
from apnverify.poly import PVector
from apnverify.stability import check_zero
from apnverify.terms import Signature, Var, depth, is_ground

from conftest import M1, M4, M5, PLACES, SIG, c, f, g, marking, vec


def test_ground_term_counts():
    assert [len(enumerate_ground_terms(SIG, d)) for d in range(4)] == [1, 3, 7, 15]
    two = Signature((("h", 2), ("a", 0), ("b", 0)))
    assert len(enumerate_ground_terms(two, 1)) == 2 + 4


def test_ground_terms_are_ordered_by_depth():
    terms = enumerate_ground_terms(SIG, 3)
    assert all(is_ground(x) for x in terms)
    assert len(set(terms)) == len(terms)
    depths = [depth(x) for x in terms]
    assert depths == sorted(depths)


def test_bounds_reject_negative():
    with pytest.raises(UsageError):
        Bounds(term_depth=-1)


def test_brute_zeros_e1(e1):
    zs = brute_zeros(e1, 9)
    counts = [z.counts for z in zs]
    assert counts[0] == (0, 0, 0, 0, 0)
    assert (0, 1, 0, 3, 0) in counts and (5, 0, 4, 0, 0) in counts
    assert (1, 1, 1, 2, 0) not in counts
    assert all(check_zero(z.counts, e1) == z for z in zs)


def test_brute_zeros_e2(e2):
    counts = [z.counts for z in brute_zeros(e2, 7)]
    assert (1, 0, 0, 2, 0) in counts and (2, 0, 0, 4, 0) in counts
    assert (0, 0, 0, 7, 0) in counts


def test_brute_zeros_cap(e1):
    with pytest.raises(BoundsExhausted):
        brute_zeros(e1, 20, cap=50)


@pytest.mark.parametrize("which", ["e1", "e2"])
def test_brute_stability_finds_counterexamples(which, request, t):
    eq = request.getfixturevalue(which)
    r = brute_stability(eq, t, SIG, Bounds(term_depth=2, tokens_per_place=6))
    assert isinstance(r, Counterexample)
    assert satisfies(r.marking, eq)
    assert enabled(r.marking, t, r.mode)
    assert r.after == fire(r.marking, t, r.mode)
    assert not satisfies(r.after, eq)


def _invariant_instance():
    X = Var("X")
    places = ("A", "B")
    eq = HomogeneousEquation("E", vec({"A": (Var("x"), 1), "B": (Var("x"), -1)}, places=places))
    tr = Transition("u", vec({"A": (X, 1), "B": (X, 1)}, places=places), vec({"A": (f(X), 1), "B": (f(X), 1)}, places=places))
    return eq, tr


def test_brute_stability_on_invariant():
    eq, tr = _invariant_instance()
    assert brute_stability(eq, tr, SIG, Bounds(term_depth=2)) == NoCounterexampleWithinBounds(7)


def test_brute_stability_cap():
    eq, tr = _invariant_instance()
    with pytest.raises(BoundsExhausted):
        brute_stability(eq, tr, SIG, Bounds(term_depth=3, candidate_cap=10))


def test_enabled_modes_match_tokens(t):
    modes = list(enabled_modes(NetStructure(SIG, PLACES, (t,)), M5, t, 2))
    assert {"W": c, "Y": c, "Z": g(c)} in modes
    for mode in modes:
        assert enabled(M5, t, mode)
    assert list(enabled_modes(NetStructure(SIG, PLACES, (t,)), M1, t, 2)) == []


def test_enabled_modes_produce_only_variables():
    X, Y = Var("X"), Var("Y")
    places = ("A", "B")
    tr = Transition("u", vec({"A": (X, 1)}, places=places), vec({"B": (Y, 1)}, places=places))
    m = marking(places, A={c: 1})
    modes = list(enabled_modes(NetStructure(SIG, places, (tr,)), m, tr, 1))
    assert sorted(str(mode["Y"]) for mode in modes) == ["c", "f(c)", "g(c)"]


def test_reachability_from_m4(e1, e2, t):
    net = Net(NetStructure(SIG, PLACES, (t,)), M4)
    assert bounded_reachability(net, e2, Bounds(search_depth=5)) == HoldsUpToBound(5, 1)
    assert bounded_reachability(net, e1, Bounds()) == ViolatedAt((), M4)


def test_reachability_finds_shortest_violation(e1, t):
    net = Net(NetStructure(SIG, PLACES, (t,)), M5)
    r = bounded_reachability(net, e1, Bounds(search_depth=3))
    assert isinstance(r, ViolatedAt)
    assert len(r.run) == 1 and r.run[0][0] == "t"
    assert not satisfies(r.marking, e1)


def test_reachability_cap():
    X = Var("X")
    places = ("A",)
    grow = Transition("grow", vec({"A": (X, 1)}, places=places), vec({"A": (f(X), 1)}, places=places))
    eq = HomogeneousEquation("E", PVector.empty(places))
    net = Net(NetStructure(SIG, places, (grow,)), marking(places, A={c: 1}))
    assert bounded_reachability(net, eq, Bounds(search_depth=4)) == HoldsUpToBound(4, 5)
    with pytest.raises(BoundsExhausted):
        bounded_reachability(net, eq, Bounds(search_depth=10, candidate_cap=3))
