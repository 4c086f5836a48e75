"""Acceptance suite: one PASS/FAIL line per criterion, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -s`` (or -v; the lines are printed
to the terminal either way).
"""

import itertools
import random
import time

import pytest

from apnverify.cli import main
from apnverify.dsl import load_model
from apnverify.equation import HomogeneousEquation, Valid, invariant_check, satisfies, validity_by_stability
from apnverify.minsky import HALTED, encode, initial_state, machine_step, state_marking
from apnverify.net import enabled, fire
from apnverify.oracle import Bounds, Counterexample, HoldsUpToBound, bounded_reachability, brute_stability, brute_zeros, enabled_modes
from apnverify.poly import Polynomial, PVector, poly_substitute
from apnverify.stability import (
    NotAZero,
    Stable,
    Unstable,
    Zero,
    check_implements,
    check_zero,
    decide_stability,
    minimize_spanning,
    spanning_bound,
    spanning_set,
)
from apnverify.terms import Var, variables

from conftest import M1, M2, M3, M4, SIG, build_e1, build_e2, build_t, c, f, g
from corpus import SIGNATURE, corpus, random_machine, random_term

NU = {
    1: (0, 1, 0, 3, 0),
    2: (5, 0, 4, 0, 0),
    3: (0, 2, 0, 6, 0),
    4: (1, 1, 1, 2, 0),
    5: (2, 0, 0, 4, 0),
}

CORPUS_SIZE = 500
ORACLE_BOUNDS = Bounds(term_depth=3, tokens_per_place=8)


@pytest.fixture
def report(capsys):
    """Print the verdict line outside pytest's capture, then assert on it."""

    def emit(number, title, checks, elapsed, limit):
        ok = all(passed for _, passed in checks) and elapsed <= limit
        detail = "; ".join(f"{name}={'ok' if passed else 'NO'}" for name, passed in checks)
        line = f"CRITERION {number:>2} {'PASS' if ok else 'FAIL'}: {title} [{elapsed:.2f}s / {limit}s] {detail}"
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return emit


def equal_up_to_renaming(p: Polynomial, q: Polynomial) -> bool:
    pv = sorted({v for t in p for v in variables(t)})
    qv = sorted({v for t in q for v in variables(t)})
    if len(pv) != len(qv) or len(p) != len(q):
        return False
    for perm in itertools.permutations(qv):
        if poly_substitute(p, {a: Var(b) for a, b in zip(pv, perm)}) == q:
            return True
    return False


def test_zero_table(report):
    start = time.perf_counter()
    e1, e2 = build_e1(), build_e2()
    expected = {
        1: (g(Var("B")), None),
        2: (f(g(Var("C"))), None),
        3: (g(Var("B")), None),
        4: (None, c),
        5: (None, c),
    }
    checks = []
    for i, (r1, r2) in expected.items():
        for eq, want in ((e1, r1), (e2, r2)):
            got = check_zero(NU[i], eq)
            if want is None:
                passed = isinstance(got, NotAZero)
            else:
                passed = isinstance(got, Zero) and equal_up_to_renaming(Polynomial(coeffs={got.result: 1}), Polynomial(coeffs={want: 1}))
            checks.append((f"nu{i}/{eq.name}", passed))
    report(1, "zero table", checks, time.perf_counter() - start, 1)


def test_implementation_table(report):
    start = time.perf_counter()
    e1, e2 = build_e1(), build_e2()
    z1, z2, z5 = check_zero(NU[1], e1), check_zero(NU[2], e1), check_zero(NU[5], e2)
    expected = {
        "m1": (M1, (True, False, False)),
        "m2": (M2, (True, False, False)),
        "m3": (M3, (False, True, False)),
        "m4": (M4, (False, False, True)),
    }
    checks = []
    for name, (m, want) in expected.items():
        got = (check_implements(m, z1, e1), check_implements(m, z2, e1), check_implements(m, z5, e2))
        for label, a, b in zip(("nu1", "nu2", "nu5"), got, want):
            checks.append((f"{name}/{label}", a == b))
    report(2, "implementation table", checks, time.perf_counter() - start, 1)


def test_worked_example_verdicts(report):
    start = time.perf_counter()
    e1, e2, t = build_e1(), build_e2(), build_t()
    v1 = decide_stability(e1, t, SIG)
    v2 = decide_stability(e2, t, SIG)
    expected_residual = Polynomial(coeffs={f(g(Var("X_C"))): -1, g(Var("X_B")): 1})
    checks = [
        ("E1 unstable", isinstance(v1, Unstable)),
        ("E1 residual", isinstance(v1, Unstable) and equal_up_to_renaming(v1.residual, expected_residual)),
        ("E2 stable", isinstance(v2, Stable)),
        ("E2 not invariant", not invariant_check(e2, t)),
    ]
    if isinstance(v1, Unstable):
        print(f"E1 residual found: {v1.residual}")
    if isinstance(v2, Unstable):
        print(f"E2 witness: {v2.marking} --{v2.firing_mode}--> {v2.after}")
    report(3, "worked example verdicts", checks, time.perf_counter() - start, 60)


def test_bound_value(report):
    start = time.perf_counter()
    S = spanning_set(build_e1())
    M = minimize_spanning(S)
    checks = [
        ("bound 200", S.bound == 200),
        ("contains nu1", NU[1] in S),
        ("contains nu2", NU[2] in S),
        ("minimize drops nu3", NU[3] in S and NU[3] not in M),
    ]
    report(4, "spanning bound", checks, time.perf_counter() - start, 60)


def test_counterexample_integrity(report):
    start = time.perf_counter()
    e1, t = build_e1(), build_t()
    v = decide_stability(e1, t, SIG)
    checks = [("unstable", isinstance(v, Unstable))]
    if isinstance(v, Unstable):
        mode = v.firing_mode
        checks += [
            ("satisfies", satisfies(v.marking, e1)),
            ("enabled", enabled(v.marking, t, mode)),
            ("violated after firing", not satisfies(fire(v.marking, t, mode), e1)),
            ("mode shape", mode["W"] == mode["Y"] and mode["Z"] == g(mode["W"])),
        ]
    report(5, "counterexample integrity", checks, time.perf_counter() - start, 60)


def test_oracle_equivalence(report):
    start = time.perf_counter()
    disagreements = 0
    for eq, t in corpus(CORPUS_SIZE):
        v = decide_stability(eq, t, SIGNATURE)
        o = brute_stability(eq, t, SIGNATURE, ORACLE_BOUNDS)
        if isinstance(v, Unstable) != isinstance(o, Counterexample):
            disagreements += 1
    checks = [(f"{CORPUS_SIZE} instances, {disagreements} disagreements", disagreements == 0)]
    report(6, "oracle equivalence", checks, time.perf_counter() - start, 600)


def test_invariants_are_stable(report):
    start = time.perf_counter()
    violations = invariant = 0
    for eq, t in corpus(CORPUS_SIZE):
        if invariant_check(eq, t):
            invariant += 1
            if not isinstance(decide_stability(eq, t, SIGNATURE), Stable):
                violations += 1
    checks = [(f"{invariant} invariant instances, {violations} violations", violations == 0 and invariant > 0)]
    report(7, "invariants imply stability", checks, time.perf_counter() - start, 600)


def test_validity_end_to_end(report, model_path):
    start = time.perf_counter()
    model = load_model(model_path)
    _, nm = model.net()
    net = nm.net("m0")
    e2 = model.equation("E2", nm)
    S = spanning_set(e2)
    stable = {t.name: isinstance(decide_stability(e2, t, SIG, S), Stable) for t in net.transitions}
    found = bounded_reachability(net, e2, Bounds(term_depth=3, search_depth=6))
    checks = [
        ("m0 is m4", net.initial == M4),
        ("valid by stability", validity_by_stability(net, e2, stable) == Valid()),
        ("holds up to depth 6", isinstance(found, HoldsUpToBound)),
    ]
    report(8, "validity end to end", checks, time.perf_counter() - start, 60)


def test_minsky_correspondence(report, minsky_path, capsys):
    start = time.perf_counter()
    rng = random.Random(20240601)
    mismatches = steps = 0
    for _ in range(20):
        machine = random_machine(rng, rng.randint(1, 2), rng.randint(2, 5))
        net = encode(machine)
        s = initial_state(machine)
        for _ in range(15):
            m = state_marking(s, machine)
            succ = [fire(m, t, mode) for t in net.transitions for mode in enabled_modes(net.structure, m, t, 0)]
            nxt = machine_step(s, machine)
            expected = [] if nxt == HALTED else [state_marking(nxt, machine)]
            steps += 1
            if succ != expected:
                mismatches += 1
            if nxt == HALTED:
                break
            s = nxt
    halting = main(["--model", minsky_path, "validity", "--machine", "halting"])
    diverging = main(["--model", minsky_path, "validity", "--machine", "diverging"])
    capsys.readouterr()
    checks = [
        (f"{steps} steps, {mismatches} mismatches", mismatches == 0),
        ("halting fixture violated", halting == 1),
        ("diverging fixture unknown", diverging == 3),
    ]
    report(9, "counter machine correspondence", checks, time.perf_counter() - start, 120)


def _mixed_sign_equation(rng):
    while True:
        n = rng.randint(1, 3)
        places = tuple("ABC"[:n])
        gammas = [rng.choice([-3, -2, -1, 1, 2, 3]) for _ in places]
        if min(gammas) < 0 < max(gammas):
            break
    entries = {p: Polynomial.monomial(random_term(rng, 2, ["x"]), a) for p, a in zip(places, gammas)}
    return HomogeneousEquation("E", PVector(places, entries))


def _indecomposable(zeros):
    present = {z.counts for z in zeros}
    out = []
    for z in zeros:
        if z.is_trivial:
            continue
        v = z.counts
        split = any(
            u != v and any(u) and all(a <= b for a, b in zip(u, v)) and tuple(b - a for a, b in zip(u, v)) in present
            for u in present
        )
        if not split:
            out.append(z)
    return out


def test_zero_bound(report):
    # Zeros are enumerated up to twice the bound, so any indecomposable zero
    # at or above it would be seen.
    start = time.perf_counter()
    rng = random.Random(7)
    violations = examined = 0
    for _ in range(100):
        eq = _mixed_sign_equation(rng)
        bound = spanning_bound(eq)
        for z in _indecomposable(brute_zeros(eq, 2 * bound)):
            examined += 1
            if z.total >= bound:
                violations += 1
    checks = [(f"{examined} indecomposable zeros, {violations} violations", violations == 0 and examined > 0)]
    report(10, "zero bound", checks, time.perf_counter() - start, 300)
