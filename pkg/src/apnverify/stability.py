"""Decision procedure for stability of a homogeneous P-equation under a transition.

Pipeline: zeros of the equation (count vectors whose coefficient sum vanishes
and whose place terms unify), a finite spanning set of them, the substitutions
derivable from that set for a transition, and the check that the transition's
effect cancels under each of them. A failing substitution is turned into a
concrete ground firing mode and a marking that demonstrates the violation.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .equation import HomogeneousEquation, satisfies
from .errors import UsageError
from .groups import CyclicGroup
from .net import Transition, fire, preset
from .poly import Polynomial, PVector, poly_substitute, pvec_dot
from .terms import (
    App,
    FreshVars,
    Signature,
    Substitution,
    Term,
    Var,
    assign,
    canonical_renaming,
    depth,
    format_term,
    match,
    substitute,
    term_key,
    term_product,
    unify,
    variables,
)

log = logging.getLogger(__name__)

# Placeholder used when a term's variables are collapsed onto one variable.
_COLLAPSE = Var("_")


@dataclass(frozen=True)
class Zero:
    places: Tuple[str, ...]
    counts: Tuple[int, ...]
    mgu: Tuple[Tuple[str, Term], ...]
    result: Optional[Term]  # None only for the trivial zero

    def __getitem__(self, place: str) -> int:
        return self.counts[self.places.index(place)]

    @property
    def support(self) -> List[Tuple[str, int]]:
        return [(p, n) for p, n in zip(self.places, self.counts) if n]

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def is_trivial(self) -> bool:
        return not any(self.counts)

    def mgu_map(self) -> Substitution:
        return dict(self.mgu)

    def as_dict(self) -> Dict[str, int]:
        return dict(zip(self.places, self.counts))

    def collapsed(self) -> Optional[Term]:
        """The result with all its variables merged into one; only this shape
        matters when the zero is used to derive substitutions."""
        return None if self.result is None else term_product(self.result, _COLLAPSE)

    def __str__(self):
        counts = "(" + ", ".join(str(n) for n in self.counts) + ")"
        if self.result is None:
            return counts
        return f"{counts} -> {format_term(self.result)}"


@dataclass(frozen=True)
class NotAZero:
    reason: str  # "sum-nonzero" or "unification-failed"


SUM_NONZERO = "sum-nonzero"
UNIFICATION_FAILED = "unification-failed"


def trivial_zero(eq: HomogeneousEquation) -> Zero:
    return Zero(eq.places, (0,) * len(eq.places), (), None)


def _normalize_counts(nu: Union[Mapping[str, int], Sequence[int]], eq: HomogeneousEquation) -> Tuple[int, ...]:
    if isinstance(nu, Mapping):
        unknown = set(nu) - set(eq.places)
        if unknown:
            raise UsageError(f"count vector mentions unknown places: {', '.join(sorted(unknown))}")
        counts = [nu.get(p, 0) for p in eq.places]
    else:
        counts = list(nu)
        if len(counts) != len(eq.places):
            raise UsageError(f"count vector has {len(counts)} entries, equation has {len(eq.places)} places")
    if any(n < 0 for n in counts):
        raise UsageError("count vector entries must be nonnegative")
    # Places without a coefficient never influence anything; pin them to 0.
    return tuple(n if eq.kappa(p) is not None else 0 for p, n in zip(eq.places, counts))


def _unify_support(eq: HomogeneousEquation, support: Sequence[str]) -> Optional[Substitution]:
    first = eq.kappa(support[0])
    return unify((first, eq.kappa(p)) for p in support[1:])


def _make_zero(eq: HomogeneousEquation, counts: Tuple[int, ...], mgu: Substitution) -> Zero:
    support = [p for p, n in zip(eq.places, counts) if n]
    if not support:
        return trivial_zero(eq)
    result = substitute(eq.kappa(support[0]), mgu)
    return Zero(eq.places, counts, tuple(sorted(mgu.items())), result)


def check_zero(nu: Union[Mapping[str, int], Sequence[int]], eq: HomogeneousEquation) -> Union[Zero, NotAZero]:
    counts = _normalize_counts(nu, eq)
    total = sum(n * eq.gamma(p) for p, n in zip(eq.places, counts))
    if not eq.group.is_zero(total):
        return NotAZero(SUM_NONZERO)
    support = [p for p, n in zip(eq.places, counts) if n]
    if not support:
        return trivial_zero(eq)
    mgu = _unify_support(eq, support)
    if mgu is None:
        return NotAZero(UNIFICATION_FAILED)
    return _make_zero(eq, counts, mgu)


@dataclass(frozen=True)
class SpanningSet:
    equation: HomogeneousEquation
    zeros: Tuple[Zero, ...]
    bound: int
    group: CyclicGroup
    candidates: int = 0
    minimized: bool = False

    def __len__(self):
        return len(self.zeros)

    def __iter__(self):
        return iter(self.zeros)

    def __contains__(self, nu) -> bool:
        if isinstance(nu, Zero):
            nu = nu.counts
        elif isinstance(nu, Mapping):
            nu = tuple(nu.get(p, 0) for p in self.equation.places)
        return any(z.counts == tuple(nu) for z in self.zeros)


def spanning_bound(eq: HomogeneousEquation) -> int:
    """Sum bound for indecomposable zeros over the integers; the group order otherwise."""
    if eq.group.is_finite:
        return eq.group.order
    gammas = [eq.gamma(p) for p in eq.constrained]
    top = max((g for g in gammas if g > 0), default=0)
    bottom = max((-g for g in gammas if g < 0), default=0)
    return 2 * len(eq.places) * top * bottom


def _integer_counts(gammas: Sequence[int], bound: int, stats: List[int]) -> Iterator[Tuple[int, ...]]:
    """All positive vectors n with sum(n) <= bound and sum(n * gammas) == 0."""
    k = len(gammas)

    def rec(i: int, prefix: List[int], partial: int, used: int):
        rest = gammas[i:]
        slack = bound - used - len(rest)
        if slack < 0:
            return
        # Range of sum(rest * n) with every n >= 1 and at most `slack` extra units.
        base = sum(rest)
        lo = base + slack * min(0, min(rest))
        hi = base + slack * max(0, max(rest))
        if not lo <= -partial <= hi:
            return
        if i == k - 1:
            g = gammas[i]
            stats[0] += 1
            if -partial % g == 0:
                n = -partial // g
                if 1 <= n <= bound - used:
                    yield tuple(prefix) + (n,)
            return
        for n in range(1, slack + 2):
            prefix.append(n)
            yield from rec(i + 1, prefix, partial + n * gammas[i], used + n)
            prefix.pop()

    yield from rec(0, [], 0, 0)


def _finite_counts(gammas: Sequence[int], order: int, stats: List[int]) -> Iterator[Tuple[int, ...]]:
    """All vectors n in 1..order with sum(n * gammas) = 0 modulo order."""
    for prefix in itertools.product(range(1, order + 1), repeat=len(gammas) - 1):
        partial = sum(n * g for n, g in zip(prefix, gammas))
        for n in range(1, order + 1):
            stats[0] += 1
            if (partial + n * gammas[-1]) % order == 0:
                yield prefix + (n,)


def spanning_set(eq: HomogeneousEquation) -> SpanningSet:
    """Every zero within the spanning bound, including the trivial one.

    Supports (sets of places with positive count) are grown in place order and
    abandoned as soon as their terms stop unifying, since no superset can
    unify either.
    """
    group = eq.group
    bound = spanning_bound(eq)
    cons = eq.constrained
    zeros = [trivial_zero(eq)]
    stats = [0]
    gammas = {p: eq.gamma(p) for p in cons}
    if not group.is_finite and bound == 0:
        # All coefficients share a sign: only the trivial zero exists.
        return SpanningSet(eq, tuple(zeros), bound, group, 0)

    index = {p: i for i, p in enumerate(eq.places)}

    def grow(start: int, support: List[str]):
        for i in range(start, len(cons)):
            sup = support + [cons[i]]
            mgu = _unify_support(eq, sup)
            if mgu is None:
                continue
            gs = [gammas[p] for p in sup]
            if group.is_finite:
                gen = _finite_counts(gs, group.order, stats)
            elif min(gs) < 0 < max(gs):
                gen = _integer_counts(gs, bound, stats)
            else:
                gen = iter(())
            for ns in gen:
                counts = [0] * len(eq.places)
                for p, n in zip(sup, ns):
                    counts[index[p]] = n
                zeros.append(_make_zero(eq, tuple(counts), mgu))
            grow(i + 1, sup)

    grow(0, [])
    zeros.sort(key=lambda z: (z.total, z.counts))
    log.debug("spanning set of %s: %d zeros, bound %d, %d candidates", eq.name, len(zeros), bound, stats[0])
    return SpanningSet(eq, tuple(zeros), bound, group, stats[0])


def minimize_spanning(S: SpanningSet) -> SpanningSet:
    """Drop every zero that is the sum of two other nonzero members."""
    nonzero = [z for z in S.zeros if not z.is_trivial]
    if not nonzero:
        return SpanningSet(S.equation, S.zeros, S.bound, S.group, S.candidates, True)
    mat = np.array([z.counts for z in nonzero], dtype=object if _too_big(nonzero) else np.int64)
    members = {z.counts for z in nonzero}
    keep = [z for z in S.zeros if z.is_trivial]
    for i, z in enumerate(nonzero):
        below = np.all(mat <= mat[i], axis=1)
        below[i] = False
        decomposable = False
        for j in np.nonzero(below)[0]:
            rest = tuple(int(a - b) for a, b in zip(z.counts, nonzero[j].counts))
            if rest != z.counts and any(rest) and rest in members:
                decomposable = True
                break
        if not decomposable:
            keep.append(z)
    return SpanningSet(S.equation, tuple(keep), S.bound, S.group, S.candidates, True)


def _too_big(zeros: Sequence[Zero]) -> bool:
    return any(n >= 2**62 for z in zeros for n in z.counts)


@dataclass(frozen=True)
class DerivedSubstitution:
    delta: Substitution = field(hash=False)
    chosen: Dict[str, Zero] = field(hash=False)
    fresh: Dict[str, str] = field(hash=False)
    key: Tuple[Tuple[str, str], ...]
    cost: int = 0

    def restricted(self, names: Sequence[str]) -> Substitution:
        return {v: substitute(Var(v), self.delta) for v in names}


def _dedup_key(delta: Substitution, names: Sequence[str]) -> Tuple[Tuple[str, str], ...]:
    images = canonical_renaming([substitute(Var(v), delta) for v in names])
    return tuple((v, format_term(img)) for v, img in zip(names, images))


def _zero_options(S: SpanningSet, q: str) -> List[Zero]:
    """For each collapsed result shape, the smallest member with a token on q."""
    best: Dict[Term, Zero] = {}
    for z in S.zeros:
        if z[q] >= 1:
            shape = z.collapsed()
            if shape not in best:
                best[shape] = z  # zeros are sorted by size already
    return sorted(best.values(), key=lambda z: term_key(z.collapsed()))


def derive_substitutions(S: SpanningSet, t: Transition, eq: HomogeneousEquation) -> List[DerivedSubstitution]:
    """Most general unifiers of the constraints that match a zero's result
    against each consumed term, one zero per constrained pre-place. Results
    are deduplicated up to renaming of their free variables.

    Pre-places without a coefficient in the equation impose no constraint and
    are skipped. If some constrained pre-place occurs in no zero, no marking
    that satisfies the equation enables the transition and the list is empty.
    """
    eq = eq.over(t.places)
    names = t.variables()
    qs = [q for q in preset(t) if eq.kappa(q) is not None]
    options = [_zero_options(S, q) for q in qs]
    if any(not opts for opts in options):
        return []
    fresh = FreshVars()
    xs = {q: fresh() for q in qs}
    targets = {q: term_product(eq.kappa(q), t.consume_arc(q)[0]) for q in qs}
    mult = {q: t.consume_arc(q)[1] for q in qs}
    best: Dict[Tuple, DerivedSubstitution] = {}
    for choice in itertools.product(*options):
        pairs = [(term_product(z.result, xs[q]), targets[q]) for q, z in zip(qs, choice)]
        delta = unify(pairs)
        if delta is None:
            continue
        key = _dedup_key(delta, names)
        cost = sum(mult[q] * z.total for q, z in zip(qs, choice))
        prev = best.get(key)
        if prev is None or cost < prev.cost:
            best[key] = DerivedSubstitution(
                delta, dict(zip(qs, choice)), {q: x.name for q, x in xs.items()}, key, cost
            )
    return sorted(best.values(), key=lambda d: d.key)


@dataclass(frozen=True)
class Stable:
    transition: str
    derived_count: int
    spanning_size: int
    bound: int


@dataclass(frozen=True)
class Unstable:
    transition: str
    witness: DerivedSubstitution = field(hash=False)
    residual: Polynomial
    realization: Dict[str, Term] = field(hash=False)
    marking: PVector
    after: PVector
    derived_count: int
    spanning_size: int
    bound: int

    @property
    def firing_mode(self) -> Dict[str, Term]:
        return {v: self.realization[v] for v in sorted(self.realization) if not v.startswith("#")}


StabilityVerdict = Union[Stable, Unstable]


def _ground_supply(signature: Signature) -> Tuple[Term, Optional[Tuple[str, int]]]:
    constants = signature.constants
    if not constants:
        raise UsageError("signature has no constant, so no ground terms exist")
    functions = signature.functions
    return App(constants[0]), (functions[0] if functions else None)


def _tower(base: Term, fn: Tuple[str, int], height: int) -> Term:
    t = base
    for _ in range(height):
        t = App(fn[0], [t] * fn[1])
    return t


def _distinct_under(terms: Sequence[Term], sigma: Mapping[str, Term]) -> bool:
    images = {substitute(t, sigma) for t in terms}
    return len(images) == len(terms)


def realize(
    derived: DerivedSubstitution,
    net_vars: Sequence[str],
    signature: Signature,
    residual: Optional[Polynomial] = None,
) -> Optional[Dict[str, Term]]:
    """Ground assignment factoring through ``derived.delta``.

    Covers ``net_vars`` and the fresh variables of ``derived``. When a residual
    is given, the free variables are chosen so that distinct residual terms
    stay distinct: first everything is mapped to the first constant, then to
    towers of the first non-constant symbol whose heights are far enough
    apart. With constants only, all assignments are tried and the first one
    that keeps the residual nonzero wins; None means there is none.
    """
    names = list(net_vars) + sorted(derived.fresh.values())
    images = {v: substitute(Var(v), derived.delta) for v in names}
    free: List[str] = []
    for v in names:
        for w in variables(images[v]):
            if w not in free:
                free.append(w)
    base, fn = _ground_supply(signature)
    terms = residual.support() if residual is not None else []

    def finish(sigma_free: Mapping[str, Term]) -> Dict[str, Term]:
        return {v: substitute(images[v], sigma_free) for v in names}

    flat = {v: base for v in free}
    if not terms or _distinct_under(terms, flat):
        return finish(flat)
    if fn is not None:
        # Only variables of the residual need spreading out. Heights that
        # differ by more than twice the residual depth always keep distinct
        # terms apart; smaller gaps are tried first for readable output.
        spread: List[str] = []
        for t in terms:
            for w in variables(t):
                if w not in spread:
                    spread.append(w)
        safe = 2 * max(depth(t) for t in terms) + 2
        for gap in range(1, safe + 1):
            spaced = dict(flat)
            spaced.update({v: _tower(base, fn, gap * (i + 1)) for i, v in enumerate(spread)})
            if _distinct_under(terms, spaced):
                return finish(spaced)
        raise RuntimeError("could not find a distinctness-preserving realization")
    # Only constants: the ground universe is finite, try every assignment.
    constants = [App(c) for c in signature.constants]
    for combo in itertools.product(constants, repeat=len(free)):
        sigma_free = dict(zip(free, combo))
        if poly_substitute(residual, sigma_free):
            return finish(sigma_free)
    return None


def counterexample_marking(
    derived: DerivedSubstitution,
    sigma: Mapping[str, Term],
    t: Transition,
    eq: HomogeneousEquation,
) -> Tuple[PVector, PVector]:
    """A marking that satisfies ``eq`` and enables ``t`` under ``sigma``,
    together with the marking after firing.

    Each constrained pre-place q contributes as many copies of an
    implementation of its chosen zero as the arc consumes. Its tokens are the
    zero's unifier applied to each place variable, multiplied with the
    ground value of q's fresh variable; on q itself the consumed token is used.
    Unconstrained pre-places just receive what the arc consumes.
    """
    eq = eq.over(t.places)
    tokens: Dict[str, Dict[Term, int]] = {}

    def put(p: str, term: Term, n: int):
        bucket = tokens.setdefault(p, {})
        bucket[term] = bucket.get(term, 0) + n

    for q in preset(t):
        arc, mult = t.consume_arc(q)
        consumed = assign(arc, sigma)
        zero = derived.chosen.get(q)
        if zero is None:
            put(q, consumed, mult)
            continue
        g = sigma[derived.fresh[q]]
        mgu = zero.mgu_map()
        for p, n in zero.support:
            tok = consumed if p == q else term_product(substitute(Var(p), mgu), g)
            put(p, tok, mult * n)
    m = PVector.from_tokens(t.places, tokens)
    mode = {v: sigma[v] for v in t.variables()}
    after = fire(m, t, mode)
    if not satisfies(m, eq) or satisfies(after, eq):
        raise RuntimeError("internal error: constructed counterexample does not violate stability")
    return m, after


def decide_stability(
    eq: HomogeneousEquation,
    t: Transition,
    signature: Signature,
    spanning: Optional[SpanningSet] = None,
) -> StabilityVerdict:
    """Stable iff the transition's effect cancels under every derivable substitution.

    Among failing substitutions the witness is the one whose counterexample
    marking is smallest, ties broken by the substitution's canonical form.
    """
    eq = eq.over(t.places)
    S = spanning if spanning is not None else spanning_set(eq)
    derived = derive_substitutions(S, t, eq)
    base = pvec_dot(eq.vector, t.effect)
    failing = []
    for d in derived:
        residual = poly_substitute(base, d.delta)
        if residual:
            failing.append((d, residual))
    failing.sort(key=lambda item: (item[0].cost, item[0].key))
    for d, residual in failing:
        sigma = realize(d, t.variables(), signature, residual)
        if sigma is None:
            continue
        m, after = counterexample_marking(d, sigma, t, eq)
        return Unstable(t.name, d, residual, sigma, m, after, len(derived), len(S), S.bound)
    return Stable(t.name, len(derived), len(S), S.bound)


def check_implements(m: PVector, nu: Zero, eq: HomogeneousEquation) -> bool:
    """Whether ``m`` realizes the zero ``nu``.

    On every place where ``nu`` is positive, the token counts must be one
    common positive multiple of ``nu`` and every token must be sent by the
    place's term onto one shared ground term that is an instance of the
    zero's result.
    """
    support = nu.support
    if not support:
        return True
    scale = None
    omega = None
    for p, n in support:
        poly = m[p]
        count = poly.total()
        if count == 0 or count % n:
            return False
        if scale is None:
            scale = count // n
        elif count // n != scale:
            return False
        image = pvec_dot(
            PVector(eq.places, {p: eq.vector[p]}, eq.group), PVector(m.places, {p: poly})
        )
        if len(image) != 1:
            return False
        term = image.support()[0]
        if omega is None:
            omega = term
        elif term != omega:
            return False
    return match(nu.result, omega) is not None


@dataclass(frozen=True)
class NotSatisfying:
    residual: Polynomial


def decompose_marking(m: PVector, eq: HomogeneousEquation) -> Union[List[Tuple[Zero, PVector]], NotSatisfying]:
    """Split a satisfying marking into implementations of zeros, one per
    ground term that tokens are mapped to, plus a rest on places without a
    coefficient (paired with the trivial zero)."""
    if m.places != eq.places:
        raise UsageError(f"equation {eq.name} is not indexed by the marking's places")
    value = pvec_dot(eq.vector, m)
    if value:
        return NotSatisfying(value)
    groups: Dict[Term, Dict[str, Dict[Term, int]]] = {}
    rest: Dict[str, Polynomial] = {}
    for p, poly in m.entries():
        kappa = eq.kappa(p)
        if kappa is None:
            rest[p] = poly
            continue
        for tok, n in poly.items():
            omega = term_product(kappa, tok)
            bucket = groups.setdefault(omega, {}).setdefault(p, {})
            bucket[tok] = n
    parts: List[Tuple[Zero, PVector]] = []
    for omega in sorted(groups, key=term_key):
        part = PVector.from_tokens(m.places, groups[omega])
        counts = {p: part[p].total() for p in groups[omega]}
        zero = check_zero(counts, eq)
        if not isinstance(zero, Zero):
            raise RuntimeError(f"internal error: tokens mapped to {omega} do not form a zero")
        parts.append((zero, part))
    if rest or not parts:
        parts.append((trivial_zero(eq), PVector(m.places, rest)))
    return parts
