"""Brute-force cross-checks at small bounds.

Nothing here uses spanning sets or derivable substitutions. The searches work
directly on the definitions: enumerate ground terms, count vectors, firing
modes and markings, and look for a violation.
"""

from __future__ import annotations

import itertools
import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from .equation import HomogeneousEquation, satisfies
from .errors import BoundsExhausted, UsageError
from .net import Net, NetStructure, Transition, enabled, fire, preset
from .poly import PVector, pvec_dot, pvec_substitute
from .stability import Zero, check_zero
from .terms import App, Signature, Term, match, subterms, term_key, term_product, variables

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Bounds:
    term_depth: int = 2
    tokens_per_place: int = 6
    search_depth: int = 6
    candidate_cap: int = 1_000_000

    def __post_init__(self):
        for name in ("term_depth", "tokens_per_place", "search_depth", "candidate_cap"):
            if getattr(self, name) < 0:
                raise UsageError(f"bound {name} must be nonnegative")


def enumerate_ground_terms(sig: Signature, depth: int) -> List[Term]:
    """All ground terms of depth at most ``depth``, shallower terms first."""
    layers: List[List[Term]] = [[App(c) for c in sig.constants]]
    upto: List[Term] = list(layers[0])
    for d in range(1, depth + 1):
        previous = layers[d - 1]
        layer = []
        for name, arity in sig.functions:
            for args in itertools.product(upto, repeat=arity):
                if any(a in previous for a in args):
                    layer.append(App(name, args))
        layers.append(layer)
        upto = upto + layer
    out: List[Term] = []
    for layer in layers:
        out.extend(sorted(layer, key=term_key))
    return out


class _Counter:
    def __init__(self, cap: int, what: str):
        self.cap = cap
        self.count = 0
        self.what = what

    def tick(self, n: int = 1):
        self.count += n
        if self.count > self.cap:
            raise BoundsExhausted(self.count - n, self.cap, self.what)


def brute_zeros(eq: HomogeneousEquation, sum_bound: int, cap: int = 10_000_000) -> List[Zero]:
    """Every zero whose counts sum to at most ``sum_bound``, by exhaustive search."""
    cons = eq.constrained
    counter = _Counter(cap, "count vectors")
    out: List[Zero] = []

    def rec(i: int, left: int, acc: Dict[str, int]):
        if i == len(cons):
            counter.tick()
            z = check_zero(acc, eq)
            if isinstance(z, Zero):
                out.append(z)
            return
        for n in range(left + 1):
            acc[cons[i]] = n
            rec(i + 1, left - n, acc)
        del acc[cons[i]]

    rec(0, sum_bound, {})
    out.sort(key=lambda z: (z.total, z.counts))
    return out


@dataclass(frozen=True)
class NoCounterexampleWithinBounds:
    examined: int


@dataclass(frozen=True)
class Counterexample:
    marking: PVector
    mode: Dict[str, Term]
    after: PVector


def _preimages(kappa: Term, omega: Term) -> List[Term]:
    """Ground tokens tok with kappa * tok == omega.

    For a non-ground kappa, tok sits at a variable position of omega and is
    therefore a subterm of it, so scanning subterms is exhaustive. A ground
    kappa sends every token to itself, so any token works and a constant is
    returned as representative.
    """
    if not variables(kappa):
        return [None] if kappa == omega else []
    seen = []
    for s in subterms(omega):
        if s not in seen and term_product(kappa, s) == omega:
            seen.append(s)
    return seen


def _cancel(
    eq: HomogeneousEquation, omega: Term, need: int, cap: int, filler: Term
) -> Optional[Dict[str, Tuple[Term, int]]]:
    """Extra tokens on constrained places whose weighted image is ``need * omega``.

    At most ``cap`` tokens per place; the solution with the fewest tokens wins.
    """
    group = eq.group
    slots = []
    for p in eq.constrained:
        for tok in _preimages(eq.kappa(p), omega):
            slots.append((p, filler if tok is None else tok))
            break
    best = None
    for counts in itertools.product(range(cap + 1), repeat=len(slots)):
        total = sum(n * eq.gamma(p) for (p, _), n in zip(slots, counts))
        if group.canon(total - need) == 0:
            if best is None or sum(counts) < sum(best):
                best = counts
    if best is None:
        return None
    return {p: (tok, n) for (p, tok), n in zip(slots, best) if n}


def brute_stability(
    eq: HomogeneousEquation, t: Transition, sig: Signature, b: Bounds
) -> Union[NoCounterexampleWithinBounds, Counterexample]:
    """Search for a satisfying marking and a firing mode that breaks satisfaction.

    Firing modes range over ground terms up to ``b.term_depth``. For a mode,
    the marking must contain what the transition consumes; whatever else it
    holds has to cancel the equation's value on the consumed tokens. Tokens
    whose images do not occur in that value can be removed without changing
    satisfaction or enabling, so it suffices to add, per image term, tokens
    mapped onto it, at most ``b.tokens_per_place`` per place. Within these
    bounds the search is exhaustive.
    """
    eq = eq.over(t.places)
    names = t.variables()
    pool = enumerate_ground_terms(sig, b.term_depth)
    filler = pool[0]
    counter = _Counter(b.candidate_cap, "firing modes")
    for combo in itertools.product(pool, repeat=len(names)):
        counter.tick()
        mode = dict(zip(names, combo))
        if pvec_dot(eq.vector, pvec_substitute(t.effect, mode)).is_empty:
            continue
        consumed = pvec_substitute(t.consume, mode)
        value = pvec_dot(eq.vector, consumed)
        tokens: Dict[str, Dict[Term, int]] = {}
        for p, poly in consumed.entries():
            tokens[p] = {tok: n for tok, n in poly.items()}
        feasible = True
        for omega, coeff in value.items():
            extra = _cancel(eq, omega, -coeff, b.tokens_per_place, filler)
            if extra is None:
                feasible = False
                break
            for p, (tok, n) in extra.items():
                bucket = tokens.setdefault(p, {})
                bucket[tok] = bucket.get(tok, 0) + n
        if not feasible:
            continue
        m = PVector.from_tokens(t.places, tokens)
        after = fire(m, t, mode)
        if satisfies(m, eq) and not satisfies(after, eq):
            return Counterexample(m, mode, after)
    return NoCounterexampleWithinBounds(counter.count)


def enabled_modes(
    structure: NetStructure, m: PVector, t: Transition, term_depth: int
) -> Iterator[Dict[str, Term]]:
    """Firing modes enabling ``t`` at ``m``.

    Variables occurring in consumed terms are bound by matching against the
    tokens present, so those are exact. Variables that only occur in produced
    terms range over ground terms up to ``term_depth``.
    """
    arcs = [(q, t.consume_arc(q)) for q in preset(t)]

    def bind(i: int, binding: Dict[str, Term]) -> Iterator[Dict[str, Term]]:
        if i == len(arcs):
            yield binding
            return
        q, (pattern, mult) = arcs[i]
        for tok, n in m[q].items():
            if n < mult:
                continue
            b = match(pattern, tok, binding)
            if b is not None:
                yield from bind(i + 1, b)

    pool = None
    names = t.variables()
    for binding in bind(0, {}):
        rest = [v for v in names if v not in binding]
        if not rest:
            if enabled(m, t, binding):
                yield binding
            continue
        if pool is None:
            pool = enumerate_ground_terms(structure.signature, term_depth)
        for combo in itertools.product(pool, repeat=len(rest)):
            mode = dict(binding)
            mode.update(zip(rest, combo))
            if enabled(m, t, mode):
                yield mode


@dataclass(frozen=True)
class HoldsUpToBound:
    depth: int
    states: int


@dataclass(frozen=True)
class ViolatedAt:
    run: Tuple[Tuple[str, Tuple[Tuple[str, Term], ...]], ...]
    marking: PVector


def bounded_reachability(net: Net, eq: HomogeneousEquation, b: Bounds) -> Union[HoldsUpToBound, ViolatedAt]:
    """Breadth-first search for a reachable marking that violates ``eq``.

    Runs are at most ``b.search_depth`` steps long; ``b.candidate_cap`` bounds
    the number of distinct markings visited. The first violation found is
    on a shortest run.
    """
    eq = eq.over(net.places)
    start = net.initial
    if not satisfies(start, eq):
        return ViolatedAt((), start)
    parent: Dict[PVector, Optional[Tuple[PVector, str, Tuple]]] = {start: None}
    frontier = deque([(start, 0)])
    counter = _Counter(b.candidate_cap, "markings")
    counter.tick()

    def trace(m: PVector):
        steps = []
        while parent[m] is not None:
            prev, name, mode = parent[m]
            steps.append((name, mode))
            m = prev
        return tuple(reversed(steps))

    while frontier:
        m, d = frontier.popleft()
        if d == b.search_depth:
            continue
        for t in net.transitions:
            for mode in enabled_modes(net.structure, m, t, b.term_depth):
                nxt = fire(m, t, mode)
                if nxt in parent:
                    continue
                counter.tick()
                parent[nxt] = (m, t.name, tuple(sorted(mode.items())))
                if not satisfies(nxt, eq):
                    return ViolatedAt(trace(nxt), nxt)
                frontier.append((nxt, d + 1))
    return HoldsUpToBound(b.search_depth, len(parent))
