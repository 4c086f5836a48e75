"""Algebraic Petri net structures, markings, enabling and firing."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .errors import UsageError
from .groups import INTEGERS
from .poly import PVector, pvec_add, pvec_scalar, pvec_substitute
from .terms import Signature, Term, UnboundVariable, format_substitution, is_ground

Assignment = Mapping[str, Term]


class NotEnabled(UsageError):
    def __init__(self, transition: str, place: str, term: Term, index: Optional[int] = None):
        where = "" if index is None else f"step {index}: "
        super().__init__(f"{where}transition {transition} not enabled: place {place} lacks {term}")
        self.transition = transition
        self.place = place
        self.term = term
        self.index = index


@dataclass(frozen=True)
class Transition:
    name: str
    consume: PVector
    produce: PVector
    effect: PVector = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        for side, vec in (("consume", self.consume), ("produce", self.produce)):
            if vec.group != INTEGERS:
                raise UsageError(f"transition {self.name}: {side} arcs must have integer multiplicities")
            if not vec.is_simple:
                raise UsageError(f"transition {self.name}: {side} arc of a place must be a single term")
            if not vec.is_semi_positive:
                raise UsageError(f"transition {self.name}: {side} multiplicities must be positive")
        if self.consume.places != self.produce.places:
            raise UsageError(f"transition {self.name}: consume and produce sides use different places")
        object.__setattr__(self, "effect", pvec_add(pvec_scalar(-1, self.consume), self.produce))

    @property
    def places(self) -> Tuple[str, ...]:
        return self.consume.places

    def variables(self) -> List[str]:
        """Variables of both sides, sorted by name."""
        return sorted(set(self.consume.variables()) | set(self.produce.variables()))

    def consume_arc(self, place: str) -> Optional[Tuple[Term, int]]:
        poly = self.consume[place]
        return poly.single() if poly else None

    def produce_arc(self, place: str) -> Optional[Tuple[Term, int]]:
        poly = self.produce[place]
        return poly.single() if poly else None


@dataclass(frozen=True)
class NetStructure:
    signature: Signature
    places: Tuple[str, ...]
    transitions: Tuple[Transition, ...]

    def __post_init__(self):
        if not self.places:
            raise UsageError("a net needs at least one place")
        names = [t.name for t in self.transitions]
        if len(set(names)) != len(names):
            raise UsageError("duplicate transition name")
        for t in self.transitions:
            if t.places != self.places:
                raise UsageError(f"transition {t.name} is not indexed by the net's places")
            for vec in (t.consume, t.produce):
                for _, poly in vec.entries():
                    for term in poly:
                        self.signature.check(term)

    def transition(self, name: str) -> Transition:
        for t in self.transitions:
            if t.name == name:
                return t
        raise UsageError(f"unknown transition {name}")

    def check_marking(self, m: PVector) -> None:
        if m.places != self.places:
            raise UsageError("marking is not indexed by the net's places")
        if not m.is_marking:
            raise UsageError("a marking needs ground tokens with positive multiplicities")
        for _, poly in m.entries():
            for term in poly:
                self.signature.check(term)


@dataclass(frozen=True)
class Net:
    structure: NetStructure
    initial: PVector

    def __post_init__(self):
        self.structure.check_marking(self.initial)

    @property
    def places(self) -> Tuple[str, ...]:
        return self.structure.places

    @property
    def transitions(self) -> Tuple[Transition, ...]:
        return self.structure.transitions


def preset(t: Transition) -> List[str]:
    return t.consume.support()


def _check_assignment(t: Transition, sigma: Assignment) -> None:
    for v in t.variables():
        if v not in sigma:
            raise UnboundVariable(v)
        if not is_ground(sigma[v]):
            raise UsageError(f"firing mode binds {v} to a non-ground term")


def _deficit(m: PVector, t: Transition, sigma: Assignment) -> Optional[Tuple[str, Term]]:
    need = pvec_substitute(t.consume, sigma)
    for p, poly in need.entries():
        have = m[p]
        for term, count in poly.items():
            if have.coeff(term) < count:
                return p, term
    return None


def enabled(m: PVector, t: Transition, sigma: Assignment) -> bool:
    _check_assignment(t, sigma)
    return _deficit(m, t, sigma) is None


def fire(m: PVector, t: Transition, sigma: Assignment) -> PVector:
    _check_assignment(t, sigma)
    missing = _deficit(m, t, sigma)
    if missing is not None:
        raise NotEnabled(t.name, missing[0], missing[1])
    return pvec_add(m, pvec_substitute(t.effect, sigma))


def run(net: Net, script: Sequence[Tuple[str, Assignment]]) -> List[PVector]:
    """Fire ``script`` from the initial marking; returns the whole trajectory."""
    trace = [net.initial]
    for index, (name, sigma) in enumerate(script):
        t = net.structure.transition(name)
        try:
            trace.append(fire(trace[-1], t, sigma))
        except NotEnabled as exc:
            raise NotEnabled(exc.transition, exc.place, exc.term, index) from None
    return trace


def describe_step(t: Transition, sigma: Assignment) -> str:
    return f"{t.name} {format_substitution({v: sigma[v] for v in t.variables()})}"
