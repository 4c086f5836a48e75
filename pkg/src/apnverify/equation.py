"""Homogeneous P-equations: satisfaction, the place-invariant check and the
validity argument from stability plus initial satisfaction."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import UsageError
from .groups import CyclicGroup
from .net import Net, Transition
from .poly import Polynomial, PVector, pvec_dot
from .terms import Term, Var, term_product


@dataclass(frozen=True)
class HomogeneousEquation:
    """sum over places of gamma_p * kappa_p, required to vanish."""

    name: str
    vector: PVector
    _kappa: Dict[str, Tuple[Term, int]] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        if not self.vector.is_simple:
            raise UsageError(f"equation {self.name}: each place needs a single term or nothing")
        kappa = {}
        for p, poly in self.vector.entries():
            term, gamma = poly.single()
            # Rename the variables of each place's term to the place name. The
            # product with a token replaces every variable anyway, so the
            # equation means the same, and terms of different places no longer
            # share variables when they are unified against each other.
            kappa[p] = (term_product(term, Var(p)), gamma)
        object.__setattr__(self, "_kappa", kappa)

    @property
    def group(self) -> CyclicGroup:
        return self.vector.group

    @property
    def places(self) -> Tuple[str, ...]:
        return self.vector.places

    @property
    def constrained(self) -> List[str]:
        """Places with a nonzero coefficient, in place order."""
        return [p for p in self.places if p in self._kappa]

    def kappa(self, place: str) -> Optional[Term]:
        entry = self._kappa.get(place)
        return entry[0] if entry else None

    def gamma(self, place: str) -> int:
        entry = self._kappa.get(place)
        return entry[1] if entry else 0

    def over(self, places: Sequence[str]) -> "HomogeneousEquation":
        """The same equation indexed by a (super)set of places."""
        places = tuple(places)
        if places == self.places:
            return self
        missing = [p for p in self.vector.support() if p not in places]
        if missing:
            raise UsageError(f"equation {self.name} mentions unknown places: {', '.join(missing)}")
        return HomogeneousEquation(self.name, self.vector.reindex(places))


def _same_places(m: PVector, eq: HomogeneousEquation) -> None:
    if m.places != eq.places:
        raise UsageError(f"equation {eq.name} is not indexed by the marking's places")


def evaluate(m: PVector, eq: HomogeneousEquation) -> Polynomial:
    _same_places(m, eq)
    return pvec_dot(eq.vector, m)


def satisfies(m: PVector, eq: HomogeneousEquation) -> bool:
    return evaluate(m, eq).is_empty


def invariant_residual(eq: HomogeneousEquation, t: Transition) -> Polynomial:
    _same_places(t.effect, eq)
    return pvec_dot(eq.vector, t.effect)


def invariant_check(eq: HomogeneousEquation, t: Transition) -> bool:
    """Sufficient test for stability: the transition's effect cancels symbolically."""
    return invariant_residual(eq, t).is_empty


@dataclass(frozen=True)
class Valid:
    pass


@dataclass(frozen=True)
class Unknown:
    reason: str
    transition: Optional[str] = None


def validity_by_stability(net: Net, eq: HomogeneousEquation, stable: Mapping[str, bool]) -> Union[Valid, Unknown]:
    """Valid when the initial marking satisfies ``eq`` and every transition is
    stable. Anything else is inconclusive rather than invalid."""
    if not satisfies(net.initial, eq):
        return Unknown("initial marking violates the equation")
    for t in net.transitions:
        if t.name not in stable:
            raise UsageError(f"no stability verdict for transition {t.name}")
        if not stable[t.name]:
            return Unknown(f"equation is not stable under transition {t.name}", t.name)
    return Valid()
