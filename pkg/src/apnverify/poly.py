"""Polynomials over terms with cyclic-group coefficients, and place-indexed
vectors of them (P-vectors).

Markings, transition arcs and equations are all P-vectors. Coefficients of
markings and arcs live in the integers.
"""

from __future__ import annotations

from typing import Dict, Iterable, Iterator, Mapping, Optional, Sequence, Tuple

from .errors import UsageError
from .groups import INTEGERS, CyclicGroup, GroupMismatch, require_same
from .terms import Term, format_term, is_ground, substitute, term_key, term_product, variables


class Polynomial:
    """Finite map from terms to nonzero group elements. Immutable."""

    __slots__ = ("group", "_coeffs", "_hash")

    def __init__(self, group: CyclicGroup = INTEGERS, coeffs: Optional[Mapping[Term, int]] = None):
        self.group = group
        out: Dict[Term, int] = {}
        if coeffs:
            for t, a in coeffs.items():
                a = group.canon(a)
                if a:
                    out[t] = a
        self._coeffs = out
        self._hash = None

    @classmethod
    def _trusted(cls, group: CyclicGroup, coeffs: Dict[Term, int]) -> "Polynomial":
        p = cls.__new__(cls)
        p.group = group
        p._coeffs = coeffs
        p._hash = None
        return p

    @classmethod
    def monomial(cls, term: Term, coeff: int = 1, group: CyclicGroup = INTEGERS) -> "Polynomial":
        return cls(group, {term: coeff})

    @classmethod
    def from_terms(cls, terms: Iterable[Term], group: CyclicGroup = INTEGERS) -> "Polynomial":
        """Multiset of terms as a polynomial with counts as coefficients."""
        acc: Dict[Term, int] = {}
        for t in terms:
            acc[t] = acc.get(t, 0) + 1
        return cls(group, acc)

    # -- inspection --------------------------------------------------------

    def __bool__(self):
        return bool(self._coeffs)

    def __len__(self):
        return len(self._coeffs)

    def __iter__(self) -> Iterator[Term]:
        return iter(self._coeffs)

    def coeff(self, t: Term) -> int:
        return self._coeffs.get(t, 0)

    def items(self) -> list:
        """Entries sorted by the canonical term order."""
        return sorted(self._coeffs.items(), key=lambda kv: term_key(kv[0]))

    def support(self) -> list:
        return [t for t, _ in self.items()]

    @property
    def is_empty(self) -> bool:
        return not self._coeffs

    @property
    def is_monomial(self) -> bool:
        return len(self._coeffs) == 1

    def single(self) -> Tuple[Term, int]:
        """The unique entry of a monomial."""
        if len(self._coeffs) != 1:
            raise UsageError("polynomial is not a monomial")
        return next(iter(self._coeffs.items()))

    @property
    def is_ground(self) -> bool:
        return all(is_ground(t) for t in self._coeffs)

    @property
    def is_positive(self) -> bool:
        """All coefficients strictly positive (only meaningful over the integers)."""
        return all(a > 0 for a in self._coeffs.values())

    def total(self) -> int:
        return sum(self._coeffs.values())

    def variables(self) -> list:
        seen: Dict[str, None] = {}
        for t, _ in self.items():
            for v in variables(t):
                seen.setdefault(v)
        return list(seen)

    def __eq__(self, other):
        return (
            isinstance(other, Polynomial)
            and self.group == other.group
            and self._coeffs == other._coeffs
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.group, frozenset(self._coeffs.items())))
        return self._hash

    def __repr__(self):
        return f"Polynomial({self.group}, {format_poly(self)})"

    def __str__(self):
        return format_poly(self)

    # -- algebra -----------------------------------------------------------

    def __add__(self, other: "Polynomial") -> "Polynomial":
        return poly_add(self, other)

    def __neg__(self) -> "Polynomial":
        return self.scale(-1)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return poly_add(self, -other)

    def scale(self, z: int) -> "Polynomial":
        return Polynomial(self.group, {t: z * a for t, a in self._coeffs.items()})

    def with_group(self, group: CyclicGroup) -> "Polynomial":
        return Polynomial(group, self._coeffs)


def format_poly(p: Polynomial) -> str:
    if p.is_empty:
        return "0"
    parts = []
    for t, a in p.items():
        a = p.group.display(a)
        sign = "-" if a < 0 else "+"
        parts.append((sign, f"{abs(a)} * {format_term(t)}"))
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


def poly_add(p1: Polynomial, p2: Polynomial) -> Polynomial:
    group = require_same([p1.group, p2.group])
    if not p1._coeffs:
        return p2
    if not p2._coeffs:
        return p1
    acc = dict(p1._coeffs)
    for t, a in p2._coeffs.items():
        v = group.canon(acc.get(t, 0) + a)
        if v:
            acc[t] = v
        else:
            acc.pop(t, None)
    return Polynomial._trusted(group, acc)


def poly_sum(polys: Iterable[Polynomial], group: CyclicGroup) -> Polynomial:
    acc: Dict[Term, int] = {}
    for p in polys:
        if p.group != group:
            raise GroupMismatch(f"expected {group}, got {p.group}")
        for t, a in p._coeffs.items():
            acc[t] = acc.get(t, 0) + a
    return Polynomial(group, acc)


def cauchy_product(p1: Polynomial, p2: Polynomial) -> Polynomial:
    """Pairwise term products, with p2's integer coefficients scaling p1's."""
    if p2.group != INTEGERS:
        raise GroupMismatch("right factor of a Cauchy product must have integer coefficients")
    acc: Dict[Term, int] = {}
    for t1, a1 in p1._coeffs.items():
        for t2, a2 in p2._coeffs.items():
            t = term_product(t1, t2)
            acc[t] = acc.get(t, 0) + a1 * a2
    return Polynomial(p1.group, acc)


def poly_substitute(p: Polynomial, sigma: Mapping[str, Term]) -> Polynomial:
    if not sigma:
        return p
    acc: Dict[Term, int] = {}
    for t, a in p._coeffs.items():
        s = substitute(t, sigma)
        acc[s] = acc.get(s, 0) + a
    return Polynomial(p.group, acc)


class PVector:
    """Place-indexed family of polynomials over one group. Immutable."""

    __slots__ = ("places", "group", "_entries", "_hash")

    def __init__(
        self,
        places: Sequence[str],
        entries: Optional[Mapping[str, Polynomial]] = None,
        group: CyclicGroup = INTEGERS,
    ):
        self.places = tuple(places)
        if len(set(self.places)) != len(self.places):
            raise UsageError("duplicate place name")
        self.group = group
        clean: Dict[str, Polynomial] = {}
        if entries:
            known = set(self.places)
            for p, poly in entries.items():
                if p not in known:
                    raise UsageError(f"unknown place {p}")
                if poly.group != group:
                    raise GroupMismatch(f"entry for place {p} is over {poly.group}, expected {group}")
                if poly:
                    clean[p] = poly
        self._entries = clean
        self._hash = None

    @classmethod
    def _trusted(cls, places, group, entries) -> "PVector":
        v = cls.__new__(cls)
        v.places = places
        v.group = group
        v._entries = entries
        v._hash = None
        return v

    @classmethod
    def empty(cls, places: Sequence[str], group: CyclicGroup = INTEGERS) -> "PVector":
        return cls(places, {}, group)

    @classmethod
    def from_tokens(cls, places: Sequence[str], tokens: Mapping[str, Mapping[Term, int]]) -> "PVector":
        return cls(places, {p: Polynomial(INTEGERS, dict(c)) for p, c in tokens.items()})

    def __getitem__(self, place: str) -> Polynomial:
        poly = self._entries.get(place)
        if poly is not None:
            return poly
        if place not in self.places:
            raise UsageError(f"unknown place {place}")
        return Polynomial._trusted(self.group, {})

    def entries(self) -> Iterator[Tuple[str, Polynomial]]:
        """Nonempty entries in place order."""
        for p in self.places:
            poly = self._entries.get(p)
            if poly is not None:
                yield p, poly

    def support(self) -> list:
        return [p for p in self.places if p in self._entries]

    @property
    def is_empty(self) -> bool:
        return not self._entries

    @property
    def is_simple(self) -> bool:
        return all(len(poly) == 1 for poly in self._entries.values())

    @property
    def is_semi_positive(self) -> bool:
        return self.group == INTEGERS and all(poly.is_positive for poly in self._entries.values())

    @property
    def is_ground(self) -> bool:
        return all(poly.is_ground for poly in self._entries.values())

    @property
    def is_marking(self) -> bool:
        return self.is_semi_positive and self.is_ground

    def token_count(self) -> int:
        return sum(poly.total() for poly in self._entries.values())

    def variables(self) -> list:
        seen: Dict[str, None] = {}
        for _, poly in self.entries():
            for v in poly.variables():
                seen.setdefault(v)
        return list(seen)

    def covers(self, other: "PVector") -> bool:
        """Pointwise coefficient comparison self >= other (integer vectors)."""
        for p, poly in other._entries.items():
            mine = self._entries.get(p)
            if mine is None:
                return False
            for t, a in poly._coeffs.items():
                if mine._coeffs.get(t, 0) < a:
                    return False
        return True

    def reindex(self, places: Sequence[str]) -> "PVector":
        """Same entries over a larger place set."""
        return PVector(places, self._entries, self.group)

    def __eq__(self, other):
        return (
            isinstance(other, PVector)
            and self.places == other.places
            and self.group == other.group
            and self._entries == other._entries
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.places, self.group, frozenset(self._entries.items())))
        return self._hash

    def __add__(self, other: "PVector") -> "PVector":
        return pvec_add(self, other)

    def __sub__(self, other: "PVector") -> "PVector":
        return pvec_add(self, pvec_scalar(-1, other))

    def __neg__(self) -> "PVector":
        return pvec_scalar(-1, self)

    def __repr__(self):
        return f"PVector({format_pvec(self)})"

    def __str__(self):
        return format_pvec(self)


def format_pvec(v: PVector) -> str:
    inner = ", ".join(f"{p}: {format_poly(poly)}" for p, poly in v.entries())
    return "{" + inner + "}"


def _same_places(v1: PVector, v2: PVector) -> None:
    if v1.places != v2.places:
        raise UsageError(f"place sets differ: {list(v1.places)} vs {list(v2.places)}")


def pvec_add(v1: PVector, v2: PVector) -> PVector:
    _same_places(v1, v2)
    group = require_same([v1.group, v2.group])
    if not v2._entries:
        return v1
    if not v1._entries:
        return v2
    out = dict(v1._entries)
    for p, poly in v2._entries.items():
        mine = out.get(p)
        s = poly if mine is None else poly_add(mine, poly)
        if s:
            out[p] = s
        else:
            out.pop(p, None)
    return PVector._trusted(v1.places, group, out)


def pvec_scalar(z: int, v: PVector) -> PVector:
    out = {}
    for p, poly in v._entries.items():
        s = poly.scale(z)
        if s:
            out[p] = s
    return PVector._trusted(v.places, v.group, out)


def pvec_substitute(v: PVector, sigma: Mapping[str, Term]) -> PVector:
    out = {}
    for p, poly in v._entries.items():
        s = poly_substitute(poly, sigma)
        if s:
            out[p] = s
    return PVector._trusted(v.places, v.group, out)


def pvec_dot(k: PVector, v: PVector) -> Polynomial:
    """Sum over places of the Cauchy products k(p) * v(p)."""
    _same_places(k, v)
    if v.group != INTEGERS:
        raise GroupMismatch("right operand of the dot product must have integer coefficients")
    acc: Dict[Term, int] = {}
    for p, kp in k._entries.items():
        vp = v._entries.get(p)
        if vp is None:
            continue
        for t1, a1 in kp._coeffs.items():
            for t2, a2 in vp._coeffs.items():
                t = term_product(t1, t2)
                acc[t] = acc.get(t, 0) + a1 * a2
    return Polynomial(k.group, acc)
