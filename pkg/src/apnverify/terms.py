"""First-order terms, substitutions, term product and syntactic unification."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import UsageError


class Var:
    __slots__ = ("name", "_hash")

    def __init__(self, name: str):
        self.name = name
        self._hash = hash(("V", name))

    def __eq__(self, other):
        return type(other) is Var and other.name == self.name

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Var({self.name!r})"

    def __str__(self):
        return self.name


class App:
    __slots__ = ("symbol", "args", "_hash")

    def __init__(self, symbol: str, args: Sequence["Term"] = ()):
        self.symbol = symbol
        self.args = tuple(args)
        self._hash = hash((symbol, self.args))

    def __eq__(self, other):
        return (
            type(other) is App
            and self._hash == other._hash
            and self.symbol == other.symbol
            and self.args == other.args
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"App({self.symbol!r}, {self.args!r})"

    def __str__(self):
        return format_term(self)


Term = Union[Var, App]
Substitution = Dict[str, Term]


def const(name: str) -> App:
    return App(name, ())


@dataclass(frozen=True)
class Signature:
    """A finite set of function symbols with arities."""

    symbols: Tuple[Tuple[str, int], ...]

    def __post_init__(self):
        if not self.symbols:
            raise UsageError("signature must contain at least one symbol")
        names = [name for name, _ in self.symbols]
        if len(set(names)) != len(names):
            raise UsageError("duplicate symbol in signature")
        for name, arity in self.symbols:
            if arity < 0:
                raise UsageError(f"negative arity for symbol {name}")
        if not any(arity == 0 for _, arity in self.symbols):
            raise UsageError("signature needs a symbol of arity 0, otherwise no ground terms exist")

    @classmethod
    def of(cls, **arities: int) -> "Signature":
        return cls(tuple(arities.items()))

    def arity(self, name: str) -> Optional[int]:
        for sym, ar in self.symbols:
            if sym == name:
                return ar
        return None

    @property
    def constants(self) -> List[str]:
        return [name for name, ar in self.symbols if ar == 0]

    @property
    def functions(self) -> List[Tuple[str, int]]:
        return [(name, ar) for name, ar in self.symbols if ar > 0]

    def check(self, t: Term) -> None:
        """Raise UsageError unless every application in ``t`` respects its declared arity."""
        for sub in subterms(t):
            if type(sub) is App:
                ar = self.arity(sub.symbol)
                if ar is None:
                    raise UsageError(f"unknown symbol {sub.symbol}")
                if ar != len(sub.args):
                    raise UsageError(
                        f"symbol {sub.symbol} has arity {ar}, applied to {len(sub.args)} arguments"
                    )

    def __str__(self):
        return ", ".join(f"{name}/{ar}" for name, ar in self.symbols)


def subterms(t: Term) -> Iterator[Term]:
    stack = [t]
    while stack:
        s = stack.pop()
        yield s
        if type(s) is App:
            stack.extend(reversed(s.args))


def variables(t: Term) -> List[str]:
    """Variable names of ``t`` in order of first occurrence."""
    seen: Dict[str, None] = {}
    for s in subterms(t):
        if type(s) is Var:
            seen.setdefault(s.name)
    return list(seen)


def is_ground(t: Term) -> bool:
    if type(t) is Var:
        return False
    return all(is_ground(a) for a in t.args)


def depth(t: Term) -> int:
    if type(t) is Var or not t.args:
        return 0
    return 1 + max(depth(a) for a in t.args)


def size(t: Term) -> int:
    if type(t) is Var:
        return 1
    return 1 + sum(size(a) for a in t.args)


def occurs(name: str, t: Term) -> bool:
    if type(t) is Var:
        return t.name == name
    return any(occurs(name, a) for a in t.args)


def term_key(t: Term):
    """Total order on terms: variables first (by name), then applications by
    symbol name, arity and arguments."""
    if type(t) is Var:
        return (0, t.name)
    return (1, t.symbol, len(t.args), tuple(term_key(a) for a in t.args))


def format_term(t: Term) -> str:
    if type(t) is Var:
        return t.name
    if not t.args:
        return t.symbol
    return f"{t.symbol}({', '.join(format_term(a) for a in t.args)})"


def substitute(t: Term, sigma: Mapping[str, Term]) -> Term:
    """Apply ``sigma`` simultaneously; unbound variables stay as they are."""
    if type(t) is Var:
        return sigma.get(t.name, t)
    if not t.args:
        return t
    return App(t.symbol, [substitute(a, sigma) for a in t.args])


def assign(t: Term, sigma: Mapping[str, Term]) -> Term:
    """Like :func:`substitute`, but every variable of ``t`` must be bound to a
    ground term."""
    if type(t) is Var:
        try:
            value = sigma[t.name]
        except KeyError:
            raise UnboundVariable(t.name) from None
        return value
    if not t.args:
        return t
    return App(t.symbol, [assign(a, sigma) for a in t.args])


class UnboundVariable(UsageError):
    def __init__(self, name: str):
        super().__init__(f"assignment does not bind variable {name}")
        self.name = name


def term_product(rho: Term, theta: Term) -> Term:
    """Replace every variable occurrence in ``rho`` by ``theta``."""
    if type(rho) is Var:
        return theta
    if not rho.args:
        return rho
    return App(rho.symbol, [term_product(a, theta) for a in rho.args])


def compose(first: Mapping[str, Term], second: Mapping[str, Term]) -> Substitution:
    """The substitution x -> second[first[x]], restricted to non-trivial bindings."""
    out: Substitution = {}
    for name, image in first.items():
        img = substitute(image, second)
        if not (type(img) is Var and img.name == name):
            out[name] = img
    for name, image in second.items():
        if name not in first and not (type(image) is Var and image.name == name):
            out[name] = image
    return out


def unify(pairs: Iterable[Tuple[Term, Term]]) -> Optional[Substitution]:
    """Most general unifier of a finite set of equations, or None.

    Martelli-Montanari transformation with occurs check. The result is
    idempotent and no bound variable appears in any image. Variable-variable
    equations bind the lexicographically larger name to the smaller one.
    """
    todo = deque(pairs)
    solved: Substitution = {}
    while todo:
        s, t = todo.popleft()
        if solved:
            s = substitute(s, solved)
            t = substitute(t, solved)
        if s == t:
            continue
        if type(s) is App and type(t) is App:
            if s.symbol != t.symbol or len(s.args) != len(t.args):
                return None
            todo.extend(zip(s.args, t.args))
            continue
        if type(s) is Var and type(t) is Var:
            if s.name < t.name:
                s, t = t, s
        elif type(s) is not Var:
            s, t = t, s
        if occurs(s.name, t):
            return None
        binding = {s.name: t}
        for name in list(solved):
            solved[name] = substitute(solved[name], binding)
        solved[s.name] = t
    return solved


def match(pattern: Term, target: Term, binding: Optional[Substitution] = None) -> Optional[Substitution]:
    """One-sided unification: a binding b with substitute(pattern, b) == target."""
    out = dict(binding) if binding else {}
    stack = [(pattern, target)]
    while stack:
        p, g = stack.pop()
        if type(p) is Var:
            bound = out.get(p.name)
            if bound is None:
                out[p.name] = g
            elif bound != g:
                return None
        elif type(g) is not App or g.symbol != p.symbol or len(g.args) != len(p.args):
            return None
        else:
            stack.extend(zip(p.args, g.args))
    return out


class FreshVars:
    """Supply of variables in the reserved ``#k`` namespace.

    The parser never produces names starting with ``#``, so these cannot clash
    with user variables.
    """

    def __init__(self, start: int = 0):
        self._next = start

    def __call__(self) -> Var:
        v = Var(f"#{self._next}")
        self._next += 1
        return v


def canonical_renaming(terms: Sequence[Term], prefix: str = "_") -> List[Term]:
    """Rename variables to ``_0, _1, ...`` in order of first occurrence across ``terms``."""
    names: Dict[str, Term] = {}
    for t in terms:
        for v in variables(t):
            if v not in names:
                names[v] = Var(f"{prefix}{len(names)}")
    return [substitute(t, names) for t in terms]


def format_substitution(sigma: Mapping[str, Term]) -> str:
    inner = ", ".join(f"{k} -> {format_term(v)}" for k, v in sorted(sigma.items()))
    return "{" + inner + "}"
