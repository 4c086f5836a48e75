"""Cyclic coefficient groups: the integers and Z/nZ.

Elements are plain Python ints kept in canonical form (residues in
``0..n-1`` for finite groups), so arithmetic never overflows.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

from .errors import UsageError


class GroupMismatch(UsageError):
    pass


@dataclass(frozen=True)
class CyclicGroup:
    order: Optional[int] = None  # None means the integers

    def __post_init__(self):
        if self.order is not None and self.order < 1:
            raise UsageError(f"group order must be positive, got {self.order}")

    @property
    def is_finite(self) -> bool:
        return self.order is not None

    def canon(self, value: int) -> int:
        if self.order is None:
            return value
        return value % self.order

    def add(self, a: int, b: int) -> int:
        return self.canon(a + b)

    def neg(self, a: int) -> int:
        return self.canon(-a)

    def scale(self, z: int, a: int) -> int:
        return self.canon(z * a)

    def is_zero(self, a: int) -> bool:
        return self.canon(a) == 0

    def weighted_sum(self, nu: Mapping[str, int], gamma: Mapping[str, int]) -> int:
        """sum of nu(p) * gamma(p) over the keys of ``nu``."""
        return self.canon(sum(n * gamma[p] for p, n in nu.items()))

    def display(self, a: int) -> int:
        """Symmetric representative for finite groups, for readable output."""
        a = self.canon(a)
        if self.order is not None and a > self.order // 2:
            return a - self.order
        return a

    def __str__(self):
        return "Z" if self.order is None else f"Z/{self.order}"


INTEGERS = CyclicGroup()


def require_same(groups: Iterable[CyclicGroup]) -> CyclicGroup:
    gs = set(groups)
    if len(gs) != 1:
        raise GroupMismatch("operands live in different groups: " + ", ".join(sorted(map(str, gs))))
    return gs.pop()


@dataclass(frozen=True)
class GroupElement:
    group: CyclicGroup
    value: int

    def __post_init__(self):
        object.__setattr__(self, "value", self.group.canon(self.value))

    def __add__(self, other: "GroupElement") -> "GroupElement":
        return g_add(self, other)

    def __neg__(self) -> "GroupElement":
        return GroupElement(self.group, -self.value)

    def __rmul__(self, z: int) -> "GroupElement":
        return scalar_mul(z, self)

    @property
    def is_zero(self) -> bool:
        return self.value == 0


def g_add(a: GroupElement, b: GroupElement) -> GroupElement:
    group = require_same([a.group, b.group])
    return GroupElement(group, a.value + b.value)


def scalar_mul(z: int, a: GroupElement) -> GroupElement:
    return GroupElement(a.group, z * a.value)


def weighted_coeff_sum(nu: Mapping[str, int], gamma: Mapping[str, GroupElement]) -> GroupElement:
    if set(nu) - set(gamma):
        raise UsageError("count vector mentions places without a coefficient")
    group = require_same(g.group for g in gamma.values())
    total = GroupElement(group, 0)
    for p, n in nu.items():
        total = g_add(total, scalar_mul(n, gamma[p]))
    return total
