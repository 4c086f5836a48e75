"""Minsky counter machines and their encoding as algebraic Petri nets.

Register r holds f^k(c) on place p<r> for value k; the program counter is a
single c token on place q<i>. Reaching the HALT instruction is then the same
as the marking violating the equation "q<n> = 0".
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Tuple, Union

from .equation import HomogeneousEquation
from .errors import UsageError
from .net import Net, NetStructure, Transition
from .poly import Polynomial, PVector
from .terms import App, Signature, Term, Var

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Inc:
    register: int
    target: int


@dataclass(frozen=True)
class Jz:
    register: int
    if_positive: int
    if_zero: int


@dataclass(frozen=True)
class Halt:
    pass


Instruction = Union[Inc, Jz, Halt]


@dataclass(frozen=True)
class MinskyMachine:
    registers: int
    instructions: Tuple[Instruction, ...]
    name: str = "M"

    def __post_init__(self):
        if self.registers < 1:
            raise UsageError("a machine needs at least one register")
        n = len(self.instructions)
        if n == 0 or not isinstance(self.instructions[-1], Halt):
            raise UsageError("the last instruction must be halt")
        for i, ins in enumerate(self.instructions[:-1], start=1):
            if isinstance(ins, Halt):
                raise UsageError(f"instruction {i}: halt is only allowed as the last instruction")
            if not 1 <= ins.register <= self.registers:
                raise UsageError(f"instruction {i}: register {ins.register} out of range")
            targets = (ins.target,) if isinstance(ins, Inc) else (ins.if_positive, ins.if_zero)
            for z in targets:
                if not 1 <= z <= n:
                    raise UsageError(f"instruction {i}: jump target {z} out of range 1..{n}")

    @property
    def length(self) -> int:
        return len(self.instructions)


def lint(machine: MinskyMachine) -> List[str]:
    """Warnings for legal but unusual programs."""
    n = machine.length
    notes = []
    for i, ins in enumerate(machine.instructions, start=1):
        if isinstance(ins, Jz) and n in (ins.if_positive, ins.if_zero):
            notes.append(f"instruction {i}: jz jumps directly to the halt instruction")
    return notes


@dataclass(frozen=True)
class MachineState:
    rho: Tuple[int, ...]
    ell: int


HALTED = "halted"


def machine_step(s: MachineState, machine: MinskyMachine) -> Union[MachineState, str]:
    if len(s.rho) != machine.registers or not 1 <= s.ell <= machine.length:
        raise UsageError("state does not fit the machine")
    ins = machine.instructions[s.ell - 1]
    if isinstance(ins, Halt):
        return HALTED
    rho = list(s.rho)
    r = ins.register - 1
    if isinstance(ins, Inc):
        rho[r] += 1
        return MachineState(tuple(rho), ins.target)
    if rho[r] > 0:
        rho[r] -= 1
        return MachineState(tuple(rho), ins.if_positive)
    return MachineState(tuple(rho), ins.if_zero)


def initial_state(machine: MinskyMachine) -> MachineState:
    return MachineState((0,) * machine.registers, 1)


SIGNATURE = Signature((("f", 1), ("c", 0)))
_C = App("c")
_X = Var("X")


def numeral(k: int) -> Term:
    t: Term = _C
    for _ in range(k):
        t = App("f", [t])
    return t


def register_place(r: int) -> str:
    return f"p{r}"


def control_place(i: int) -> str:
    return f"q{i}"


def places(machine: MinskyMachine) -> Tuple[str, ...]:
    return tuple(register_place(r) for r in range(1, machine.registers + 1)) + tuple(
        control_place(i) for i in range(1, machine.length + 1)
    )


def _side(ps: Tuple[str, ...], arcs) -> PVector:
    entries = {}
    for place, term in arcs:
        entries[place] = Polynomial.monomial(term, 1)
    return PVector(ps, entries)


def encode(machine: MinskyMachine) -> Net:
    """One transition per INC, two per JZ (decrement and zero test)."""
    ps = places(machine)
    transitions = []
    for i, ins in enumerate(machine.instructions, start=1):
        if isinstance(ins, Halt):
            continue
        qi = control_place(i)
        pr = register_place(ins.register)
        if isinstance(ins, Inc):
            transitions.append(
                Transition(
                    f"t{i}",
                    _side(ps, [(qi, _C), (pr, _X)]),
                    _side(ps, [(control_place(ins.target), _C), (pr, App("f", [_X]))]),
                )
            )
        else:
            transitions.append(
                Transition(
                    f"t{i}",
                    _side(ps, [(qi, _C), (pr, App("f", [_X]))]),
                    _side(ps, [(control_place(ins.if_positive), _C), (pr, _X)]),
                )
            )
            transitions.append(
                Transition(
                    f"t{i}z",
                    _side(ps, [(qi, _C), (pr, _C)]),
                    _side(ps, [(control_place(ins.if_zero), _C), (pr, _C)]),
                )
            )
    structure = NetStructure(SIGNATURE, ps, tuple(transitions))
    return Net(structure, state_marking(initial_state(machine), machine))


def state_marking(s: MachineState, machine: MinskyMachine) -> PVector:
    ps = places(machine)
    entries = {register_place(r): Polynomial.monomial(numeral(k)) for r, k in enumerate(s.rho, start=1)}
    entries[control_place(s.ell)] = Polynomial.monomial(_C)
    return PVector(ps, entries)


def decode_marking(m: PVector, machine: MinskyMachine) -> MachineState:
    """Inverse of :func:`state_marking`; raises UsageError on other markings."""
    rho = []
    for r in range(1, machine.registers + 1):
        poly = m[register_place(r)]
        if poly.total() != 1:
            raise UsageError(f"register place p{r} must hold exactly one token")
        tok, _ = poly.single()
        k = 0
        while isinstance(tok, App) and tok.symbol == "f":
            tok = tok.args[0]
            k += 1
        if tok != _C:
            raise UsageError(f"register place p{r} holds a non-numeral")
        rho.append(k)
    ells = [i for i in range(1, machine.length + 1) if m[control_place(i)]]
    if len(ells) != 1 or m[control_place(ells[0])] != Polynomial.monomial(_C):
        raise UsageError("control places must hold exactly one c token in total")
    return MachineState(tuple(rho), ells[0])


def halting_equation(machine: MinskyMachine) -> HomogeneousEquation:
    """The halt place stays empty: any token t on it contributes t itself."""
    ps = places(machine)
    vec = PVector(ps, {control_place(machine.length): Polynomial.monomial(Var("x"), 1)})
    return HomogeneousEquation("halt", vec)
