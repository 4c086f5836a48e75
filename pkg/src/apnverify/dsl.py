"""Parser and printer for the model language.

A file holds an optional signature, nets (with places, transitions, named
markings and local equations), top-level equations and Minsky machines::

    signature: f/1, g/1, c/0;
    net example1 {
      places: A, B, C, D, E;
      transition t { in: A -> 1 * g(W), B -> 1 * f(Y), C -> 1 * W, D -> 2 * Z;
                     out: E -> 1 * f(W); }
      marking m0 { B: 1 * c, D: 3 * g(c) }
    }
    equation E1 group Z { A: 4 * f(x), B: 3 * g(x), C: -5 * f(g(x)), D: -1 * x }
    minsky M { registers: 2; 1: inc 1 -> 2; 2: jz 1 ? 3 : 2; 3: halt; }

Bare identifiers in terms are constants when the signature declares them with
arity 0. Otherwise they are variables if they start with an uppercase letter,
or if they appear inside an equation body. Comments run from ``//`` or ``#``
to the end of the line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .equation import HomogeneousEquation
from .errors import ParseError, UsageError
from .groups import INTEGERS, CyclicGroup
from .minsky import Halt, Inc, Jz, MinskyMachine
from .net import Net, NetStructure, Transition
from .poly import Polynomial, PVector
from .terms import App, Signature, Term, Var, format_term, is_ground

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>(//|\#)[^\n]*)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<arrow>->)
  | (?P<sym>[{}(),;:*+\-?/=])
    """,
    re.VERBOSE,
)

KEYWORDS = {"signature", "net", "places", "transition", "in", "out", "marking", "equation", "group", "minsky",
            "registers", "inc", "jz", "halt", "mod"}


@dataclass(frozen=True)
class Tok:
    kind: str  # ident, int, sym, eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> List[Tok]:
    toks = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(line, col, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        s = m.group()
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind in ("int", "ident"):
                toks.append(Tok(kind, s, line, col))
            elif kind in ("arrow", "sym"):
                toks.append(Tok("sym", s, line, col))
            col += len(s)
        pos = m.end()
    toks.append(Tok("eof", "", line, col))
    return toks


@dataclass
class NetModel:
    structure: NetStructure
    markings: Dict[str, PVector] = field(default_factory=dict)
    equations: Dict[str, HomogeneousEquation] = field(default_factory=dict)

    def net(self, marking: Optional[str] = None) -> Net:
        """The net started in ``marking``; by default ``m0``, else the first
        declared marking, else the empty one."""
        if marking is not None:
            if marking not in self.markings:
                raise UsageError(f"unknown marking {marking}")
            m = self.markings[marking]
        elif "m0" in self.markings:
            m = self.markings["m0"]
        elif self.markings:
            m = next(iter(self.markings.values()))
        else:
            m = PVector.empty(self.structure.places)
        return Net(self.structure, m)


@dataclass
class ModelFile:
    signature: Optional[Signature] = None
    nets: Dict[str, NetModel] = field(default_factory=dict)
    equations: Dict[str, HomogeneousEquation] = field(default_factory=dict)
    machines: Dict[str, MinskyMachine] = field(default_factory=dict)

    def net(self, name: Optional[str] = None) -> Tuple[str, NetModel]:
        if name is None:
            if len(self.nets) != 1:
                raise UsageError("the model holds %d nets; pick one with --net" % len(self.nets))
            return next(iter(self.nets.items()))
        if name not in self.nets:
            raise UsageError(f"unknown net {name}")
        return name, self.nets[name]

    def equation(self, name: str, net: NetModel) -> HomogeneousEquation:
        eq = net.equations.get(name) or self.equations.get(name)
        if eq is None:
            raise UsageError(f"unknown equation {name}")
        return eq.over(net.structure.places)

    def machine(self, name: Optional[str] = None) -> MinskyMachine:
        if name is None:
            if len(self.machines) != 1:
                raise UsageError("the model holds %d machines; pick one by name" % len(self.machines))
            return next(iter(self.machines.values()))
        if name not in self.machines:
            raise UsageError(f"unknown machine {name}")
        return self.machines[name]


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.model = ModelFile()
        self.equation_names: Dict[str, Tok] = {}
        self.pending: List[Tuple[Tok, HomogeneousEquation]] = []

    # -- token helpers -----------------------------------------------------

    @property
    def cur(self) -> Tok:
        return self.toks[self.i]

    def error(self, msg: str, tok: Optional[Tok] = None):
        tok = tok or self.cur
        raise ParseError(tok.line, tok.col, msg)

    def at(self, text: str) -> bool:
        return self.cur.kind in ("sym", "ident") and self.cur.text == text

    def advance(self) -> Tok:
        tok = self.cur
        if tok.kind != "eof":
            self.i += 1
        return tok

    def expect(self, text: str) -> Tok:
        if not self.at(text):
            found = "end of input" if self.cur.kind == "eof" else repr(self.cur.text)
            self.error(f"expected {text!r}, found {found}")
        return self.advance()

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.advance()
            return True
        return False

    def ident(self, what: str = "identifier") -> Tok:
        if self.cur.kind != "ident":
            self.error(f"expected {what}")
        return self.advance()

    def integer(self) -> int:
        if self.cur.kind != "int":
            self.error("expected an integer")
        return int(self.advance().text)

    # -- items -------------------------------------------------------------

    def parse(self) -> ModelFile:
        while self.cur.kind != "eof":
            if self.at("signature"):
                self.signature_decl()
            elif self.at("net"):
                self.net_decl()
            elif self.at("equation"):
                tok = self.cur
                eq = self.equation_decl(None)
                self.model.equations[eq.name] = eq
                self.pending.append((tok, eq))
            elif self.at("minsky"):
                self.minsky_decl()
            else:
                self.error("expected 'signature', 'net', 'equation' or 'minsky'")
        known = set()
        for nm in self.model.nets.values():
            known.update(nm.structure.places)
        for tok, eq in self.pending:
            if self.model.nets:
                missing = [p for p in eq.vector.support() if p not in known]
                if missing:
                    self.error(f"equation {eq.name} mentions unknown place {missing[0]}", tok)
        return self.model

    def signature_decl(self):
        start = self.expect("signature")
        self.expect(":")
        symbols = []
        while True:
            name = self.ident("symbol name")
            self.expect("/")
            symbols.append((name.text, self.integer()))
            if not self.accept(","):
                break
        self.expect(";")
        try:
            sig = Signature(tuple(symbols))
        except UsageError as exc:
            self.error(str(exc), start)
        if self.model.signature is not None and self.model.signature != sig:
            self.error("conflicting signature declaration; one signature per file", start)
        self.model.signature = sig

    def net_decl(self):
        self.expect("net")
        name = self.ident("net name")
        if name.text in self.model.nets:
            self.error(f"duplicate net {name.text}", name)
        self.expect("{")
        places: Optional[Tuple[str, ...]] = None
        transitions: List[Tuple[Tok, str, dict, dict]] = []
        markings: Dict[str, PVector] = {}
        equations: Dict[str, HomogeneousEquation] = {}
        structure = None

        def need_places(tok):
            if places is None:
                self.error("declare places before transitions, markings and equations", tok)

        while not self.at("}"):
            tok = self.cur
            if self.at("signature"):
                self.signature_decl()
            elif self.at("places"):
                if places is not None:
                    self.error("places declared twice")
                self.advance()
                self.expect(":")
                names = [self.ident("place name")]
                while self.accept(","):
                    names.append(self.ident("place name"))
                self.expect(";")
                seen = set()
                for n in names:
                    if n.text in seen:
                        self.error(f"duplicate place {n.text}", n)
                    seen.add(n.text)
                places = tuple(n.text for n in names)
            elif self.at("transition"):
                need_places(tok)
                transitions.append(self.transition_decl(places, [t[1] for t in transitions]))
            elif self.at("marking"):
                need_places(tok)
                mname, m = self.marking_decl(places)
                if mname in markings:
                    self.error(f"duplicate marking {mname}", tok)
                markings[mname] = m
            elif self.at("equation"):
                need_places(tok)
                eq = self.equation_decl(places)
                equations[eq.name] = eq
            else:
                self.error("expected 'places', 'transition', 'marking', 'equation' or '}'")
        close = self.expect("}")
        if places is None:
            self.error(f"net {name.text} declares no places", close)
        sig = self.require_signature(close)
        built = []
        for tok, tname, consume, produce in transitions:
            try:
                built.append(
                    Transition(
                        tname,
                        PVector(places, consume),
                        PVector(places, produce),
                    )
                )
            except UsageError as exc:
                self.error(str(exc), tok)
        try:
            structure = NetStructure(sig, places, tuple(built))
        except UsageError as exc:
            self.error(str(exc), name)
        self.model.nets[name.text] = NetModel(structure, markings, equations)

    def require_signature(self, tok: Tok) -> Signature:
        if self.model.signature is None:
            self.error("no signature declared before use", tok)
        return self.model.signature

    def place_ref(self, places) -> Tok:
        tok = self.ident("place name")
        if tok.text not in places:
            self.error(f"unknown place {tok.text}", tok)
        return tok

    def transition_decl(self, places, taken: List[str]):
        start = self.expect("transition")
        name = self.ident("transition name")
        if name.text in taken:
            self.error(f"duplicate transition {name.text}", name)
        self.expect("{")
        sides = {"in": {}, "out": {}}
        while not self.at("}"):
            if not (self.at("in") or self.at("out")):
                self.error("expected 'in', 'out' or '}'")
            side = self.advance().text
            self.expect(":")
            arcs = sides[side]
            if not self.at(";"):
                while True:
                    place = self.place_ref(places)
                    if place.text in arcs:
                        self.error(f"place {place.text} has two arcs on the same side", place)
                    self.expect("->")
                    ctok = self.cur
                    coeff = 1
                    if self.cur.kind == "int":
                        coeff = self.integer()
                        self.expect("*")
                    if coeff <= 0:
                        self.error("arc multiplicity must be positive", ctok)
                    term = self.term(variables_ok=False)
                    arcs[place.text] = Polynomial.monomial(term, coeff)
                    if not self.accept(","):
                        break
            self.expect(";")
        self.expect("}")
        return start, name.text, sides["in"], sides["out"]

    def peek_is(self, text: str) -> bool:
        nxt = self.toks[self.i + 1]
        return nxt.kind == "sym" and nxt.text == text

    def marking_decl(self, places):
        self.expect("marking")
        name = self.ident("marking name")
        self.expect("{")
        entries = {}
        if not self.at("}"):
            while True:
                place = self.place_ref(places)
                if place.text in entries:
                    self.error(f"place {place.text} listed twice", place)
                self.expect(":")
                ptok = self.cur
                poly = self.polynomial(INTEGERS, variables_ok=False)
                if not poly.is_positive:
                    self.error("marking multiplicities must be positive", ptok)
                if any(not is_ground(t) for t in poly.support()):
                    self.error("marking tokens must be ground terms", ptok)
                entries[place.text] = poly
                if not self.accept(","):
                    break
        self.expect("}")
        return name.text, PVector(places, entries)

    def group_spec(self) -> CyclicGroup:
        tok = self.ident("group name")
        if tok.text != "Z":
            self.error("only the cyclic groups Z and Z mod n are supported", tok)
        if self.accept("mod"):
            ntok = self.cur
            n = self.integer()
            if n < 1:
                self.error("group order must be positive", ntok)
            return CyclicGroup(n)
        return INTEGERS

    def equation_decl(self, places) -> HomogeneousEquation:
        self.expect("equation")
        name = self.ident("equation name")
        if name.text in self.equation_names:
            self.error(f"duplicate equation {name.text}", name)
        self.equation_names[name.text] = name
        self.expect("group")
        group = self.group_spec()
        self.expect("{")
        entries: Dict[str, Polynomial] = {}
        order: List[str] = []
        if not self.at("}"):
            while True:
                place = self.place_ref(places) if places is not None else self.ident("place name")
                if place.text in entries:
                    self.error(f"place {place.text} listed twice", place)
                self.expect(":")
                ptok = self.cur
                poly = self.polynomial(group, variables_ok=True)
                if len(poly) > 1:
                    self.error("each place needs a single term with a coefficient", ptok)
                entries[place.text] = poly
                order.append(place.text)
                if not self.accept(","):
                    break
        if self.at("="):
            self.error("only homogeneous equations are supported; the right-hand side is always 0")
        self.expect("}")
        if self.at("="):
            self.error("only homogeneous equations are supported; the right-hand side is always 0")
        eq_places = places if places is not None else tuple(order)
        if not eq_places:
            self.error(f"equation {name.text} is empty", name)
        return HomogeneousEquation(name.text, PVector(eq_places, entries, group))

    def minsky_decl(self):
        self.expect("minsky")
        name = self.ident("machine name")
        if name.text in self.model.machines:
            self.error(f"duplicate machine {name.text}", name)
        self.expect("{")
        self.expect("registers")
        self.expect(":")
        registers = self.integer()
        self.expect(";")
        instructions = []
        while not self.at("}"):
            itok = self.cur
            index = self.integer()
            if index != len(instructions) + 1:
                self.error(f"expected instruction number {len(instructions) + 1}", itok)
            self.expect(":")
            if self.accept("inc"):
                r = self.integer()
                self.expect("->")
                instructions.append(Inc(r, self.integer()))
            elif self.accept("jz"):
                r = self.integer()
                self.expect("?")
                z1 = self.integer()
                self.expect(":")
                instructions.append(Jz(r, z1, self.integer()))
            elif self.accept("halt"):
                instructions.append(Halt())
            else:
                self.error("expected 'inc', 'jz' or 'halt'")
            self.expect(";")
        self.expect("}")
        try:
            self.model.machines[name.text] = MinskyMachine(registers, tuple(instructions), name.text)
        except UsageError as exc:
            self.error(str(exc), name)

    # -- terms and polynomials --------------------------------------------

    def polynomial(self, group: CyclicGroup, variables_ok: bool) -> Polynomial:
        if self.cur.kind == "int" and self.cur.text == "0" and not self.peek_is("*"):
            self.advance()
            return Polynomial(group)
        acc: Dict[Term, int] = {}
        sign = -1 if self.accept("-") else 1
        while True:
            coeff = 1
            if self.cur.kind == "int":
                coeff = self.integer()
                self.expect("*")
            term = self.term(variables_ok)
            acc[term] = acc.get(term, 0) + sign * coeff
            if self.accept("+"):
                sign = 1
            elif self.accept("-"):
                sign = -1
            else:
                break
        return Polynomial(group, acc)

    def term(self, variables_ok: bool) -> Term:
        tok = self.ident("term")
        sig = self.require_signature(tok)
        if self.accept("("):
            args = [self.term(variables_ok)]
            while self.accept(","):
                args.append(self.term(variables_ok))
            self.expect(")")
            arity = sig.arity(tok.text)
            if arity is None:
                self.error(f"unknown symbol {tok.text}", tok)
            if arity != len(args):
                self.error(f"symbol {tok.text} has arity {arity}, got {len(args)} arguments", tok)
            return App(tok.text, args)
        arity = sig.arity(tok.text)
        if arity == 0:
            return App(tok.text)
        if arity is not None:
            self.error(f"symbol {tok.text} has arity {arity}, got no arguments", tok)
        if tok.text in KEYWORDS:
            self.error(f"keyword {tok.text} cannot be used as a term", tok)
        if tok.text[0].isupper() or variables_ok:
            return Var(tok.text)
        self.error(f"unknown symbol {tok.text}", tok)


def parse_model(text: str) -> ModelFile:
    return _Parser(text).parse()


def load_model(path: str) -> ModelFile:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


# -- printing ---------------------------------------------------------------


def _fmt_poly(poly: Polynomial) -> str:
    if poly.is_empty:
        return "0"
    parts = []
    for t, a in poly.items():
        a = poly.group.display(a)
        parts.append(("-" if a < 0 else "+", f"{abs(a)} * {format_term(t)}"))
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


def _fmt_group(group: CyclicGroup) -> str:
    return "Z" if group.order is None else f"Z mod {group.order}"


def format_equation(eq: HomogeneousEquation, indent: str = "") -> str:
    body = ", ".join(f"{p}: {_fmt_poly(eq.vector[p])}" for p in eq.places)
    return f"{indent}equation {eq.name} group {_fmt_group(eq.group)} {{ {body} }}"


def format_marking(name: str, m: PVector, indent: str = "") -> str:
    body = ", ".join(f"{p}: {_fmt_poly(poly)}" for p, poly in m.entries())
    return f"{indent}marking {name} {{ {body} }}" if body else f"{indent}marking {name} {{ }}"


def _fmt_arcs(vec: PVector) -> str:
    return ", ".join(f"{p} -> {_fmt_poly(poly)}" for p, poly in vec.entries())


def format_net(name: str, nm: NetModel) -> str:
    s = nm.structure
    lines = [f"net {name} {{", f"  places: {', '.join(s.places)};"]
    for t in s.transitions:
        inner = []
        if not t.consume.is_empty:
            inner.append(f"in: {_fmt_arcs(t.consume)};")
        if not t.produce.is_empty:
            inner.append(f"out: {_fmt_arcs(t.produce)};")
        lines.append(f"  transition {t.name} {{ {' '.join(inner)} }}")
    for mname, m in nm.markings.items():
        lines.append(format_marking(mname, m, "  "))
    for eq in nm.equations.values():
        lines.append(format_equation(eq, "  "))
    lines.append("}")
    return "\n".join(lines)


def format_machine(machine: MinskyMachine) -> str:
    lines = [f"minsky {machine.name} {{", f"  registers: {machine.registers};"]
    for i, ins in enumerate(machine.instructions, start=1):
        if isinstance(ins, Inc):
            lines.append(f"  {i}: inc {ins.register} -> {ins.target};")
        elif isinstance(ins, Jz):
            lines.append(f"  {i}: jz {ins.register} ? {ins.if_positive} : {ins.if_zero};")
        else:
            lines.append(f"  {i}: halt;")
    lines.append("}")
    return "\n".join(lines)


def format_model(model: ModelFile) -> str:
    chunks = []
    if model.signature is not None:
        chunks.append(f"signature: {model.signature};")
    for name, nm in model.nets.items():
        chunks.append(format_net(name, nm))
    for eq in model.equations.values():
        chunks.append(format_equation(eq))
    for machine in model.machines.values():
        chunks.append(format_machine(machine))
    return "\n\n".join(chunks) + "\n"


def parse_term(text: str, signature: Signature, variables_ok: bool = False) -> Term:
    """A single term, e.g. for firing modes given on the command line."""
    p = _Parser(text)
    p.model.signature = signature
    t = p.term(variables_ok)
    if p.cur.kind != "eof":
        p.error("unexpected input after term")
    return t
