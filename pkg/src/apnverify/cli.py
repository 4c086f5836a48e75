"""Command-line entry point.

Exit codes: 0 for a positive answer (stable, valid, satisfied, ran fine),
1 for a negative one (unstable, violated, not satisfied, step not enabled),
2 for usage and parse errors, 3 when a bounded search ran out of budget
without an answer.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

from .dsl import ModelFile, NetModel, format_model, load_model, parse_term
from .equation import HomogeneousEquation, Valid, evaluate, invariant_residual, validity_by_stability
from .errors import BoundsExhausted, ParseError, UsageError
from .minsky import encode, halting_equation, lint
from .net import Net, NotEnabled, fire
from .oracle import Bounds, HoldsUpToBound, ViolatedAt, bounded_reachability
from .report import derived_json, dumps, make_report, poly_json, pvec_json, subst_json, verdict_json, zero_json
from .stability import Unstable, decide_stability, derive_substitutions, minimize_spanning, spanning_set
from .terms import format_substitution

log = logging.getLogger("apnverify")

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_EXHAUSTED = 0, 1, 2, 3


@dataclass
class Outcome:
    command: str
    inputs: Dict[str, Any]
    result: Dict[str, Any]
    lines: List[str]
    code: int
    stats: Dict[str, Any] = field(default_factory=dict)

    def report(self) -> Dict[str, Any]:
        return make_report(self.command, self.inputs, self.result, self.stats)


def _bounds(args) -> Bounds:
    return Bounds(args.term_depth, args.max_tokens, args.search_depth, args.cap)


def _net_and_equation(model: ModelFile, args):
    net_name, nm = model.net(args.net)
    eq = model.equation(args.equation, nm)
    return net_name, nm, eq


def _stability(nm, eq: HomogeneousEquation, names: Optional[List[str]]):
    structure = nm.structure
    transitions = [structure.transition(n) for n in names] if names else list(structure.transitions)
    S = spanning_set(eq)
    return S, [decide_stability(eq, t, structure.signature, S) for t in transitions]


def cmd_check_stability(model: ModelFile, args) -> Outcome:
    net_name, nm, eq = _net_and_equation(model, args)
    S, verdicts = _stability(nm, eq, [args.transition] if args.transition else None)
    lines = [f"equation {eq.name} over {eq.group}, net {net_name}: spanning set of {len(S)} zeros (bound {S.bound})"]
    for v in verdicts:
        if isinstance(v, Unstable):
            lines.append(f"  {v.transition}: UNSTABLE")
            lines.append(f"    substitution {format_substitution(v.witness.restricted(sorted(v.firing_mode)))}")
            lines.append(f"    residual     {v.residual}")
            lines.append(f"    firing mode  {format_substitution(v.firing_mode)}")
            lines.append(f"    marking      {v.marking}")
            lines.append(f"    after firing {v.after}")
        else:
            lines.append(f"  {v.transition}: stable ({v.derived_count} derivable substitutions checked)")
    unstable = any(isinstance(v, Unstable) for v in verdicts)
    return Outcome(
        "check-stability",
        {"net": net_name, "equation": eq.name, "transition": args.transition},
        {"stable": not unstable, "transitions": [verdict_json(v) for v in verdicts]},
        lines,
        EXIT_NEGATIVE if unstable else EXIT_OK,
        {"candidates_examined": S.candidates, "spanning_set_size": len(S), "bound": S.bound},
    )


def cmd_check_invariant(model: ModelFile, args) -> Outcome:
    net_name, nm, eq = _net_and_equation(model, args)
    rows = []
    lines = []
    for t in nm.structure.transitions:
        if args.transition and t.name != args.transition:
            continue
        res = invariant_residual(eq, t)
        rows.append({"transition": t.name, "invariant": res.is_empty, "residual": poly_json(res)})
        lines.append(f"{t.name}: " + ("effect cancels" if res.is_empty else f"residual {res}"))
    ok = all(r["invariant"] for r in rows)
    return Outcome(
        "check-invariant",
        {"net": net_name, "equation": eq.name, "transition": args.transition},
        {"invariant": ok, "transitions": rows},
        lines,
        EXIT_OK if ok else EXIT_NEGATIVE,
    )


def cmd_satisfies(model: ModelFile, args) -> Outcome:
    net_name, nm, eq = _net_and_equation(model, args)
    net = nm.net(args.marking)
    value = evaluate(net.initial, eq)
    ok = value.is_empty
    return Outcome(
        "satisfies",
        {"net": net_name, "equation": eq.name, "marking": args.marking},
        {"satisfies": ok, "value": poly_json(value), "marking": pvec_json(net.initial)},
        [f"marking {net.initial} " + ("satisfies" if ok else f"violates {eq.name}: value {value}")],
        EXIT_OK if ok else EXIT_NEGATIVE,
    )


def _parse_step(text: str, net: Net):
    name, _, rest = text.partition(":")
    t = net.structure.transition(name.strip())
    mode = {}
    for item in filter(None, (s.strip() for s in _split_top(rest))):
        var, eqsign, value = item.partition("=")
        if not eqsign:
            raise UsageError(f"bad binding {item!r}; expected VAR=term")
        mode[var.strip()] = parse_term(value.strip(), net.structure.signature)
    return t, mode


def _split_top(text: str) -> List[str]:
    """Split on commas that are not inside parentheses."""
    parts, level, cur = [], 0, ""
    for ch in text:
        if ch == "," and level == 0:
            parts.append(cur)
            cur = ""
            continue
        level += ch == "("
        level -= ch == ")"
        cur += ch
    parts.append(cur)
    return parts


def cmd_simulate(model: ModelFile, args) -> Outcome:
    net_name, nm = model.net(args.net)
    net = nm.net(args.marking)
    trace = [net.initial]
    steps = []
    lines = [f"0: {net.initial}"]
    code = EXIT_OK
    error = None
    for i, text in enumerate(args.step or []):
        t, mode = _parse_step(text, net)
        try:
            trace.append(fire(trace[-1], t, mode))
        except NotEnabled as exc:
            error = {"index": i, "place": exc.place, "term": str(exc.term), "transition": t.name}
            lines.append(f"step {i}: {t.name} not enabled, place {exc.place} lacks {exc.term}")
            code = EXIT_NEGATIVE
            break
        steps.append({"transition": t.name, "mode": subst_json(mode)})
        lines.append(f"{i + 1}: {trace[-1]}   after {t.name} {format_substitution(mode)}")
    return Outcome(
        "simulate",
        {"net": net_name, "marking": args.marking, "steps": list(args.step or [])},
        {"trajectory": [pvec_json(m) for m in trace], "steps": steps, "error": error},
        lines,
        code,
    )


def cmd_zeros(model: ModelFile, args) -> Outcome:
    if args.net or model.nets:
        _, nm = model.net(args.net)
        eq = model.equation(args.equation, nm)
    elif args.equation in model.equations:
        eq = model.equations[args.equation]
    else:
        raise UsageError(f"unknown equation {args.equation}")
    S = spanning_set(eq)
    shown = minimize_spanning(S) if args.minimize else S
    lines = [f"{len(shown)} zeros (bound {S.bound}, {S.candidates} candidates examined)"]
    lines += [f"  {z}" for z in shown.zeros]
    return Outcome(
        "zeros",
        {"equation": eq.name, "minimize": bool(args.minimize)},
        {"bound": S.bound, "zeros": [zero_json(z) for z in shown.zeros]},
        lines,
        EXIT_OK,
        {"candidates_examined": S.candidates, "spanning_set_size": len(S)},
    )


def cmd_derive(model: ModelFile, args) -> Outcome:
    net_name, nm, eq = _net_and_equation(model, args)
    t = nm.structure.transition(args.transition)
    S = spanning_set(eq)
    derived = derive_substitutions(S, t, eq)
    lines = [f"{len(derived)} derivable substitutions for {t.name}"]
    lines += [f"  {format_substitution(d.restricted(t.variables()))}" for d in derived]
    return Outcome(
        "derive",
        {"net": net_name, "equation": eq.name, "transition": t.name},
        {"derived": [derived_json(d) for d in derived]},
        lines,
        EXIT_OK,
        {"spanning_set_size": len(S)},
    )


def _validity(net: Net, eq: HomogeneousEquation, bounds: Bounds, label: str) -> Outcome:
    S = spanning_set(eq)
    verdicts = [decide_stability(eq, t, net.structure.signature, S) for t in net.transitions]
    stable = {v.transition: not isinstance(v, Unstable) for v in verdicts}
    by_stability = validity_by_stability(net, eq, stable)
    result: Dict[str, Any] = {"stability": {k: stable[k] for k in sorted(stable)}}
    if isinstance(by_stability, Valid):
        result.update(outcome="valid", reason="initial marking satisfies the equation and every transition is stable")
        return Outcome("validity", {"target": label}, result, [f"{label}: valid (stable, initially satisfied)"], EXIT_OK)
    result["stability_reason"] = by_stability.reason
    try:
        found = bounded_reachability(net, eq, bounds)
    except BoundsExhausted as exc:
        result.update(outcome="unknown", reason=str(exc))
        return Outcome("validity", {"target": label}, result, [f"{label}: unknown ({exc})"], EXIT_EXHAUSTED)
    if isinstance(found, ViolatedAt):
        run = [{"transition": name, "mode": subst_json(dict(mode))} for name, mode in found.run]
        result.update(outcome="violated", run=run, marking=pvec_json(found.marking))
        lines = [f"{label}: violated after {len(run)} steps, reaching {found.marking}"]
        lines += [f"  {name} {format_substitution(dict(mode))}" for name, mode in found.run]
        return Outcome("validity", {"target": label}, result, lines, EXIT_NEGATIVE)
    assert isinstance(found, HoldsUpToBound)
    result.update(
        outcome="unknown",
        reason=f"{by_stability.reason}; no violation within {found.depth} steps ({found.states} markings)",
    )
    return Outcome("validity", {"target": label}, result, [f"{label}: unknown, {result['reason']}"], EXIT_EXHAUSTED)


def cmd_validity(model: ModelFile, args) -> Outcome:
    bounds = _bounds(args)
    if args.machine:
        machine = model.machine(args.machine)
        for note in lint(machine):
            log.warning("%s: %s", machine.name, note)
        out = _validity(encode(machine), halting_equation(machine), bounds, f"machine {machine.name}")
        out.inputs.update(machine=machine.name)
    else:
        if not args.equation:
            raise UsageError("validity needs --equation or --machine")
        net_name, nm, eq = _net_and_equation(model, args)
        out = _validity(nm.net(args.marking), eq, bounds, f"{eq.name} on {net_name}")
        out.inputs.update(net=net_name, equation=eq.name, marking=args.marking)
    out.inputs.update(bounds=asdict(bounds))
    return out


def cmd_encode_minsky(model: ModelFile, args) -> Outcome:
    machine = model.machine(args.machine)
    notes = lint(machine)
    for note in notes:
        log.warning("%s: %s", machine.name, note)
    net = encode(machine)
    eq = halting_equation(machine)
    text = format_model(
        ModelFile(net.structure.signature, {f"{machine.name}_net": NetModel(net.structure, {"m0": net.initial}, {eq.name: eq})})
    )
    return Outcome(
        "encode-minsky",
        {"machine": machine.name},
        {"model": text, "places": list(net.places), "transitions": [t.name for t in net.transitions], "lint": notes},
        text.rstrip("\n").split("\n"),
        EXIT_OK,
    )


COMMANDS = {
    "check-stability": cmd_check_stability,
    "check-invariant": cmd_check_invariant,
    "satisfies": cmd_satisfies,
    "simulate": cmd_simulate,
    "zeros": cmd_zeros,
    "derive": cmd_derive,
    "validity": cmd_validity,
    "encode-minsky": cmd_encode_minsky,
}


def build_parser() -> argparse.ArgumentParser:
    def add_globals(p: argparse.ArgumentParser, default):
        # Accepted before and after the subcommand; the copy on the subcommand
        # only overrides when given.
        kw = {} if default is None else {"default": default}
        p.add_argument("--model", help="model file", **kw)
        p.add_argument("--json", action="store_true", help="print a JSON report instead of text", **kw)
        p.add_argument("--timing", action="store_true", help="include wall time in the report", **kw)
        p.add_argument("--net", help="net to use when the model holds several", **kw)
        p.add_argument("-v", "--verbose", action="store_true", **kw)

    common = argparse.ArgumentParser(add_help=False)
    add_globals(common, argparse.SUPPRESS)

    bounds = argparse.ArgumentParser(add_help=False)
    bounds.add_argument("--term-depth", type=int, default=2)
    bounds.add_argument("--max-tokens", type=int, default=6)
    bounds.add_argument("--search-depth", type=int, default=10)
    bounds.add_argument("--cap", type=int, default=200_000)

    parser = argparse.ArgumentParser(prog="apnverify", description=__doc__.split("\n\n")[0])
    add_globals(parser, None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-stability", parents=[common], help="decide stability per transition")
    p.add_argument("--equation", required=True)
    p.add_argument("--transition")

    p = sub.add_parser("check-invariant", parents=[common], help="place-invariant test")
    p.add_argument("--equation", required=True)
    p.add_argument("--transition")

    p = sub.add_parser("satisfies", parents=[common], help="evaluate an equation on a marking")
    p.add_argument("--equation", required=True)
    p.add_argument("--marking")

    p = sub.add_parser("simulate", parents=[common], help="fire a sequence of steps")
    p.add_argument("--marking")
    p.add_argument("--step", action="append", help='e.g. "t:W=c,Y=c,Z=g(c)"; repeatable')

    p = sub.add_parser("zeros", parents=[common], help="list a spanning set of zeros")
    p.add_argument("--equation", required=True)
    p.add_argument("--minimize", action="store_true")

    p = sub.add_parser("derive", parents=[common], help="list derivable substitutions")
    p.add_argument("--equation", required=True)
    p.add_argument("--transition", required=True)

    p = sub.add_parser("validity", parents=[common, bounds], help="valid / violated / unknown")
    p.add_argument("--equation")
    p.add_argument("--marking")
    p.add_argument("--machine", help="check that this Minsky machine never halts")

    p = sub.add_parser("encode-minsky", parents=[common], help="print the net encoding a Minsky machine")
    p.add_argument("machine", nargs="?")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if not args.model:
        print("error: --model is required", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    start = time.perf_counter()
    try:
        model = load_model(args.model)
        out = COMMANDS[args.command](model, args)
    except ParseError as exc:
        print(f"{args.model}:{exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.timing:
        out.stats["wall_time_s"] = round(time.perf_counter() - start, 6)
    if args.json:
        print(dumps(out.report()))
    else:
        print("\n".join(out.lines))
    return out.code


if __name__ == "__main__":
    sys.exit(main())
