"""JSON-ready views of engine results and deterministic serialization."""

from __future__ import annotations

import json
from typing import Any, Dict, Mapping

from . import __version__
from .poly import Polynomial, PVector
from .stability import DerivedSubstitution, Stable, Unstable, Zero
from .terms import Term, format_term

SCHEMA_VERSION = 1


def term_json(t: Term) -> str:
    return format_term(t)


def poly_json(p: Polynomial) -> list:
    return [[p.group.display(a), format_term(t)] for t, a in p.items()]


def pvec_json(v: PVector) -> Dict[str, list]:
    return {p: poly_json(poly) for p, poly in v.entries()}


def subst_json(sigma: Mapping[str, Term]) -> Dict[str, str]:
    return {k: format_term(v) for k, v in sorted(sigma.items())}


def zero_json(z: Zero) -> Dict[str, Any]:
    return {
        "nu": z.as_dict(),
        "result": None if z.result is None else format_term(z.result),
    }


def derived_json(d: DerivedSubstitution) -> Dict[str, Any]:
    return {
        "delta": subst_json(d.delta),
        "key": {v: img for v, img in d.key},
        "chosen": {q: zero_json(z) for q, z in sorted(d.chosen.items())},
        "fresh": dict(sorted(d.fresh.items())),
    }


def verdict_json(v) -> Dict[str, Any]:
    out: Dict[str, Any] = {
        "transition": v.transition,
        "verdict": "stable" if isinstance(v, Stable) else "unstable",
        "spanning_set_size": v.spanning_size,
        "bound": v.bound,
        "derived_count": v.derived_count,
    }
    if isinstance(v, Unstable):
        out["witness"] = {
            "delta": subst_json(v.witness.restricted(sorted(v.firing_mode))),
            "residual": poly_json(v.residual),
            "realization": subst_json(v.realization),
            "firing_mode": subst_json(v.firing_mode),
            "marking": pvec_json(v.marking),
            "after": pvec_json(v.after),
        }
    return out


def make_report(command: str, inputs: Mapping[str, Any], result: Mapping[str, Any], stats: Mapping[str, Any]) -> Dict[str, Any]:
    return {
        "schema": SCHEMA_VERSION,
        "tool": f"apnverify {__version__}",
        "command": command,
        "inputs": dict(inputs),
        "result": dict(result),
        "stats": dict(stats),
    }


def dumps(report: Mapping[str, Any]) -> str:
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False)
