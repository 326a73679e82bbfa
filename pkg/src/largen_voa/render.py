"""Text, LaTeX and JSON output for operator sums and OPE tables."""

from __future__ import annotations

import re
from typing import Dict, Mapping

from .operators import FieldSymbol, Letter, MultiTrace, OperatorSum, canonical_product
from .scalars import GradedCoefficient


def letter_text(x: Letter) -> str:
    return x.name if x.deriv == 0 else f"d^{x.deriv} {x.name}"


def multitrace_text(m: MultiTrace) -> str:
    if not m:
        return "1"
    return "*".join("Tr(" + " ".join(letter_text(x) for x in t) + ")" for t in m)


def _signed_pieces(x: OperatorSum, coeff_fmt, mono_fmt, joiner: str):
    pieces = []
    for m, c in x.sorted_items():
        terms = c.terms
        single = len(terms) == 1
        if single:
            (exp, val), = terms.items()
            neg = val < 0
            mag = -c if neg else c
        else:
            neg, mag = False, c
        mono = mono_fmt(m)
        if not m:
            body = coeff_fmt(mag, not single)
        elif mag == 1:
            body = mono
        else:
            body = coeff_fmt(mag, not single) + joiner + mono
        pieces.append((neg, body))
    return pieces


def _join(pieces) -> str:
    if not pieces:
        return "0"
    neg, body = pieces[0]
    out = ("-" if neg else "") + body
    for neg, body in pieces[1:]:
        out += (" - " if neg else " + ") + body
    return out


def operator_to_text(x: OperatorSum) -> str:
    def coeff(c: GradedCoefficient, wrap: bool) -> str:
        s = c.to_text()
        return f"({s})" if wrap else s

    return _join(_signed_pieces(x, coeff, multitrace_text, "*"))


_NAME_RE = re.compile(r"^([A-Za-z]+)(\d+)$")


def _field_latex(name: str) -> str:
    m = _NAME_RE.match(name)
    return f"{m.group(1)}_{{{m.group(2)}}}" if m else name


def letter_latex(x: Letter) -> str:
    if x.deriv == 0:
        return _field_latex(x.name)
    if x.deriv == 1:
        return rf"\partial {_field_latex(x.name)}"
    return rf"\partial^{{{x.deriv}}} {_field_latex(x.name)}"


def multitrace_latex(m: MultiTrace) -> str:
    if not m:
        return "1"
    return r" \, ".join(
        r"\operatorname{Tr}(" + r" \, ".join(letter_latex(x) for x in t) + ")" for t in m
    )


def operator_to_latex(x: OperatorSum) -> str:
    def coeff(c: GradedCoefficient, wrap: bool) -> str:
        s = c.to_latex()
        return rf"\left({s}\right)" if wrap else s

    return _join(_signed_pieces(x, coeff, multitrace_latex, " "))


def operator_to_json(x: OperatorSum) -> list:
    return [
        {
            "coeff": c.to_json(),
            "traces": [[{"field": l.name, "deriv": l.deriv} for l in t] for t in m],
        }
        for m, c in x.sorted_items()
    ]


def operator_from_json(data: list, fields: Mapping[str, FieldSymbol]) -> OperatorSum:
    out = OperatorSum()
    for item in data:
        traces = [
            tuple(Letter(l["field"], l["deriv"], fields[l["field"]].ghost) for l in t)
            for t in item["traces"]
        ]
        res = canonical_product(traces)
        if res is not None:
            out.add_term(res[1], GradedCoefficient.from_json(item["coeff"]) * res[0])
    return out


def poles_to_text(poles: Mapping[int, OperatorSum]) -> str:
    if not poles:
        return "0  (no singular terms)"
    lines = []
    for p in sorted(poles, reverse=True):
        lines.append(f"pole {p}: {operator_to_text(poles[p])}")
    return "\n".join(lines)


def poles_to_latex(poles: Mapping[int, OperatorSum]) -> str:
    if not poles:
        return "0"
    parts = []
    for p in sorted(poles, reverse=True):
        parts.append(rf"\frac{{{operator_to_latex(poles[p])}}}{{(z-w)^{{{p}}}}}")
    return " + ".join(parts)


def poles_to_json(poles: Mapping[int, OperatorSum]) -> Dict[str, list]:
    return {str(p): operator_to_json(poles[p]) for p in sorted(poles)}
