"""Command-line front end: ``largen-voa <subcommand> ...``.

Exit codes: 0 success, 1 a checked property fails, 2 usage or input error,
3 the computation was refused (truncation or size guard).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Callable, List, Optional, Sequence

from .algebra import AlgebraSpecError, CyclicAlgebraSpec, load_model, pairing_inverse
from .brst import BRST, RefusalError, cohomology_dimensions, q_squared_check
from .cyclic import classical_limit_compare, cyclic_basis, hochschild_b
from .diagrams import ShapeError, compose, count_diagrams, format_word, parse_diagram, word
from .n4 import GENERATOR_NAMES, verify_n4
from .ope import ContractionError, OPEResult, grading_check, mode_product, planar_singular_ope, singular_ope
from .operators import OperatorSum
from .parser import ParseError, parse_expression
from .render import operator_to_json, operator_to_latex, operator_to_text, poles_to_json, poles_to_latex, poles_to_text
from .scalars import ONE, specialize_N

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_REFUSED = 0, 1, 2, 3


class _Out:
    """Collects output lines so that run_command stays testable."""

    def __init__(self) -> None:
        self.lines: List[str] = []

    def __call__(self, text: str = "") -> None:
        self.lines.append(text)

    def json(self, data) -> None:
        self.lines.append(json.dumps(data, sort_keys=True, ensure_ascii=False, indent=2))


def _specializer(args) -> Callable[[OperatorSum], OperatorSum]:
    if args.n is None:
        return lambda x: x
    n = Fraction(args.n)
    return lambda x: x.map_coefficients(lambda c: specialize_N(c, n))


def _emit_operator(out: _Out, x: OperatorSum, fmt: str) -> None:
    if fmt == "json":
        out.json(operator_to_json(x))
    elif fmt == "latex":
        out(operator_to_latex(x))
    else:
        out(operator_to_text(x))


def _emit_poles(out: _Out, res: OPEResult, fmt: str) -> None:
    if fmt == "json":
        out.json(poles_to_json(res.poles))
    elif fmt == "latex":
        out(poles_to_latex(res.poles))
    else:
        out(poles_to_text(res.poles))


def _single(m) -> OperatorSum:
    return OperatorSum({m: ONE})


def _parse(spec: CyclicAlgebraSpec, src: str) -> OperatorSum:
    return parse_expression(src, spec.field_map())


# ---------------------------------------------------------------------------
# subcommands


def _cmd_ope(args, spec, out: _Out) -> int:
    table, _, _ = pairing_inverse(spec)
    a, b = _parse(spec, args.a), _parse(spec, args.b)
    planar = args.planar or args.command == "planar-ope"
    res = (planar_singular_ope if planar else singular_ope)(a, b, table)
    _emit_poles(out, res.map(_specializer(args)), args.format)
    return EXIT_OK


def _cmd_mode(args, spec, out: _Out) -> int:
    table, _, _ = pairing_inverse(spec)
    x = mode_product(_parse(spec, args.a), args.mode, _parse(spec, args.b), table)
    _emit_operator(out, _specializer(args)(x), args.format)
    return EXIT_OK


def _cmd_brst(args, spec, out: _Out) -> int:
    brst = BRST(spec)
    x = brst.J if args.apply is None else brst.Q(_parse(spec, args.apply))
    _emit_operator(out, _specializer(args)(x), args.format)
    return EXIT_OK


def _cmd_q2(args, spec, out: _Out) -> int:
    rep = q_squared_check(spec, args.max_letters, args.max_deriv, time_budget=args.time_budget)
    if rep.holds and not rep.complete:
        if args.format == "json":
            out.json({"result": "INCOMPLETE", "checked": rep.checked, "total": rep.total})
        else:
            out(f"Q^2 = 0: INCOMPLETE ({rep.checked}/{rep.total} basis operators checked)")
        return EXIT_REFUSED
    if args.format == "json":
        data = {"result": "PASS" if rep.holds else "FAIL", "checked": rep.checked, "total": rep.total}
        if rep.witness is not None:
            m, val = rep.witness
            data["witness"] = {"input": operator_to_json(_single(m)),
                               "value": operator_to_json(val)}
            if not m:
                data["witness"]["ope"] = poles_to_json(rep.jj.poles)
        out.json(data)
        return EXIT_OK if rep.holds else EXIT_VIOLATION
    if rep.holds:
        out(f"Q^2 = 0: PASS ({rep.checked} basis operators, letters<={args.max_letters}, deriv<={args.max_deriv})")
        return EXIT_OK
    out("Q^2 = 0: FAIL")
    m, val = rep.witness
    if not m:
        out("witness: J(z)J(w) is singular")
        out(poles_to_text(rep.jj.poles) if args.format == "text" else poles_to_latex(rep.jj.poles))
    else:
        out(f"witness: Q(Q({operator_to_text(_single(m))})) = {operator_to_text(val)}")
    return EXIT_VIOLATION


def _cmd_cohomology(args, spec, out: _Out) -> int:
    n = None if args.n is None else Fraction(args.n)
    tab = cohomology_dimensions(spec, args.max_letters, args.max_deriv, n=n)
    rows = tab.rows()
    if args.format == "json":
        out.json({
            "n": None if n is None else str(n),
            "sectors": [{"h": str(h), "ghost": g, "size": s, "dim": d} for h, g, s, d in rows],
            "by_ghost": {str(g): d for g, d in tab.by_ghost().items()},
        })
    elif args.format == "latex":
        out(r"\begin{tabular}{rrrr}")
        out(r"$h$ & ghost & size & $\dim H$ \\ \hline")
        for h, g, s, d in rows:
            out(rf"${h}$ & ${g}$ & ${s}$ & ${d}$ \\")
        out(r"\end{tabular}")
    else:
        out(f"{'h':>5} {'ghost':>5} {'size':>6} {'dim':>5}")
        for h, g, s, d in rows:
            out(f"{str(h):>5} {g:>5} {s:>6} {d:>5}")
        out("by ghost: " + ", ".join(f"{g}: {d}" for g, d in tab.by_ghost().items()))
    return EXIT_OK


def _cmd_classical(args, spec, out: _Out) -> int:
    brst = BRST(spec)
    basis = cyclic_basis(spec, args.max_arity, args.max_t)
    bad = []
    for f in basis:
        if not classical_limit_compare(f, spec, brst):
            bad.append(f)
    bb_bad = 0
    for f in basis:
        if f.arity + 2 <= f.truncation.max_arity and not hochschild_b(hochschild_b(f, spec), spec).is_zero():
            bb_bad += 1
    status = "PASS" if not bad else "FAIL"
    if args.format == "json":
        out.json({"result": status, "checked": len(basis), "failures": [
            {"arity": f.arity, "entries": [[list(map(list, k)), str(v)] for k, v in sorted(f.entries.items())]}
            for f in bad
        ]})
    else:
        out(f"Q0 Phi_f = Phi_(bf): {status} ({len(basis) - len(bad)}/{len(basis)} cochains)")
        for f in bad[:5]:
            out(f"  counterexample: arity {f.arity}, entries {dict(sorted(f.entries.items()))}")
    return EXIT_OK if not bad and not bb_bad else EXIT_VIOLATION


def _cmd_grading(args, spec, out: _Out) -> int:
    table, _, _ = pairing_inverse(spec)
    rep = grading_check(_parse(spec, args.a), _parse(spec, args.b), table)
    if args.format == "json":
        out.json({"result": "PASS" if rep.ok else "FAIL", "checked": rep.checked,
                  "violations": [{"pole": v.pole, "exponent": list(v.exponent), "reason": v.reason}
                                 for v in rep.violations]})
    else:
        out(f"grading: {'PASS' if rep.ok else 'FAIL'} ({rep.checked} coefficients)")
        for v in rep.violations:
            out(f"  pole {v.pole}, d^{v.exponent[0]}/2 hbar^{v.exponent[1]} N^{v.exponent[2]}: {v.reason}")
    return EXIT_OK if rep.ok else EXIT_VIOLATION


def _cmd_n4(args, spec, out: _Out) -> int:
    rep = verify_n4(spec)
    closed = all(rep.brst_closed.values())
    if args.format == "json":
        out.json({
            "table": "PASS" if rep.ok else "FAIL",
            "brst_closed": rep.brst_closed,
            "mismatches": [{"pair": list(m.pair), "pole": m.pole, "expected": operator_to_json(m.expected),
                            "computed": operator_to_json(m.computed)} for m in rep.mismatches],
        })
    else:
        out(f"N=4 table: {'PASS' if rep.ok else 'FAIL'}")
        for m in rep.mismatches:
            out(f"  {m.pair[0]} x {m.pair[1]} pole {m.pole}: expected {operator_to_text(m.expected)}, "
                f"computed {operator_to_text(m.computed)}")
        out(f"Q-closed: {'PASS' if closed else 'FAIL'} ("
            + ", ".join(f"{g}={'0' if rep.brst_closed[g] else 'nonzero'}" for g in GENERATOR_NAMES) + ")")
    return EXIT_OK if rep.ok and closed else EXIT_VIOLATION


def _cmd_diagram(args, spec, out: _Out) -> int:
    if args.action == "count":
        out(str(count_diagrams(word(args.source), word(args.target))))
        return EXIT_OK
    w0, w1, w2 = (word(w) for w in args.words)
    first = parse_diagram(args.first, w0, w1)
    second = parse_diagram(args.second, w1, w2)
    res = compose(second, first)
    items = sorted(res.terms.items(), key=lambda kv: kv[0].edges)
    if args.format == "json":
        out.json([{"coeff": c.to_json(), "diagram": d.to_json()} for d, c in items])
    else:
        out(f"{format_word(w0)} -> {format_word(w2)}")
        for d, c in items:
            out(f"({c}) * {d.to_text()}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", default="eps2", help="builtin name (eps2, dual-numbers-deg2) or a JSON/TOML spec file")
    common.add_argument("--format", choices=("text", "json", "latex"), default="text")
    common.add_argument("--n", default=None, help="specialize N to this rational number")

    p = argparse.ArgumentParser(prog="largen-voa", description="Exact large-N vertex algebra calculator.")
    sub = p.add_subparsers(dest="command", required=True)

    for name in ("ope", "planar-ope"):
        s = sub.add_parser(name, parents=[common], help="singular OPE of two operators")
        s.add_argument("a")
        s.add_argument("b")
        s.add_argument("--planar", action="store_true", help="keep planar contractions only")
        s.set_defaults(run=_cmd_ope)

    s = sub.add_parser("mode", parents=[common], help="mode product A_(n) B")
    s.add_argument("a")
    s.add_argument("mode", type=int)
    s.add_argument("b")
    s.set_defaults(run=_cmd_mode)

    s = sub.add_parser("brst", parents=[common], help="print J, or Q applied to an operator")
    s.add_argument("--apply", default=None, metavar="EXPR")
    s.set_defaults(run=_cmd_brst)

    s = sub.add_parser("q2", parents=[common], help="check Q^2 = 0 on a truncated basis")
    s.add_argument("--max-letters", type=int, default=4)
    s.add_argument("--max-deriv", type=int, default=1)
    s.add_argument("--time-budget", type=float, default=None, help="seconds; exit 3 if the scan does not finish")
    s.set_defaults(run=_cmd_q2)

    s = sub.add_parser("cohomology", parents=[common], help="dim H per (weight, ghost) sector")
    s.add_argument("--max-letters", type=int, default=4)
    s.add_argument("--max-deriv", type=int, default=1)
    s.set_defaults(run=_cmd_cohomology)

    s = sub.add_parser("classical-compare", parents=[common], help="compare Q0 with the Hochschild differential")
    s.add_argument("--max-arity", type=int, default=3)
    s.add_argument("--max-t", type=int, default=2)
    s.set_defaults(run=_cmd_classical)

    s = sub.add_parser("grading-check", parents=[common], help="check the exponent constraints of an OPE")
    s.add_argument("a")
    s.add_argument("b")
    s.set_defaults(run=_cmd_grading)

    s = sub.add_parser("n4verify", parents=[common], help="verify the N=4 generator table")
    s.set_defaults(run=_cmd_n4)

    s = sub.add_parser("diagram", parents=[common], help="walled-Brauer diagram tools")
    dsub = s.add_subparsers(dest="action", required=True)
    c = dsub.add_parser("compose", parents=[common], help="compose SECOND after FIRST")
    c.add_argument("first", help='edges such as "t1-b1, t2-b2"')
    c.add_argument("second")
    c.add_argument("--words", nargs=3, required=True, metavar=("W0", "W1", "W2"),
                   help="FIRST: W0 -> W1, SECOND: W1 -> W2 (letters B/W)")
    c.set_defaults(run=_cmd_diagram)
    c = dsub.add_parser("count", parents=[common], help="number of diagrams between two words")
    c.add_argument("source")
    c.add_argument("target")
    c.set_defaults(run=_cmd_diagram)
    return p


def run_command(argv: Optional[Sequence[str]] = None) -> tuple[int, str]:
    """Run one command; return (exit code, rendered output)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return (EXIT_OK if e.code == 0 else EXIT_USAGE), ""
    out = _Out()
    try:
        spec = load_model(args.model)
        code = args.run(args, spec, out)
    except RefusalError as e:
        return EXIT_REFUSED, f"refused: {e}"
    except (ParseError, AlgebraSpecError, ShapeError, ContractionError, ValueError, ZeroDivisionError) as e:
        return EXIT_USAGE, f"error: {e}"
    return code, "\n".join(out.lines)


def main(argv: Optional[Sequence[str]] = None) -> int:
    code, text = run_command(argv)
    if text:
        stream = sys.stderr if code in (EXIT_USAGE, EXIT_REFUSED) and text.startswith(("error", "refused")) else sys.stdout
        print(text, file=stream)
    return code


if __name__ == "__main__":
    sys.exit(main())
