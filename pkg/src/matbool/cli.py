"""Command-line front end.

Commands::

    matbool check <a.qc> <b.qc>     exit 0 equivalent, 1 not, 3 inconclusive
    matbool sim <c.qc> --input 010  print the reduced output state
    matbool expr <c.qc>             print the reduced whole-circuit expression

Exit code 2 covers usage, parse and size errors. ``--json`` emits a
versioned machine-readable report (see schemas/report-v1.json).
"""
from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__, circuit, oracle, quantum
from .bdd import BACKEND
from .errors import MatboolError
from .expr import format_complex
from .linalg import DEFAULT_EPS
from .oracle import ORACLE_CAP

EXIT_EQUIVALENT = 0
EXIT_NOT_EQUIVALENT = 1
EXIT_ERROR = 2
EXIT_INCONCLUSIVE = 3


def _complex_json(c: complex) -> dict:
    return {"re": float(c.real), "im": float(c.imag)}


def _base_report(args, command: str) -> dict:
    return {
        "schema": "v1",
        "tool": "matbool",
        "version": __version__,
        "backend": BACKEND,
        "command": command,
        "tolerance": args.tolerance,
    }


def _emit(report: dict, as_json: bool, human_lines) -> None:
    if as_json:
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        for line in human_lines:
            print(line)


def _cross_check_verdict(ir1, ir2, verdict, tol) -> bool:
    U1 = oracle.dense_unitary(ir1)
    U2 = oracle.dense_unitary(ir2)
    dense_equal = bool(np.max(np.abs(U1 - U2)) <= max(tol, 1e-7))
    symbolic_equal = verdict.status == "equivalent"
    if verdict.status == "inconclusive":
        return True
    return dense_equal == symbolic_equal


def cmd_check(args) -> int:
    ir1 = circuit.parse_file(args.circuit_a)
    ir2 = circuit.parse_file(args.circuit_b)
    verdict = circuit.check_equivalence(ir1, ir2, tol=args.tolerance,
                                        lazy=args.lazy_quantify)
    report = _base_report(args, "check")
    report.update({
        "circuit_a": args.circuit_a,
        "circuit_b": args.circuit_b,
        "verdict": verdict.status,
        "term_counts": list(verdict.term_counts),
        "times_ms": verdict.times_ms,
        "wall_ms": verdict.times_ms.get("total", 0.0),
    })
    lines = [f"verdict: {verdict.status}",
             f"reduced terms: {verdict.term_counts[0]} vs {verdict.term_counts[1]}"]
    if verdict.witness is not None:
        w = verdict.witness
        report["witness"] = {
            "input": w.input_bits,
            "output": w.output_bits,
            "value_a": _complex_json(w.value_a),
            "value_b": _complex_json(w.value_b),
        }
        lines.append(
            f"witness: input {w.input_bits} output {w.output_bits}: "
            f"{format_complex(w.value_a)} vs {format_complex(w.value_b)}"
        )
    if args.cross_check:
        if max(ir1.n, ir2.n) <= ORACLE_CAP:
            agreed = _cross_check_verdict(ir1, ir2, verdict, args.tolerance)
            report["cross_check"] = "agreed" if agreed else "disagreed"
            lines.append(f"cross-check: {report['cross_check']}")
            if not agreed:
                _emit(report, args.json, lines)
                print("error: symbolic verdict disagrees with the dense oracle",
                      file=sys.stderr)
                return EXIT_ERROR
        else:
            report["cross_check"] = "skipped"
            lines.append("cross-check: skipped (register too large)")
    report["node_count"] = None
    _emit(report, args.json, lines)
    if verdict.status == "equivalent":
        return EXIT_EQUIVALENT
    if verdict.status == "inconclusive":
        return EXIT_INCONCLUSIVE
    return EXIT_NOT_EQUIVALENT


def cmd_sim(args) -> int:
    ir = circuit.parse_file(args.circuit)
    start = time.perf_counter()
    state = circuit.simulate(ir, args.input, tol=args.tolerance)
    wall = (time.perf_counter() - start) * 1e3
    rendered = state.render()
    report = _base_report(args, "sim")
    report.update({
        "circuit": args.circuit,
        "input": args.input,
        "state": rendered.splitlines(),
        "term_count": state.expr.term_count(),
        "node_count": state.register.store.node_count(),
        "wall_ms": wall,
    })
    lines = [rendered, f"terms: {state.expr.term_count()}"]
    if args.amplitudes:
        if ir.n > ORACLE_CAP:
            raise MatboolError(
                f"--amplitudes is limited to {ORACLE_CAP} qubits"
            )
        amps = state.amplitudes()
        report["amplitudes"] = [_complex_json(a) for a in amps]
        lines.append("amplitudes:")
        for index, amp in enumerate(amps):
            lines.append(f"  |{index:0{ir.n}b}>  {format_complex(amp)}")
    if args.cross_check:
        if ir.n <= ORACLE_CAP:
            expected = oracle.dense_state(ir, args.input)
            agreed = bool(
                np.max(np.abs(state.amplitudes() - expected))
                <= max(args.tolerance, 1e-7)
            )
            report["cross_check"] = "agreed" if agreed else "disagreed"
            lines.append(f"cross-check: {report['cross_check']}")
            if not agreed:
                _emit(report, args.json, lines)
                print("error: symbolic state disagrees with the dense oracle",
                      file=sys.stderr)
                return EXIT_ERROR
        else:
            report["cross_check"] = "skipped"
            lines.append("cross-check: skipped (register too large)")
    _emit(report, args.json, lines)
    return 0


def cmd_expr(args) -> int:
    ir = circuit.parse_file(args.circuit)
    start = time.perf_counter()
    gate = circuit.elaborate_unitary(ir, tol=args.tolerance,
                                     lazy=args.lazy_quantify)
    wall = (time.perf_counter() - start) * 1e3
    rendered = gate.render()
    report = _base_report(args, "expr")
    report.update({
        "circuit": args.circuit,
        "expression": rendered.splitlines(),
        "term_count": gate.expr.term_count(),
        "node_count": gate.register.store.node_count(),
        "wall_ms": wall,
    })
    lines = [rendered, f"terms: {gate.expr.term_count()}"]
    if args.cross_check:
        if ir.n <= ORACLE_CAP:
            dense = quantum.eval_full(gate)
            expected = oracle.dense_unitary(ir)
            agreed = bool(
                np.max(np.abs(dense - expected)) <= max(args.tolerance, 1e-7)
            )
            report["cross_check"] = "agreed" if agreed else "disagreed"
            lines.append(f"cross-check: {report['cross_check']}")
            if not agreed:
                _emit(report, args.json, lines)
                print("error: symbolic unitary disagrees with the dense oracle",
                      file=sys.stderr)
                return EXIT_ERROR
        else:
            report["cross_check"] = "skipped"
            lines.append("cross-check: skipped (register too large)")
    _emit(report, args.json, lines)
    return 0


def _add_common(sub) -> None:
    sub.add_argument("--tolerance", type=float, default=DEFAULT_EPS,
                     help="coefficient tolerance (default 1e-9)")
    sub.add_argument("--json", action="store_true",
                     help="machine-readable report on stdout")
    sub.add_argument("--cross-check", action="store_true",
                     help="verify against the dense oracle (<= 10 qubits)")
    sub.add_argument("--lazy-quantify", action="store_true",
                     help="defer intermediate-tier quantification to one pass")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matbool",
        description="symbolic quantum circuit equivalence checker",
    )
    parser.add_argument("--version", action="version",
                        version=f"matbool {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p_check = subs.add_parser("check", help="compare two circuits")
    p_check.add_argument("circuit_a")
    p_check.add_argument("circuit_b")
    _add_common(p_check)
    p_check.set_defaults(func=cmd_check)

    p_sim = subs.add_parser("sim", help="simulate a circuit on a basis input")
    p_sim.add_argument("circuit")
    p_sim.add_argument("--input", required=True,
                       help="basis input bits, e.g. 010")
    p_sim.add_argument("--amplitudes", action="store_true",
                       help="also print the dense amplitude vector")
    _add_common(p_sim)
    p_sim.set_defaults(func=cmd_sim)

    p_expr = subs.add_parser("expr", help="print the whole-circuit expression")
    p_expr.add_argument("circuit")
    _add_common(p_expr)
    p_expr.set_defaults(func=cmd_expr)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except (MatboolError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
