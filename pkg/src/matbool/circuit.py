"""Circuit text format, IR, elaboration and equivalence checking.

Grammar (line oriented, ``#`` comments, 0-based qubit indices)::

    qubits <n>
    H|X|Y|Z|S|T <q>
    RTHETA(<theta>) <q>
    CNOT <q> <q>
    SWAP <q> <q>
    CCX <q> <q> <q>
    D(<theta>) <q> <q> <q>

Angles are decimal literals or the exact tokens ``pi``, ``pi/2``,
``pi/4``.
"""
from __future__ import annotations

import math
import re
import time
from dataclasses import dataclass, field

from . import quantum
from .errors import CapExceededError, ParseError, WiringError
from .expr import Mvbe
from .linalg import DEFAULT_EPS
from .quantum import GateExpr, Register, StateExpr, WireMap

ELABORATE_CAP = 24

# gate name -> (qubit arity, takes an angle)
GATE_SIGNATURES = {
    "H": (1, False),
    "X": (1, False),
    "Y": (1, False),
    "Z": (1, False),
    "S": (1, False),
    "T": (1, False),
    "RTHETA": (1, True),
    "CNOT": (2, False),
    "SWAP": (2, False),
    "CCX": (3, False),
    "D": (3, True),
}

_ANGLE_TOKENS = {"pi": math.pi, "pi/2": math.pi / 2, "pi/4": math.pi / 4}
_DECIMAL_RE = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")
_GATE_RE = re.compile(r"([A-Za-z]+)(?:\(([^)]*)\))?$")


@dataclass(frozen=True)
class GateApp:
    name: str
    theta: float | None
    qubits: tuple[int, ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class CircuitIR:
    n: int
    ops: tuple[GateApp, ...]


def _parse_angle(text: str, line: int, column: int) -> float:
    text = text.strip()
    if text in _ANGLE_TOKENS:
        return _ANGLE_TOKENS[text]
    if _DECIMAL_RE.match(text):
        value = float(text)
        if not math.isfinite(value):
            raise ParseError(f"angle {text!r} is not finite", line, column)
        return value
    raise ParseError(
        f"bad angle {text!r} (decimal literal or pi, pi/2, pi/4)", line, column
    )


def parse(text: str) -> CircuitIR:
    n = None
    ops = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        tokens = line.split()
        column = line.index(tokens[0]) + 1
        if n is None:
            if tokens[0] != "qubits":
                raise ParseError("expected 'qubits <n>' header", lineno, column)
            if len(tokens) != 2 or not tokens[1].isdigit() or int(tokens[1]) < 1:
                raise ParseError("qubit count must be a positive integer",
                                 lineno, column)
            n = int(tokens[1])
            continue
        if tokens[0] == "qubits":
            raise ParseError("duplicate 'qubits' header", lineno, column)
        match = _GATE_RE.match(tokens[0])
        if not match:
            raise ParseError(f"bad gate token {tokens[0]!r}", lineno, column)
        name = match.group(1).upper()
        if name not in GATE_SIGNATURES:
            raise ParseError(f"unknown gate {match.group(1)!r}", lineno, column)
        arity, takes_theta = GATE_SIGNATURES[name]
        theta = None
        if takes_theta:
            if match.group(2) is None:
                raise ParseError(f"{name} needs an angle, e.g. {name}(pi/2)",
                                 lineno, column)
            theta = _parse_angle(match.group(2), lineno,
                                 column + len(match.group(1)) + 1)
        elif match.group(2) is not None:
            raise ParseError(f"{name} takes no angle", lineno, column)
        args = tokens[1:]
        if len(args) != arity:
            raise ParseError(
                f"{name} expects {arity} qubit(s), got {len(args)}",
                lineno, column,
            )
        qubits = []
        for pos, tok in enumerate(args):
            col = line.index(tok, column) + 1
            if not tok.isdigit():
                raise ParseError(f"bad qubit index {tok!r}", lineno, col)
            q = int(tok)
            if q >= n:
                raise ParseError(
                    f"qubit index {q} out of range (register has {n})",
                    lineno, col,
                )
            qubits.append(q)
        if len(set(qubits)) != len(qubits):
            raise ParseError("repeated qubit in one gate application",
                             lineno, column)
        ops.append(GateApp(name, theta, tuple(qubits), lineno))
    if n is None:
        raise ParseError("empty circuit: missing 'qubits <n>' header", 1, 1)
    return CircuitIR(n, tuple(ops))


def parse_file(path) -> CircuitIR:
    with open(path, "r", encoding="utf-8") as handle:
        return parse(handle.read())


def render(ir: CircuitIR) -> str:
    lines = [f"qubits {ir.n}"]
    for op in ir.ops:
        head = op.name if op.theta is None else f"{op.name}({op.theta:.17g})"
        lines.append(head + " " + " ".join(str(q) for q in op.qubits))
    return "\n".join(lines) + "\n"


def _build_gate(op: GateApp, wire: WireMap) -> GateExpr:
    if op.name == "H":
        return quantum.h(wire, op.qubits[0])
    if op.name == "X":
        return quantum.x(wire, op.qubits[0])
    if op.name == "Y":
        return quantum.y(wire, op.qubits[0])
    if op.name == "Z":
        return quantum.z(wire, op.qubits[0])
    if op.name == "S":
        return quantum.s(wire, op.qubits[0])
    if op.name == "T":
        return quantum.t(wire, op.qubits[0])
    if op.name == "RTHETA":
        return quantum.rtheta(wire, op.theta, op.qubits[0])
    if op.name == "CNOT":
        return quantum.cnot(wire, op.qubits[0], op.qubits[1])
    if op.name == "SWAP":
        return quantum.swap(wire, op.qubits[0], op.qubits[1])
    if op.name == "CCX":
        return quantum.toffoli(wire, *op.qubits)
    if op.name == "D":
        return quantum.deutsch(wire, op.theta, *op.qubits)
    raise ValueError(f"unhandled gate {op.name}")


def elaborate_unitary(ir: CircuitIR, register: Register | None = None,
                      tol=DEFAULT_EPS, lazy: bool = False,
                      cap: int = ELABORATE_CAP) -> GateExpr:
    """Whole-circuit unitary relating register inputs to the canonical
    outputs; untouched qubits contribute (qi <-> qi') identity factors."""
    if ir.n > cap:
        raise CapExceededError(f"symbolic elaboration capped at {cap} qubits")
    if register is None:
        register = Register(ir.n)
    elif register.n != ir.n:
        raise WiringError("register size does not match the circuit")
    wire = register.wiremap()
    gates = [_build_gate(op, wire) for op in ir.ops]
    if not gates:
        return quantum.identity_gate(register)
    if lazy:
        acc = _lazy_conjoin(gates, register, wire, tol)
    else:
        acc = gates[0]
        for g in gates[1:]:
            acc = quantum.compose(acc, g, tol)
    return _finish(acc, register, tol)


def _lazy_conjoin(gates, register, wire, tol) -> GateExpr:
    """Deferred quantification: multiply every per-gate expression (order
    chosen greedily by smallest support union), then quantify all
    intermediate tiers in one pass."""
    pending = list(gates)
    supports = [set(g.expr.support()) for g in pending]
    touched = set()
    for g in pending:
        touched.update(g.in_var)
    acc_expr = pending.pop(0).expr
    acc_support = supports.pop(0)
    while pending:
        best = min(range(len(pending)),
                   key=lambda i: len(acc_support | supports[i]))
        acc_expr = acc_expr.product(pending.pop(best).expr, tol)
        acc_support |= supports.pop(best)
    final = {q: wire.current[q] for q in touched}
    inputs = set(register.in_vars)
    mids = sorted(
        v for v in acc_support
        if v not in inputs and v not in set(final.values())
    )
    expr = acc_expr.exists(mids)
    in_full = {q: register.in_vars[q] for q in touched}
    return GateExpr(expr, register, in_full, final, [])


def _finish(acc: GateExpr, register: Register, tol) -> GateExpr:
    """Rename final tiers to the canonical outputs and materialise
    identity factors for untouched qubits."""
    store = register.store
    mapping = {acc.out_var[q]: register.out_vars[q] for q in acc.explicit}
    expr = acc.expr.rename(mapping)
    untouched = [q for q in range(register.n) if q not in acc.in_var]
    if untouched:
        guard = store.true
        for q in untouched:
            guard = guard & store.var(register.in_vars[q]).iff(
                store.var(register.out_vars[q])
            )
        expr = expr.product(Mvbe.make([(1.0, guard)], store), tol)
    expr = expr.to_reduced(tol)
    in_var = {q: register.in_vars[q] for q in range(register.n)}
    out_var = {q: register.out_vars[q] for q in range(register.n)}
    return GateExpr(expr, register, in_var, out_var, [])


def simulate(ir: CircuitIR, initial, tol=DEFAULT_EPS) -> StateExpr:
    """Run the circuit on a basis string or prepared state."""
    if isinstance(initial, StateExpr):
        state = initial
        if len(state.qubits) != ir.n:
            raise WiringError("input state size does not match the circuit")
        register = state.register
    else:
        bits = quantum._parse_bits(initial)
        if len(bits) != ir.n:
            raise WiringError(
                f"input has {len(bits)} bit(s), circuit has {ir.n} qubit(s)"
            )
        register = Register(ir.n)
        state = quantum.basis_state(register, bits)
    for op in ir.ops:
        gate = _build_gate(op, register.wiremap())
        state = quantum.apply(gate, state, tol)
    return state


@dataclass
class Witness:
    """A single (input, output) index where the two circuits disagree."""

    input_bits: str
    output_bits: str
    value_a: complex
    value_b: complex


@dataclass
class Verdict:
    status: str  # equivalent | not_equivalent | inconclusive
    term_counts: tuple[int, int]
    witness: Witness | None
    times_ms: dict[str, float]


def check_equivalence(ir1: CircuitIR, ir2: CircuitIR, tol=DEFAULT_EPS,
                      lazy: bool = False) -> Verdict:
    """Reduce both circuits to normal form over shared variables and
    match terms; inconclusive when the verdict flips between the working
    tolerance and 10x the tolerance (borderline coefficient spacing)."""
    if ir1.n != ir2.n:
        raise WiringError(
            f"qubit counts differ: {ir1.n} vs {ir2.n}"
        )
    times: dict[str, float] = {}
    start = time.perf_counter()
    register = Register(ir1.n)
    t0 = time.perf_counter()
    g1 = elaborate_unitary(ir1, register, tol, lazy)
    times["elaborate_a"] = (time.perf_counter() - t0) * 1e3
    t0 = time.perf_counter()
    g2 = elaborate_unitary(ir2, register, tol, lazy)
    times["elaborate_b"] = (time.perf_counter() - t0) * 1e3
    t0 = time.perf_counter()
    counts = (g1.expr.term_count(), g2.expr.term_count())
    if g1.expr.equiv(g2.expr, tol):
        times["compare"] = (time.perf_counter() - t0) * 1e3
        times["total"] = (time.perf_counter() - start) * 1e3
        return Verdict("equivalent", counts, None, times)
    loose = 10 * tol
    if g1.expr.to_reduced(loose).equiv(g2.expr.to_reduced(loose), loose):
        times["compare"] = (time.perf_counter() - t0) * 1e3
        times["total"] = (time.perf_counter() - start) * 1e3
        return Verdict("inconclusive", counts, None, times)
    witness = _distinguish(g1, g2, register, tol)
    times["compare"] = (time.perf_counter() - t0) * 1e3
    times["total"] = (time.perf_counter() - start) * 1e3
    return Verdict("not_equivalent", counts, witness, times)


def _distinguish(g1: GateExpr, g2: GateExpr, register: Register,
                 tol) -> Witness | None:
    """Lexicographically smallest assignment in the region where the two
    reduced forms evaluate differently."""
    from . import linalg

    store = register.store
    eps = linalg._eps(tol)
    terms1 = [] if g1.expr.is_zero else g1.expr.terms
    terms2 = [] if g2.expr.is_zero else g2.expr.terms
    union1 = store.false
    for _, guard in terms1:
        union1 = union1 | guard
    union2 = store.false
    for _, guard in terms2:
        union2 = union2 | guard
    diff = (union1 & ~union2) | (~union1 & union2)
    for coef1, f in terms1:
        for coef2, g in terms2:
            if not linalg.approx_eq(coef1, coef2, eps):
                diff = diff | (f & g)
    sat = diff.sat_lex_smallest()
    if sat is None:
        return None
    assignment = dict(sat)
    for q in range(register.n):
        assignment.setdefault(register.in_vars[q], 0)
        assignment.setdefault(register.out_vars[q], 0)
    input_bits = "".join(
        str(assignment[register.in_vars[q]]) for q in range(register.n)
    )
    output_bits = "".join(
        str(assignment[register.out_vars[q]]) for q in range(register.n)
    )
    value_a = complex(g1.expr.evaluate(assignment)[0, 0])
    value_b = complex(g2.expr.evaluate(assignment)[0, 0])
    return Witness(input_bits, output_bits, value_a, value_b)
