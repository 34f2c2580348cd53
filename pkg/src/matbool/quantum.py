"""Quantum states and gates as matrix-valued Boolean expressions.

Each qubit owns a block of adjacent Boolean variables: its input
variable, the intermediate tier variables allocated per gate
application, and a canonical output variable. States are column-shaped
expressions over input variables; gates relate input tiers to output
tiers. Input variables carry the matrix column index and output
variables the row index, so applying a gate realises standard left
multiplication U|psi>.

Register-order indexing throughout: qubit 0 is the most significant bit
of any dense vector or matrix index.
"""
from __future__ import annotations

import math

import numpy as np

from . import linalg
from .bdd import BoolFn, Store
from .errors import CapExceededError, DimensionError, WiringError
from .expr import Mvbe
from .linalg import DEFAULT_EPS, as_matrix

EVAL_FULL_CAP = 12
STATE_ENUM_CAP = 16

_SQRT1_2 = 1.0 / math.sqrt(2.0)


class Register:
    """A named row of qubits plus the store variables wired to them."""

    def __init__(self, n: int, store: Store | None = None):
        if n < 1:
            raise ValueError("a register needs at least one qubit")
        self.n = n
        self.store = store if store is not None else Store()
        self.in_vars = []
        self.out_vars = []
        self._tail = []   # last tier variable per qubit (insertion anchor)
        self._tiers = []  # tiers allocated so far per qubit
        for i in range(n):
            iv = self.store.new_var(f"q{i + 1}")
            ov = self.store.new_var(f"q{i + 1}'")
            self.in_vars.append(iv)
            self.out_vars.append(ov)
            self._tail.append(iv)
            self._tiers.append(0)

    def fresh_tier_var(self, qubit: int) -> int:
        """Allocate the next tier variable for a qubit, kept adjacent to
        the previous one in the global order."""
        self._tiers[qubit] += 1
        level = self.store.level_of(self._tail[qubit]) + 1
        var = self.store.new_var(f"q{qubit + 1}@{self._tiers[qubit]}", level)
        self._tail[qubit] = var
        return var

    def qubit_name(self, qubit: int) -> str:
        return f"q{qubit + 1}"

    def wiremap(self) -> "WireMap":
        return WireMap(self)


class WireMap:
    """Per-pass cursor: which variable currently names each qubit's wire."""

    def __init__(self, register: Register):
        self.register = register
        self.current = list(register.in_vars)
        self.tier = [0] * register.n

    def input_var(self, qubit: int) -> int:
        return self.current[qubit]

    def advance(self, qubit: int) -> int:
        var = self.register.fresh_tier_var(qubit)
        self.current[qubit] = var
        self.tier[qubit] += 1
        return var


class StateExpr:
    """A pure state: column-shaped expression over qubit input variables.

    ``implicit`` qubits are folded into vector coefficients (ordered by
    register index); the rest are carried by the guards through
    ``qvars``.
    """

    def __init__(self, expr: Mvbe, register: Register,
                 qvars: dict[int, int], implicit: list[int]):
        self.expr = expr
        self.register = register
        self.qvars = dict(qvars)
        self.implicit = sorted(implicit)

    @property
    def explicit(self) -> list[int]:
        return sorted(self.qvars)

    @property
    def qubits(self) -> list[int]:
        return sorted(set(self.qvars) | set(self.implicit))

    def amplitudes(self) -> np.ndarray:
        return amplitudes_of(self)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes()))

    def equivalent_to(self, other: "StateExpr", tol=DEFAULT_EPS) -> bool:
        if self.register.store is not other.register.store:
            raise WiringError("states from different stores")
        if self.qubits != other.qubits or self.implicit != other.implicit:
            return False
        peer = other.expr
        if self.qvars != other.qvars:
            peer = peer.rename({other.qvars[q]: self.qvars[q] for q in other.qvars})
        return self.expr.equiv(peer, tol)

    def render(self, digits=8) -> str:
        return self.expr.render(digits)

    def __repr__(self):
        return f"StateExpr({len(self.qubits)} qubits, {self.expr.term_count()} terms)"


class GateExpr:
    """A unitary as an expression over input and output tier variables."""

    def __init__(self, expr: Mvbe, register: Register,
                 in_var: dict[int, int], out_var: dict[int, int],
                 implicit: list[int]):
        self.expr = expr
        self.register = register
        self.in_var = dict(in_var)
        self.out_var = dict(out_var)
        self.implicit = sorted(implicit)

    @property
    def explicit(self) -> list[int]:
        return sorted(self.in_var)

    @property
    def qubits(self) -> list[int]:
        return sorted(set(self.in_var) | set(self.implicit))

    def canonical(self) -> "GateExpr":
        """Rewire inputs to the register input variables and outputs to
        the canonical output variables."""
        reg = self.register
        mapping = {}
        in_var = {}
        out_var = {}
        for q in self.explicit:
            mapping[self.in_var[q]] = reg.in_vars[q]
            mapping[self.out_var[q]] = reg.out_vars[q]
            in_var[q] = reg.in_vars[q]
            out_var[q] = reg.out_vars[q]
        expr = self.expr.rename(mapping)
        return GateExpr(expr, reg, in_var, out_var, self.implicit)

    def equivalent_to(self, other: "GateExpr", tol=DEFAULT_EPS) -> bool:
        if self.register.store is not other.register.store:
            raise WiringError("gates from different stores")
        if self.qubits != other.qubits or self.implicit != other.implicit:
            return False
        return self.canonical().expr.equiv(other.canonical().expr, tol)

    def render(self, digits=8) -> str:
        return self.expr.render(digits)

    def __repr__(self):
        return f"GateExpr(qubits={self.qubits}, {self.expr.term_count()} terms)"


# -- states ----------------------------------------------------------------


def basis_state(register: Register, bits) -> StateExpr:
    """|b1 b2 ... bn> as a single conjunction-of-literals term."""
    bits = _parse_bits(bits)
    if len(bits) != register.n:
        raise WiringError(
            f"expected {register.n} bits, got {len(bits)}"
        )
    guard = register.store.cube(
        {register.in_vars[i]: b for i, b in enumerate(bits)}
    )
    expr = Mvbe.make([(1.0, guard)], register.store)
    return StateExpr(expr, register,
                     {i: register.in_vars[i] for i in range(register.n)}, [])


def state_from_amplitudes(register: Register, amplitudes,
                          tol=DEFAULT_EPS) -> StateExpr:
    amps = np.asarray(amplitudes, dtype=complex).ravel()
    if len(amps) != 1 << register.n:
        raise DimensionError(
            f"expected {1 << register.n} amplitudes, got {len(amps)}"
        )
    nrm = float(np.linalg.norm(amps))
    if abs(nrm - 1.0) > max(linalg._eps(tol), 1e-7):
        raise ValueError(f"state is not normalised (norm {nrm})")
    store = register.store
    terms = []
    for index, amp in enumerate(amps):
        if abs(amp) <= linalg._eps(tol):
            continue
        bits = _index_bits(index, register.n)
        guard = store.cube({register.in_vars[i]: b for i, b in enumerate(bits)})
        terms.append((amp, guard))
    if not terms:
        raise ValueError("state has no nonzero amplitude")
    expr = Mvbe.make(terms, store, tol).to_reduced(tol)
    return StateExpr(expr, register,
                     {i: register.in_vars[i] for i in range(register.n)}, [])


def uniform_state(register: Register) -> StateExpr:
    """Equal superposition over the register: one constant-guard term."""
    coef = 1.0 / math.sqrt(1 << register.n)
    expr = Mvbe.make([(coef, register.store.true)], register.store)
    expr.regular = expr.reduced = True
    return StateExpr(expr, register,
                     {i: register.in_vars[i] for i in range(register.n)}, [])


def amplitudes_of(state: StateExpr) -> np.ndarray:
    """Dense 2^n amplitude vector under register-order indexing."""
    qubits = state.qubits
    n = len(qubits)
    if n > STATE_ENUM_CAP:
        raise CapExceededError(f"amplitude enumeration capped at {STATE_ENUM_CAP}")
    explicit = state.explicit
    implicit = state.implicit
    out = np.zeros(1 << n, dtype=complex)
    mgr = state.register.store._mgr
    exp_positions = [qubits.index(q) for q in explicit]
    imp_positions = [qubits.index(q) for q in implicit]
    for combo in range(1 << len(explicit)):
        bits = _index_bits(combo, len(explicit))
        assignment = {state.qvars[q]: b for q, b in zip(explicit, bits)}
        val = np.zeros((state.expr.m, state.expr.k), dtype=complex)
        if not state.expr.is_zero:
            for coef, guard in state.expr.terms:
                if mgr.evaluate(guard.node, assignment):
                    val += coef
        base = 0
        for pos, b in zip(exp_positions, bits):
            base |= b << (n - 1 - pos)
        for row in range(val.shape[0]):
            index = base
            row_bits = _index_bits(row, len(implicit))
            for pos, b in zip(imp_positions, row_bits):
                index |= b << (n - 1 - pos)
            out[index] = val[row, 0]
    return out


def group_state(state: StateExpr, keep) -> StateExpr:
    """Fold every explicit qubit outside `keep` into vector coefficients."""
    keep = sorted(set(keep))
    explicit = set(state.explicit)
    if not set(keep) <= explicit:
        raise WiringError("keep set must be explicit qubits")
    moved = sorted(explicit - set(keep))
    if not moved:
        return state
    old_imp = state.implicit
    new_imp = sorted(old_imp + moved)
    old_dim = 1 << len(old_imp)
    new_dim = 1 << len(new_imp)
    store = state.register.store
    terms = []
    for coef, guard in ([] if state.expr.is_zero else state.expr.terms):
        for combo in range(1 << len(moved)):
            bits = _index_bits(combo, len(moved))
            g = guard
            for q, b in zip(moved, bits):
                g = g.cofactor(state.qvars[q], b)
            if g.is_false:
                continue
            vec = np.zeros((new_dim, 1), dtype=complex)
            for row in range(old_dim):
                entry = coef[row, 0]
                if entry == 0:
                    continue
                vec[_merge_index(row, old_imp, combo, moved, new_imp), 0] = entry
            terms.append((vec, g))
    qvars = {q: state.qvars[q] for q in keep}
    if not terms:
        expr = Mvbe.zero(new_dim, 1, store)
    else:
        expr = Mvbe.make(terms, store).to_reduced()
    return StateExpr(expr, state.register, qvars, new_imp)


def ungroup_state(state: StateExpr, tol=DEFAULT_EPS) -> StateExpr:
    """Expand all implicit qubits back into guard literals."""
    if not state.implicit:
        return state
    store = state.register.store
    reg = state.register
    imp = state.implicit
    terms = []
    for coef, guard in ([] if state.expr.is_zero else state.expr.terms):
        for row in range(coef.shape[0]):
            amp = coef[row, 0]
            if abs(amp) <= linalg._eps(tol):
                continue
            bits = _index_bits(row, len(imp))
            g = guard & store.cube({reg.in_vars[q]: b for q, b in zip(imp, bits)})
            if not g.is_false:
                terms.append((amp, g))
    qvars = dict(state.qvars)
    qvars.update({q: reg.in_vars[q] for q in imp})
    if not terms:
        expr = Mvbe.zero(1, 1, store)
    else:
        expr = Mvbe.make(terms, store, tol).to_reduced(tol)
    return StateExpr(expr, reg, qvars, [])


# -- gates -------------------------------------------------------------------


def gate_from_matrix(wire: WireMap, matrix, qubits, tol=DEFAULT_EPS) -> GateExpr:
    """Encode a unitary: input variables select the column, output
    variables the row."""
    U = as_matrix(matrix)
    qubits = list(qubits)
    n = len(qubits)
    if U.shape != (1 << n, 1 << n):
        raise DimensionError(
            f"matrix shape {U.shape} does not fit {n} qubit(s)"
        )
    if len(set(qubits)) != n:
        raise WiringError("duplicate qubit in gate application")
    if not linalg.is_unitary(U, max(linalg._eps(tol), 1e-7)):
        raise ValueError("gate matrix is not unitary")
    store = wire.register.store
    in_var = {q: wire.input_var(q) for q in qubits}
    out_var = {q: wire.advance(q) for q in qubits}
    terms = []
    for row in range(1 << n):
        for col in range(1 << n):
            entry = U[row, col]
            if abs(entry) <= linalg._eps(tol):
                continue
            bindings = {}
            for q, b in zip(qubits, _index_bits(col, n)):
                bindings[in_var[q]] = b
            for q, b in zip(qubits, _index_bits(row, n)):
                bindings[out_var[q]] = b
            terms.append((entry, store.cube(bindings)))
    expr = Mvbe.make(terms, store, tol).to_reduced(tol)
    return GateExpr(expr, wire.register, in_var, out_var, [])


def _one_qubit(wire: WireMap, qubit: int):
    store = wire.register.store
    iv = wire.input_var(qubit)
    ov = wire.advance(qubit)
    return store, iv, ov, store.var(iv), store.var(ov)


def h(wire: WireMap, qubit: int) -> GateExpr:
    """Hadamard, in its two-branch logical form."""
    store, iv, ov, x, xp = _one_qubit(wire, qubit)
    expr = Mvbe.make(
        [(_SQRT1_2, ~x | ~xp), (-_SQRT1_2, x & xp)], store
    )
    expr.regular = expr.reduced = True
    return GateExpr(expr, wire.register, {qubit: iv}, {qubit: ov}, [])


def x(wire: WireMap, qubit: int) -> GateExpr:
    return gate_from_matrix(wire, [[0, 1], [1, 0]], [qubit])


def y(wire: WireMap, qubit: int) -> GateExpr:
    return gate_from_matrix(wire, [[0, -1j], [1j, 0]], [qubit])


def z(wire: WireMap, qubit: int) -> GateExpr:
    return gate_from_matrix(wire, [[1, 0], [0, -1]], [qubit])


def s(wire: WireMap, qubit: int) -> GateExpr:
    return gate_from_matrix(wire, [[1, 0], [0, 1j]], [qubit])


def t(wire: WireMap, qubit: int) -> GateExpr:
    return gate_from_matrix(wire, [[1, 0], [0, np.exp(1j * math.pi / 4)]], [qubit])


def rtheta(wire: WireMap, theta: float, qubit: int) -> GateExpr:
    """Rotation [[i cos t, sin t], [sin t, i cos t]]."""
    c, sn = 1j * math.cos(theta), math.sin(theta)
    return gate_from_matrix(wire, [[c, sn], [sn, c]], [qubit])


def sqrt_not(wire: WireMap, qubit: int) -> GateExpr:
    """Square root of NOT: ((1+i)/2, (1-i)/2; (1-i)/2, (1+i)/2)."""
    p, m = (1 + 1j) / 2, (1 - 1j) / 2
    return gate_from_matrix(wire, [[p, m], [m, p]], [qubit])


def cnot(wire: WireMap, control: int, target: int) -> GateExpr:
    """Controlled NOT in its case-split logical form."""
    if control == target:
        raise WiringError("control and target must differ")
    store = wire.register.store
    c_in = wire.input_var(control)
    t_in = wire.input_var(target)
    c_out = wire.advance(control)
    t_out = wire.advance(target)
    c0, c1 = store.var(c_in), store.var(c_out)
    t0, t1 = store.var(t_in), store.var(t_out)
    hold = ~c0 & ~c1 & t0.iff(t1)
    flip = c0 & c1 & (t0 ^ t1)
    expr = Mvbe.make([(1.0, hold), (1.0, flip)], store).to_reduced()
    return GateExpr(expr, wire.register,
                    {control: c_in, target: t_in},
                    {control: c_out, target: t_out}, [])


def swap(wire: WireMap, a: int, b: int) -> GateExpr:
    """(qa <-> qb')(qb <-> qa') with unit coefficient."""
    if a == b:
        raise WiringError("swap needs two distinct qubits")
    store = wire.register.store
    a_in, b_in = wire.input_var(a), wire.input_var(b)
    a_out, b_out = wire.advance(a), wire.advance(b)
    guard = store.var(a_in).iff(store.var(b_out)) & store.var(b_in).iff(
        store.var(a_out)
    )
    expr = Mvbe.make([(1.0, guard)], store)
    expr.regular = expr.reduced = True
    return GateExpr(expr, wire.register,
                    {a: a_in, b: b_in}, {a: a_out, b: b_out}, [])


def toffoli(wire: WireMap, c1: int, c2: int, target: int) -> GateExpr:
    U = np.eye(8, dtype=complex)
    U[6, 6] = U[7, 7] = 0
    U[6, 7] = U[7, 6] = 1
    return gate_from_matrix(wire, U, [c1, c2, target])


def deutsch(wire: WireMap, theta: float, c1: int, c2: int,
            target: int, tol=DEFAULT_EPS) -> GateExpr:
    """Deutsch gate in its three-branch logical form; Toffoli at pi/2."""
    if len({c1, c2, target}) != 3:
        raise WiringError("Deutsch gate needs three distinct qubits")
    store = wire.register.store
    qubits = [c1, c2, target]
    in_var = {q: wire.input_var(q) for q in qubits}
    out_var = {q: wire.advance(q) for q in qubits}
    a0, a1 = store.var(in_var[c1]), store.var(out_var[c1])
    b0, b1 = store.var(in_var[c2]), store.var(out_var[c2])
    t0, t1 = store.var(in_var[target]), store.var(out_var[target])
    holds = a0.iff(a1) & b0.iff(b1)
    both = a0 & b0
    terms = [
        (1j * math.cos(theta), both & t0.iff(t1) & holds),
        (math.sin(theta), both & (t0 ^ t1) & holds),
        (1.0, (~a0 | ~b0) & t0.iff(t1) & holds),
    ]
    expr = Mvbe.make(terms, store, tol).to_reduced(tol)
    return GateExpr(expr, wire.register, in_var, out_var, [])


def controlled(wire: WireMap, controls, inner: GateExpr,
               tol=DEFAULT_EPS) -> GateExpr:
    """Apply `inner` only when every control qubit is set.

    Built as  [ (sum of ~ci) * identity(inner)  +  (prod ci) * inner ]
    * prod (ci <-> ci'),  the standard controlled-gate expression.
    """
    controls = list(controls)
    if not controls:
        return inner
    if set(controls) & set(inner.qubits):
        raise WiringError("controls overlap the controlled gate's qubits")
    if len(set(controls)) != len(controls):
        raise WiringError("duplicate control qubit")
    store = wire.register.store
    ctl_in = {q: wire.input_var(q) for q in controls}
    ctl_out = {q: wire.advance(q) for q in controls}
    ctl_hold = store.true
    all_on = store.true
    any_off = store.false
    for q in controls:
        ci = store.var(ctl_in[q])
        ctl_hold = ctl_hold & ci.iff(store.var(ctl_out[q]))
        all_on = all_on & ci
        any_off = any_off | ~ci
    inner_ident = store.true
    for q in inner.explicit:
        inner_ident = inner_ident & store.var(inner.in_var[q]).iff(
            store.var(inner.out_var[q])
        )
    dim = 1 << len(inner.implicit)
    terms = [(linalg.identity(dim), any_off & inner_ident & ctl_hold)]
    for coef, guard in inner.expr.terms:
        g = all_on & guard & ctl_hold
        if not g.is_false:
            terms.append((coef, g))
    expr = Mvbe.make(terms, store, tol).to_reduced(tol)
    in_var = dict(inner.in_var)
    in_var.update(ctl_in)
    out_var = dict(inner.out_var)
    out_var.update(ctl_out)
    return GateExpr(expr, wire.register, in_var, out_var, inner.implicit)


def identity_gate(register: Register) -> GateExpr:
    """The do-nothing circuit: prod (qi <-> qi') over the register."""
    store = register.store
    guard = store.true
    for i in range(register.n):
        guard = guard & store.var(register.in_vars[i]).iff(
            store.var(register.out_vars[i])
        )
    expr = Mvbe.make([(1.0, guard)], store)
    expr.regular = expr.reduced = True
    return GateExpr(expr, register,
                    {i: register.in_vars[i] for i in range(register.n)},
                    {i: register.out_vars[i] for i in range(register.n)}, [])


# -- combinators ---------------------------------------------------------------


def apply(gate: GateExpr, state: StateExpr, tol=DEFAULT_EPS) -> StateExpr:
    """U|psi>: product, quantify the consumed inputs, rename the outputs
    back to the state's variables."""
    if gate.register.store is not state.register.store:
        raise WiringError("gate and state from different stores")
    if gate.implicit and gate.implicit != state.implicit:
        raise WiringError(
            "gate and state implicit qubit sets must match (group the state first)"
        )
    for q in gate.explicit:
        if q not in state.qvars:
            raise WiringError(f"gate acts on {gate.register.qubit_name(q)} "
                              "which is not explicit in the state")
        if state.qvars[q] != gate.in_var[q]:
            raise WiringError(
                f"wiring mismatch on {gate.register.qubit_name(q)}: "
                "gate input tier differs from the state's variable"
            )
    product = gate.expr.product(state.expr, tol)
    quantified = product.exists([gate.in_var[q] for q in gate.explicit])
    renamed = quantified.rename(
        {gate.out_var[q]: state.qvars[q] for q in gate.explicit}
    )
    expr = renamed.to_reduced(tol)
    return StateExpr(expr, state.register, state.qvars, state.implicit)


def tensor(g1: GateExpr, g2: GateExpr, tol=DEFAULT_EPS) -> GateExpr:
    """Parallel execution on disjoint qubits: the expression product."""
    if g1.register.store is not g2.register.store:
        raise WiringError("gates from different stores")
    if not g2.qubits:
        return g1
    if not g1.qubits:
        return g2
    if set(g1.qubits) & set(g2.qubits):
        raise WiringError("tensor operands must act on disjoint qubits")
    implicit = sorted(g1.implicit + g2.implicit)
    if not g1.implicit and not g2.implicit:
        expr = g1.expr.product(g2.expr, tol)
        expr = expr.to_reduced(tol)
    else:
        terms = []
        for a, f in g1.expr.terms:
            for b, g in g2.expr.terms:
                guard = f & g
                if guard.is_false:
                    continue
                coef = _kron_register_order(a, g1.implicit, b, g2.implicit)
                if linalg.is_zero(coef, tol):
                    continue
                terms.append((coef, guard))
        store = g1.register.store
        dim = 1 << len(implicit)
        expr = (Mvbe.make(terms, store, tol).to_reduced(tol)
                if terms else Mvbe.zero(dim, dim, store))
    in_var = dict(g1.in_var)
    in_var.update(g2.in_var)
    out_var = dict(g1.out_var)
    out_var.update(g2.out_var)
    return GateExpr(expr, g1.register, in_var, out_var, implicit)


def compose(first: GateExpr, then: GateExpr, tol=DEFAULT_EPS) -> GateExpr:
    """Sequential composition (then after first): product then
    quantification of the intermediate tier."""
    if first.register.store is not then.register.store:
        raise WiringError("gates from different stores")
    shared = sorted(set(first.explicit) & set(then.explicit))
    if (set(first.implicit) & set(then.explicit)) or (
        set(then.implicit) & set(first.explicit)
    ):
        raise WiringError("a qubit is explicit on one side and grouped on the other")
    if first.implicit and then.implicit and first.implicit != then.implicit:
        raise WiringError("grouped compose needs equal implicit qubit sets")
    for q in shared:
        if then.in_var[q] != first.out_var[q]:
            raise WiringError(
                f"tier mismatch on {first.register.qubit_name(q)}: "
                "second gate's input is not the first gate's output"
            )
    mids = [first.out_var[q] for q in shared]
    product = then.expr.product(first.expr, tol)
    expr = product.exists(mids).to_reduced(tol)
    in_var = dict(first.in_var)
    for q in then.explicit:
        if q not in first.in_var:
            in_var[q] = then.in_var[q]
    out_var = dict(then.out_var)
    for q in first.explicit:
        if q not in then.out_var:
            out_var[q] = first.out_var[q]
    implicit = sorted(set(first.implicit) | set(then.implicit))
    return GateExpr(expr, first.register, in_var, out_var, implicit)


def group_gate(gate: GateExpr, keep) -> GateExpr:
    """Fold explicit qubits outside `keep` into matrix coefficients."""
    keep = sorted(set(keep))
    explicit = set(gate.explicit)
    if not set(keep) <= explicit:
        raise WiringError("keep set must be explicit qubits")
    moved = sorted(explicit - set(keep))
    if not moved:
        return gate
    old_imp = gate.implicit
    new_imp = sorted(old_imp + moved)
    old_dim = 1 << len(old_imp)
    new_dim = 1 << len(new_imp)
    store = gate.register.store
    terms = []
    for coef, guard in ([] if gate.expr.is_zero else gate.expr.terms):
        for out_combo in range(1 << len(moved)):
            out_bits = _index_bits(out_combo, len(moved))
            g_out = guard
            for q, b in zip(moved, out_bits):
                g_out = g_out.cofactor(gate.out_var[q], b)
            if g_out.is_false:
                continue
            for in_combo in range(1 << len(moved)):
                in_bits = _index_bits(in_combo, len(moved))
                g = g_out
                for q, b in zip(moved, in_bits):
                    g = g.cofactor(gate.in_var[q], b)
                if g.is_false:
                    continue
                W = np.zeros((new_dim, new_dim), dtype=complex)
                for r in range(old_dim):
                    for c in range(old_dim):
                        entry = coef[r, c]
                        if entry == 0:
                            continue
                        nr = _merge_index(r, old_imp, out_combo, moved, new_imp)
                        nc = _merge_index(c, old_imp, in_combo, moved, new_imp)
                        W[nr, nc] = entry
                terms.append((W, g))
    in_var = {q: gate.in_var[q] for q in keep}
    out_var = {q: gate.out_var[q] for q in keep}
    if not terms:
        expr = Mvbe.zero(new_dim, new_dim, store)
    else:
        expr = Mvbe.make(terms, store).to_reduced()
    return GateExpr(expr, gate.register, in_var, out_var, new_imp)


def ungroup_gate(gate: GateExpr, tol=DEFAULT_EPS) -> GateExpr:
    """Expand all implicit qubits back into input/output literals."""
    if not gate.implicit:
        return gate
    reg = gate.register
    store = reg.store
    imp = gate.implicit
    in_var = dict(gate.in_var)
    out_var = dict(gate.out_var)
    for q in imp:
        in_var[q] = reg.in_vars[q]
        out_var[q] = reg.fresh_tier_var(q)
    terms = []
    for coef, guard in ([] if gate.expr.is_zero else gate.expr.terms):
        for r in range(coef.shape[0]):
            for c in range(coef.shape[1]):
                entry = coef[r, c]
                if abs(entry) <= linalg._eps(tol):
                    continue
                bindings = {}
                for q, b in zip(imp, _index_bits(c, len(imp))):
                    bindings[in_var[q]] = b
                for q, b in zip(imp, _index_bits(r, len(imp))):
                    bindings[out_var[q]] = b
                g = guard & store.cube(bindings)
                if not g.is_false:
                    terms.append((entry, g))
    if not terms:
        expr = Mvbe.zero(1, 1, store)
    else:
        expr = Mvbe.make(terms, store, tol).to_reduced(tol)
    return GateExpr(expr, reg, in_var, out_var, [])


# -- dense reconstruction ---------------------------------------------------


def eval_full(obj) -> np.ndarray:
    """Dense matrix (gate) or column vector (state), register-order
    indexed; capped at EVAL_FULL_CAP qubits."""
    if isinstance(obj, StateExpr):
        if len(obj.qubits) > EVAL_FULL_CAP:
            raise CapExceededError(f"eval_full capped at {EVAL_FULL_CAP} qubits")
        return linalg._freeze(amplitudes_of(obj).reshape(-1, 1))
    if not isinstance(obj, GateExpr):
        raise TypeError("eval_full expects a GateExpr or StateExpr")
    gate = obj
    qubits = gate.qubits
    n = len(qubits)
    if n > EVAL_FULL_CAP:
        raise CapExceededError(f"eval_full capped at {EVAL_FULL_CAP} qubits")
    explicit = gate.explicit
    implicit = gate.implicit
    e = len(explicit)
    out = np.zeros((1 << n, 1 << n), dtype=complex)
    mgr = gate.register.store._mgr
    exp_positions = [qubits.index(q) for q in explicit]
    imp_positions = [qubits.index(q) for q in implicit]
    for out_combo in range(1 << e):
        out_bits = _index_bits(out_combo, e)
        for in_combo in range(1 << e):
            in_bits = _index_bits(in_combo, e)
            assignment = {}
            for q, b in zip(explicit, in_bits):
                assignment[gate.in_var[q]] = b
            for q, b in zip(explicit, out_bits):
                assignment[gate.out_var[q]] = b
            val = np.zeros((gate.expr.m, gate.expr.k), dtype=complex)
            if not gate.expr.is_zero:
                for coef, guard in gate.expr.terms:
                    if mgr.evaluate(guard.node, assignment):
                        val += coef
            row_base = 0
            col_base = 0
            for pos, b in zip(exp_positions, out_bits):
                row_base |= b << (n - 1 - pos)
            for pos, b in zip(exp_positions, in_bits):
                col_base |= b << (n - 1 - pos)
            for r in range(val.shape[0]):
                row = row_base
                for pos, b in zip(imp_positions, _index_bits(r, len(implicit))):
                    row |= b << (n - 1 - pos)
                for c in range(val.shape[1]):
                    col = col_base
                    for pos, b in zip(imp_positions,
                                      _index_bits(c, len(implicit))):
                        col |= b << (n - 1 - pos)
                    out[row, col] = val[r, c]
    return linalg._freeze(out)


# -- helpers -----------------------------------------------------------------


def _parse_bits(bits) -> list[int]:
    if isinstance(bits, str):
        if not all(ch in "01" for ch in bits):
            raise ValueError(f"bad basis string {bits!r}")
        return [int(ch) for ch in bits]
    out = []
    for b in bits:
        if b not in (0, 1):
            raise ValueError(f"bad basis bit {b!r}")
        out.append(int(b))
    return out


def _index_bits(index: int, n: int) -> list[int]:
    """MSB-first bit list of `index` over n positions."""
    return [(index >> (n - 1 - i)) & 1 for i in range(n)]


def _merge_index(old_index: int, old_qubits: list[int],
                 new_index: int, new_qubits: list[int],
                 merged: list[int]) -> int:
    """Combine two MSB-first sub-indices into one over `merged`
    (register-sorted union of the two qubit lists)."""
    bit_of = {}
    for q, b in zip(old_qubits, _index_bits(old_index, len(old_qubits))):
        bit_of[q] = b
    for q, b in zip(new_qubits, _index_bits(new_index, len(new_qubits))):
        bit_of[q] = b
    out = 0
    width = len(merged)
    for pos, q in enumerate(merged):
        out |= bit_of[q] << (width - 1 - pos)
    return out


def _kron_register_order(a: np.ndarray, a_qubits: list[int],
                         b: np.ndarray, b_qubits: list[int]) -> np.ndarray:
    """Kronecker product whose index bits are re-sorted to register order."""
    k = np.kron(a, b)
    if not a_qubits or not b_qubits:
        return linalg._freeze(k)
    concat = a_qubits + b_qubits
    merged = sorted(concat)
    if concat == merged:
        return linalg._freeze(k)
    width = len(concat)
    perm = np.zeros(1 << width, dtype=np.int64)
    for idx in range(1 << width):
        bits = _index_bits(idx, width)
        bit_of = dict(zip(concat, bits))
        tgt = 0
        for pos, q in enumerate(merged):
            tgt |= bit_of[q] << (width - 1 - pos)
        perm[tgt] = idx
    return linalg._freeze(k[np.ix_(perm, perm)])
