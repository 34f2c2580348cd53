"""matbool: symbolic quantum circuit equivalence checking.

States and gates are encoded as matrix-valued Boolean expressions whose
guards live in a shared ROBDD store; circuits are simulated and compared
by rewriting to a reduced normal form, cross-checked against a dense
oracle at small scale.
"""
from .bdd import BACKEND, BoolFn, Store
from .circuit import (CircuitIR, GateApp, Verdict, Witness, check_equivalence,
                      elaborate_unitary, parse, parse_file, render, simulate)
from .errors import (CapExceededError, DimensionError, MatboolError,
                     ParseError, RenameError, StoreMismatchError, WiringError)
from .expr import Mvbe
from .linalg import Tolerance
from .quantum import (GateExpr, Register, StateExpr, WireMap, amplitudes_of,
                      apply, basis_state, compose, controlled, eval_full,
                      gate_from_matrix, group_gate, group_state,
                      identity_gate, state_from_amplitudes, tensor,
                      ungroup_gate, ungroup_state, uniform_state)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BoolFn",
    "CapExceededError",
    "CircuitIR",
    "DimensionError",
    "GateApp",
    "GateExpr",
    "MatboolError",
    "Mvbe",
    "ParseError",
    "Register",
    "RenameError",
    "StateExpr",
    "Store",
    "StoreMismatchError",
    "Tolerance",
    "Verdict",
    "WireMap",
    "WiringError",
    "Witness",
    "amplitudes_of",
    "apply",
    "basis_state",
    "check_equivalence",
    "compose",
    "controlled",
    "elaborate_unitary",
    "eval_full",
    "gate_from_matrix",
    "group_gate",
    "group_state",
    "identity_gate",
    "parse",
    "parse_file",
    "render",
    "simulate",
    "state_from_amplitudes",
    "tensor",
    "ungroup_gate",
    "ungroup_state",
    "uniform_state",
]
