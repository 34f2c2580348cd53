"""Independent dense-matrix simulator: brute-force ground truth.

Everything here works on explicit 2^n x 2^n arrays built by kron and
index permutation, sharing nothing with the symbolic path. Hard-capped
at 10 qubits (a 16 MiB operator); larger inputs are refused.
"""
from __future__ import annotations

import math

import numpy as np

from .circuit import CircuitIR
from .errors import CapExceededError

ORACLE_CAP = 10

_SQRT1_2 = 1.0 / math.sqrt(2.0)

_FIXED = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT1_2,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "T": np.array([[1, 0], [0, np.exp(1j * math.pi / 4)]], dtype=complex),
    "CNOT": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    "SWAP": np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
    ),
}


def gate_matrix(name: str, theta: float | None = None) -> np.ndarray:
    if name in _FIXED:
        return _FIXED[name].copy()
    if name == "RTHETA":
        c, s = 1j * math.cos(theta), math.sin(theta)
        return np.array([[c, s], [s, c]], dtype=complex)
    if name == "CCX":
        U = np.eye(8, dtype=complex)
        U[[6, 7], [6, 7]] = 0
        U[6, 7] = U[7, 6] = 1
        return U
    if name == "D":
        U = np.eye(8, dtype=complex)
        c, s = 1j * math.cos(theta), math.sin(theta)
        U[6, 6] = U[7, 7] = c
        U[6, 7] = U[7, 6] = s
        return U
    raise ValueError(f"unknown gate {name!r}")


def _embed(U: np.ndarray, targets: tuple[int, ...], n: int) -> np.ndarray:
    """Lift a gate on `targets` to the full register (MSB = qubit 0)."""
    k = len(targets)
    rest = [q for q in range(n) if q not in targets]
    full = np.kron(U, np.eye(1 << (n - k), dtype=complex))
    order = list(targets) + rest
    if order == list(range(n)):
        return full
    idx = np.zeros(1 << n, dtype=np.int64)
    for i in range(1 << n):
        j = 0
        for pos, q in enumerate(order):
            bit = (i >> (n - 1 - q)) & 1
            j |= bit << (n - 1 - pos)
        idx[i] = j
    return full[np.ix_(idx, idx)]


def dense_unitary(ir: CircuitIR) -> np.ndarray:
    if ir.n > ORACLE_CAP:
        raise CapExceededError(f"oracle capped at {ORACLE_CAP} qubits")
    U = np.eye(1 << ir.n, dtype=complex)
    for op in ir.ops:
        U = _embed(gate_matrix(op.name, op.theta), op.qubits, ir.n) @ U
    return U


def dense_state(ir: CircuitIR, bits) -> np.ndarray:
    if ir.n > ORACLE_CAP:
        raise CapExceededError(f"oracle capped at {ORACLE_CAP} qubits")
    if isinstance(bits, str):
        bits = [int(ch) for ch in bits]
    if len(bits) != ir.n:
        raise ValueError(f"expected {ir.n} input bits, got {len(bits)}")
    index = 0
    for b in bits:
        index = (index << 1) | (1 if b else 0)
    e = np.zeros(1 << ir.n, dtype=complex)
    e[index] = 1.0
    return dense_unitary(ir) @ e
