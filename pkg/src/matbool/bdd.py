"""Shared ROBDD store and Boolean function handles.

A ``Store`` owns a canonical node table under a fixed (but extensible)
variable order; ``BoolFn`` is a hashable handle into one store. Two
handles from the same store denote the same Boolean function exactly
when they are equal.

The node-level kernel lives in a backend module: ``matbool._core``
(compiled) when available, else ``matbool._pure``. Set
``MATBOOL_BACKEND=pure|compiled`` to force one.
"""
from __future__ import annotations

import os

from .errors import RenameError, StoreMismatchError

from . import _pure

_requested = os.environ.get("MATBOOL_BACKEND", "auto")
if _requested == "pure":
    _impl = _pure
elif _requested == "compiled":
    from . import _core as _impl  # ImportError here means the ext is missing
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = _pure

BACKEND = "compiled" if _impl is not _pure else "pure"

OPS = ("not", "and", "or", "xor", "iff")


def backend_module(name: str | None = None):
    """Return the backend module for `name` (None = import-time choice)."""
    if name is None:
        return _impl
    if name == "pure":
        return _pure
    if name == "compiled":
        from . import _core

        return _core
    raise ValueError(f"unknown backend {name!r}")


class Store:
    """A confined BDD node store; not safe for concurrent mutation."""

    def __init__(self, backend: str | None = None):
        self._mgr = backend_module(backend).Manager()
        self._names: list[str] = []
        self.true = BoolFn(self, self._mgr.TRUE)
        self.false = BoolFn(self, self._mgr.FALSE)

    # -- variables ----------------------------------------------------

    def new_var(self, name: str | None = None, level: int | None = None) -> int:
        var = self._mgr.new_var(level)
        self._names.append(name if name is not None else f"x{var}")
        return var

    @property
    def num_vars(self) -> int:
        return self._mgr.num_vars

    def name_of(self, var: int) -> str:
        return self._names[var]

    def level_of(self, var: int) -> int:
        return self._mgr.level(var)

    def var_at_level(self, level: int) -> int:
        return self._mgr.var_at_level(level)

    def node_count(self) -> int:
        return self._mgr.num_nodes()

    @property
    def backend(self) -> str:
        return "pure" if isinstance(self._mgr, _pure.Manager) else "compiled"

    # -- function constructors ----------------------------------------

    def var(self, var: int) -> BoolFn:
        if not 0 <= var < self._mgr.num_vars:
            raise KeyError(f"unknown variable {var}")
        return BoolFn(self, self._mgr.var_node(var))

    def constant(self, bit) -> BoolFn:
        return self.true if bit else self.false

    def cube(self, bindings: dict[int, int]) -> BoolFn:
        """Conjunction of literals; bindings maps var -> 0/1."""
        f = self.true
        for var, bit in bindings.items():
            lit = self.var(var)
            f = f & (lit if bit else ~lit)
        return f

    def apply(self, op: str, *args: BoolFn) -> BoolFn:
        """Pointwise connective; op in {'not','and','or','xor','iff'}."""
        for a in args:
            self._check(a)
        if op == "not":
            if len(args) != 1:
                raise ValueError("'not' takes exactly one argument")
            return ~args[0]
        if op in ("xor", "iff"):
            if len(args) != 2:
                raise ValueError(f"'{op}' takes exactly two arguments")
            a, b = args
            return a ^ b if op == "xor" else a.iff(b)
        if op in ("and", "or"):
            if len(args) < 2:
                raise ValueError(f"'{op}' takes at least two arguments")
            out = args[0]
            for b in args[1:]:
                out = (out & b) if op == "and" else (out | b)
            return out
        raise ValueError(f"unknown connective {op!r}")

    def _check(self, f: BoolFn) -> int:
        if f.store is not self:
            raise StoreMismatchError("BoolFn belongs to a different store")
        return f.node


class BoolFn:
    """Canonical handle to a Boolean function in one store."""

    __slots__ = ("store", "node")

    def __init__(self, store: Store, node: int):
        self.store = store
        self.node = node

    # -- identity ------------------------------------------------------

    def __eq__(self, other):
        return (
            isinstance(other, BoolFn)
            and self.store is other.store
            and self.node == other.node
        )

    def __hash__(self):
        return hash((id(self.store), self.node))

    def __bool__(self):
        raise TypeError("BoolFn truth value is ambiguous; compare to store.true")

    @property
    def is_true(self) -> bool:
        return self.node == 1

    @property
    def is_false(self) -> bool:
        return self.node == 0

    def _peer(self, other: BoolFn) -> int:
        if not isinstance(other, BoolFn):
            raise TypeError(f"expected BoolFn, got {type(other).__name__}")
        if other.store is not self.store:
            raise StoreMismatchError("BoolFn operands from different stores")
        return other.node

    def _wrap(self, node: int) -> BoolFn:
        return BoolFn(self.store, node)

    # -- connectives -----------------------------------------------------

    def __invert__(self):
        return self._wrap(self.store._mgr.neg(self.node))

    def __and__(self, other):
        return self._wrap(self.store._mgr.conj(self.node, self._peer(other)))

    def __or__(self, other):
        return self._wrap(self.store._mgr.disj(self.node, self._peer(other)))

    def __xor__(self, other):
        return self._wrap(self.store._mgr.xor(self.node, self._peer(other)))

    def iff(self, other):
        return self._wrap(self.store._mgr.iff(self.node, self._peer(other)))

    def ite(self, then, orelse):
        return self._wrap(
            self.store._mgr.ite(self.node, self._peer(then), self._peer(orelse))
        )

    # -- cofactor / quantification ----------------------------------------

    def cofactor(self, var: int, bit: int) -> BoolFn:
        return self._wrap(self.store._mgr.restrict(self.node, var, 1 if bit else 0))

    def exists(self, variables) -> BoolFn:
        return self._wrap(self.store._mgr.exists(self.node, list(variables)))

    def forall(self, variables) -> BoolFn:
        return self._wrap(self.store._mgr.forall(self.node, list(variables)))

    def rename(self, mapping: dict[int, int]) -> BoolFn:
        """Substitute variables.

        The map must be injective, its targets must stay out of the
        function's remaining support, and it must preserve the relative
        variable order on the support (which keeps the walk linear).
        """
        mapping = {s: t for s, t in mapping.items() if s != t}
        if not mapping:
            return self
        targets = list(mapping.values())
        if len(set(targets)) != len(targets):
            raise RenameError("rename map is not injective")
        supp = self.support()
        remaining = {mapping.get(v, v) for v in supp}
        if len(remaining) != len(supp):
            raise RenameError("rename target collides with remaining support")
        level = self.store._mgr.level
        mapped_levels = [level(mapping.get(v, v)) for v in supp]
        if any(a >= b for a, b in zip(mapped_levels, mapped_levels[1:])):
            raise RenameError("rename map is not order-compatible")
        return self._wrap(self.store._mgr.rename(self.node, list(mapping.items())))

    # -- inspection --------------------------------------------------------

    def support(self) -> list[int]:
        """Essential variables, sorted by level."""
        return self.store._mgr.support(self.node)

    def eval(self, assignment: dict[int, int]) -> int:
        for var in self.support():
            if var not in assignment:
                raise KeyError(
                    f"assignment misses variable {self.store.name_of(var)}"
                )
        return self.store._mgr.evaluate(self.node, assignment)

    def top_var(self) -> int:
        """Root variable id, or -1 for a constant."""
        return self.store._mgr.top_var(self.node)

    def cofactors_at(self, var: int) -> tuple[BoolFn, BoolFn]:
        """(low, high) children w.r.t. `var`; identity if var is not the root."""
        mgr = self.store._mgr
        if self.node >= 2 and mgr.top_var(self.node) == var:
            return self._wrap(mgr.low(self.node)), self._wrap(mgr.high(self.node))
        return self, self

    def sat_lex_smallest(self) -> dict[int, int] | None:
        """Level-lexicographically smallest satisfying assignment.

        Variables are taken in order, preferring 0; don't-care variables
        below the chosen path are left out. None for the zero function.
        """
        if self.node == 0:
            return None
        mgr = self.store._mgr
        out: dict[int, int] = {}
        node = self.node
        while node >= 2:
            var = mgr.top_var(node)
            low = mgr.low(node)
            if low != 0:
                out[var] = 0
                node = low
            else:
                out[var] = 1
                node = mgr.high(node)
        return out

    def iter_cubes(self):
        """Yield the disjoint path-cubes of the function as {var: bit} dicts."""
        mgr = self.store._mgr

        def walk(node, partial):
            if node == 0:
                return
            if node == 1:
                yield dict(partial)
                return
            var = mgr.top_var(node)
            partial[var] = 0
            yield from walk(mgr.low(node), partial)
            partial[var] = 1
            yield from walk(mgr.high(node), partial)
            del partial[var]

        yield from walk(self.node, {})

    def __repr__(self):
        if self.node == 0:
            return "BoolFn(0)"
        if self.node == 1:
            return "BoolFn(1)"
        return f"BoolFn(node={self.node}, top={self.store.name_of(self.top_var())})"
