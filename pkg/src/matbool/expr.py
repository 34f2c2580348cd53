"""Matrix-valued Boolean expressions.

An ``Mvbe`` is a finite sum of terms ``coef * guard`` with complex-matrix
coefficients of one shape and BDD-backed Boolean guards from one store.
It denotes the function mapping an assignment to the sum of the
coefficients whose guards are satisfied (the empty sum is the zero
matrix).

Rewriting brings any expression to the reduced normal form: guards
pairwise contradictory, coefficients pairwise distinct. Reduced forms of
the same function agree up to term permutation, which is what the
equivalence check exploits.
"""
from __future__ import annotations

import itertools

import numpy as np

from . import linalg
from .bdd import BoolFn, Store
from .errors import DimensionError, StoreMismatchError
from .linalg import DEFAULT_EPS, as_matrix

try:
    from . import _core as _accel
except ImportError:
    _accel = None


class Mvbe:
    """Sum of (matrix coefficient, Boolean guard) terms of one shape."""

    __slots__ = ("store", "m", "k", "terms", "is_zero", "regular", "reduced")

    def __init__(self, store, m, k, terms, is_zero, regular=False, reduced=False):
        self.store = store
        self.m = m
        self.k = k
        self.terms = terms
        self.is_zero = is_zero
        self.regular = regular
        self.reduced = reduced

    # -- construction -------------------------------------------------

    @classmethod
    def make(cls, terms, store: Store, tol=DEFAULT_EPS) -> "Mvbe":
        """Build from (coef, guard) pairs, pruning zero coefs and guards."""
        if not terms:
            raise ValueError("an expression needs at least one term")
        pruned = []
        shape = None
        for coef, guard in terms:
            mat = as_matrix(coef)
            if shape is None:
                shape = mat.shape
            elif mat.shape != shape:
                raise DimensionError(
                    f"coefficient shapes differ: {shape} vs {mat.shape}"
                )
            if not isinstance(guard, BoolFn):
                raise TypeError("guards must be BoolFn handles")
            if guard.store is not store:
                raise StoreMismatchError("guard from a different store")
            if guard.is_false or linalg.is_zero(mat, tol):
                continue
            pruned.append((mat, guard))
        m, k = shape
        if not pruned:
            return cls.zero(m, k, store)
        return cls(store, m, k, pruned, is_zero=False)

    @classmethod
    def zero(cls, m, k, store: Store) -> "Mvbe":
        """The canonical zero expression: one term, zero matrix, guard 1."""
        term = (linalg.zeros(m, k), store.true)
        return cls(store, m, k, [term], is_zero=True, regular=True, reduced=True)

    @classmethod
    def constant(cls, coef, store: Store, tol=DEFAULT_EPS) -> "Mvbe":
        return cls.make([(coef, store.true)], store, tol)

    @property
    def shape(self):
        return (self.m, self.k)

    def term_count(self) -> int:
        return 0 if self.is_zero else len(self.terms)

    def support(self) -> list[int]:
        variables = set()
        for _, guard in self.terms:
            variables.update(guard.support())
        return sorted(variables, key=self.store.level_of)

    def _check_peer(self, other: "Mvbe"):
        if other.store is not self.store:
            raise StoreMismatchError("expressions from different stores")

    # -- semantics ----------------------------------------------------

    def evaluate(self, assignment: dict[int, int]) -> np.ndarray:
        """Sum of coefficients whose guards hold; assignment must cover
        the union of guard supports."""
        for var in self.support():
            if var not in assignment:
                raise KeyError(
                    f"assignment misses variable {self.store.name_of(var)}"
                )
        acc = np.zeros((self.m, self.k), dtype=complex)
        if self.is_zero:
            return acc
        mgr = self.store._mgr
        for coef, guard in self.terms:
            if mgr.evaluate(guard.node, assignment):
                acc += coef
        return acc

    # -- algebra ------------------------------------------------------

    def product(self, other: "Mvbe", tol=DEFAULT_EPS) -> "Mvbe":
        self._check_peer(other)
        if self.k != other.m and not (self.shape == (1, 1) or other.shape == (1, 1)):
            raise DimensionError(
                f"product: inner dimensions {self.shape} x {other.shape}"
            )
        if self.is_zero or other.is_zero:
            m = self.m if self.shape != (1, 1) else other.m
            k = other.k if other.shape != (1, 1) else self.k
            return Mvbe.zero(m, k, self.store)
        terms = []
        for (a, f), (b, g) in itertools.product(self.terms, other.terms):
            guard = f & g
            if guard.is_false:
                continue
            coef = linalg.mul(a, b)
            if linalg.is_zero(coef, tol):
                continue
            terms.append((coef, guard))
        if not terms:
            m = self.m if self.shape != (1, 1) else other.m
            k = other.k if other.shape != (1, 1) else self.k
            return Mvbe.zero(m, k, self.store)
        m, k = terms[0][0].shape
        return Mvbe(self.store, m, k, terms, is_zero=False)

    def add(self, other: "Mvbe", tol=DEFAULT_EPS) -> "Mvbe":
        self._check_peer(other)
        if self.shape != other.shape:
            raise DimensionError(f"add: shapes {self.shape} vs {other.shape}")
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        return Mvbe(self.store, self.m, self.k, self.terms + other.terms, False)

    def scale(self, c, tol=DEFAULT_EPS) -> "Mvbe":
        c = complex(c)
        if self.is_zero or abs(c) <= linalg._eps(tol):
            return Mvbe.zero(self.m, self.k, self.store)
        terms = [(linalg.scale(c, coef), guard) for coef, guard in self.terms]
        return Mvbe(self.store, self.m, self.k, terms, False)

    def cofactor(self, var: int, bit: int) -> "Mvbe":
        if self.is_zero:
            return self
        terms = []
        for coef, guard in self.terms:
            g = guard.cofactor(var, bit)
            if not g.is_false:
                terms.append((coef, g))
        if not terms:
            return Mvbe.zero(self.m, self.k, self.store)
        return Mvbe(self.store, self.m, self.k, terms, False)

    def exists(self, variables) -> "Mvbe":
        """Existential quantification: the matrix sum of the two
        cofactors, folded one variable at a time (innermost first).

        Per term this is the multiset identity
        f|x=0 + f|x=1  =  (f|x=0 OR f|x=1) + (f|x=0 AND f|x=1):
        the AND carry keeps the coefficient counted twice where both
        branches hold, which plain Boolean quantification of the guard
        would lose.
        """
        if self.is_zero:
            return self
        level = self.store.level_of
        terms = self.terms
        for var in sorted(variables, key=lambda v: -level(v)):
            next_terms = []
            for coef, guard in terms:
                g0 = guard.cofactor(var, 0)
                g1 = guard.cofactor(var, 1)
                union = g0 | g1
                if not union.is_false:
                    next_terms.append((coef, union))
                carry = g0 & g1
                if not carry.is_false:
                    next_terms.append((coef, carry))
            terms = next_terms
            if not terms:
                return Mvbe.zero(self.m, self.k, self.store)
        return Mvbe(self.store, self.m, self.k, terms, False)

    def rename(self, mapping: dict[int, int]) -> "Mvbe":
        if self.is_zero:
            return self
        terms = [(coef, guard.rename(mapping)) for coef, guard in self.terms]
        return Mvbe(self.store, self.m, self.k, terms, False,
                    self.regular, self.reduced)

    def shannon(self, var: int) -> "Mvbe":
        """Expansion  ~x * f|x=0  +  x * f|x=1  (equivalent to f)."""
        x = self.store.var(var)
        lo = self.cofactor(var, 0)
        hi = self.cofactor(var, 1)
        terms = []
        if not lo.is_zero:
            for coef, guard in lo.terms:
                g = ~x & guard
                if not g.is_false:
                    terms.append((coef, g))
        if not hi.is_zero:
            for coef, guard in hi.terms:
                g = x & guard
                if not g.is_false:
                    terms.append((coef, g))
        if not terms:
            return Mvbe.zero(self.m, self.k, self.store)
        return Mvbe(self.store, self.m, self.k, terms, False)

    # -- rewriting ------------------------------------------------------

    def regularise(self, tol=DEFAULT_EPS) -> "Mvbe":
        """Make guards pairwise contradictory without changing the function.

        Terms are folded in reverse order: each term is split against the
        already-regular rest, summing coefficients on overlaps and keeping
        the disjoint leftovers.
        """
        if self.is_zero:
            return self
        eps = linalg._eps(tol)
        store = self.store
        regions: list[list] = []  # [coef, guard], invariantly disjoint
        union = store.false  # OR of every guard inserted so far
        for coef, guard in reversed(self.terms):
            if (guard & union).is_false:
                regions.append([coef, guard])
                union = union | guard
                continue
            new_regions = []
            leftover = guard
            for prev_coef, prev_guard in regions:
                both = prev_guard & guard
                if both.is_false:
                    new_regions.append([prev_coef, prev_guard])
                    continue
                only_prev = prev_guard & ~guard
                if not only_prev.is_false:
                    new_regions.append([prev_coef, only_prev])
                summed = linalg.add(prev_coef, coef)
                if not linalg.is_zero(summed, eps):
                    new_regions.append([summed, both])
                leftover = leftover & ~prev_guard
            if not leftover.is_false:
                new_regions.append([coef, leftover])
            regions = new_regions
            union = union | guard
        if not regions:
            return Mvbe.zero(self.m, self.k, store)
        terms = [(coef, guard) for coef, guard in regions]
        return Mvbe(store, self.m, self.k, terms, False, regular=True)

    def reduce(self, tol=DEFAULT_EPS) -> "Mvbe":
        """Merge terms with equal coefficients by or-ing their guards.

        Input must be regular; 'equal' means clustered under approx_eq
        with canonical_key candidates, merging transitively-connected
        ones.
        """
        if self.is_zero:
            return self
        if not self.regular:
            self._assert_regular(tol)
        labels = linalg.cluster([coef for coef, _ in self.terms], tol)
        merged: dict[int, list] = {}
        for label, (coef, guard) in zip(labels, self.terms):
            slot = merged.get(label)
            if slot is None:
                merged[label] = [coef, guard]
            else:
                slot[1] = slot[1] | guard
        terms = [(coef, guard) for coef, guard in merged.values()]
        out = Mvbe(self.store, self.m, self.k, terms, False,
                   regular=True, reduced=True)
        return _sort_terms(out)

    def _assert_regular(self, tol):
        eps = linalg._eps(tol)
        for coef, guard in self.terms:
            if linalg.is_zero(coef, eps) or guard.is_false:
                raise ValueError("expression is not regular (zero term)")
        for (_, f), (_, g) in itertools.combinations(self.terms, 2):
            if not (f & g).is_false:
                raise ValueError("expression is not regular (overlapping guards)")

    def to_reduced(self, tol=DEFAULT_EPS, strategy="auto") -> "Mvbe":
        """Reduced normal form of the expression.

        strategy 'fold' goes through regularise + reduce term by term;
        'auto' uses a Shannon-recursion normaliser that computes the same
        form (up to term order and float summation noise) and scales to
        much larger term counts.
        """
        if self.is_zero:
            return self
        if strategy == "fold":
            return self.regularise(tol).reduce(tol)
        eps = linalg._eps(tol)
        scalar = self.shape == (1, 1)
        mgr = self.store._mgr
        if (scalar and eps > 0 and _accel is not None
                and isinstance(mgr, _accel.Manager)):
            pairs = [(complex(coef[0, 0]), guard.node) for coef, guard in self.terms]
            out = _accel.normalize_scalars(mgr, pairs, eps)
            terms = [(as_matrix(c), BoolFn(self.store, node)) for c, node in out]
        else:
            terms = _normalize(self, eps)
        if not terms:
            return Mvbe.zero(self.m, self.k, self.store)
        out = Mvbe(self.store, self.m, self.k, terms, False,
                   regular=True, reduced=True)
        # safety net: representatives that drifted within eps of each other
        if len(out.terms) > 1:
            labels = linalg.cluster([c for c, _ in out.terms], tol)
            if len(set(labels)) != len(out.terms):
                out = out.reduce(tol)
        return _sort_terms(out)

    # -- equivalence ------------------------------------------------------

    def equiv(self, other: "Mvbe", tol=DEFAULT_EPS) -> bool:
        """Function equality, decided on reduced forms: equal term counts
        and a bijection pairing approx-equal coefficients with identical
        guards."""
        self._check_peer(other)
        if self.shape != other.shape:
            raise DimensionError(f"equiv: shapes {self.shape} vs {other.shape}")
        rf = self if self.reduced else self.to_reduced(tol)
        rg = other if other.reduced else other.to_reduced(tol)
        if rf.is_zero or rg.is_zero:
            return rf.is_zero and rg.is_zero
        if len(rf.terms) != len(rg.terms):
            return False
        eps = linalg._eps(tol)
        by_guard = {guard.node: coef for coef, guard in rg.terms}
        for coef, guard in rf.terms:
            peer = by_guard.get(guard.node)
            if peer is None or not linalg.approx_eq(coef, peer, eps):
                return False
        return True

    def __repr__(self):
        if self.is_zero:
            return f"Mvbe(zero {self.m}x{self.k})"
        return f"Mvbe({self.m}x{self.k}, {len(self.terms)} terms)"

    def render(self, digits=8) -> str:
        return render_mvbe(self, digits)


# -- normal-form recursion (python path) --------------------------------


class _ValuePool:
    """Interns coefficient matrices up to tolerance; id equality then
    stands for approximate value equality."""

    def __init__(self, eps):
        self.eps = eps
        self.values: list[np.ndarray] = []
        self._buckets: dict = {}
        self._sums: dict = {}

    def intern(self, mat) -> int | None:
        if linalg.is_zero(mat, self.eps):
            return None
        if len(self.values) <= 64:
            for vid, rep in enumerate(self.values):
                if rep.shape == mat.shape and linalg.approx_eq(rep, mat, self.eps):
                    return vid
        else:
            shape, cells = linalg.canonical_key(mat, self.eps)
            for delta in linalg._neighbour_deltas(len(cells)):
                probe = (shape, tuple(c + d for c, d in zip(cells, delta)))
                for vid in self._buckets.get(probe, ()):
                    if linalg.approx_eq(self.values[vid], mat, self.eps):
                        return vid
        vid = len(self.values)
        self.values.append(mat)
        self._buckets.setdefault(linalg.canonical_key(mat, self.eps), []).append(vid)
        return vid

    def sum(self, vids: tuple[int, ...]) -> int | None:
        if vids in self._sums:
            return self._sums[vids]
        acc = self.values[vids[0]].copy()
        for vid in vids[1:]:
            acc = acc + self.values[vid]
        out = self.intern(linalg._freeze(acc))
        self._sums[vids] = out
        return out


def _normalize(f: Mvbe, eps: float) -> list:
    """Reduced term list via Shannon recursion with memoisation."""
    mgr = f.store._mgr
    pool = _ValuePool(eps)
    pairs = []
    for coef, guard in f.terms:
        vid = pool.intern(coef)
        if vid is not None and guard.node != 0:
            pairs.append((vid, guard.node))
    memo: dict = {}

    def rec(items: tuple) -> tuple:
        if not items:
            return ()
        if all(node == 1 for _, node in items):
            total = pool.sum(tuple(sorted(vid for vid, _ in items)))
            return () if total is None else ((total, 1),)
        hit = memo.get(items)
        if hit is not None:
            return hit
        level = min(
            mgr.level(mgr.top_var(node)) for _, node in items if node >= 2
        )
        var = mgr.var_at_level(level)
        lo = []
        hi = []
        for vid, node in items:
            if node >= 2 and mgr.top_var(node) == var:
                l, h = mgr.low(node), mgr.high(node)
            else:
                l = h = node
            if l != 0:
                lo.append((vid, l))
            if h != 0:
                hi.append((vid, h))
        r0 = rec(tuple(sorted(lo)))
        r1 = rec(tuple(sorted(hi)))
        by_vid: dict[int, list] = {}
        for vid, g in r0:
            by_vid[vid] = [g, 0]
        for vid, g in r1:
            slot = by_vid.get(vid)
            if slot is None:
                by_vid[vid] = [0, g]
            else:
                slot[1] = g
        out = []
        for vid, (g0, g1) in by_vid.items():
            out.append((vid, g0 if g0 == g1 else mgr.mk(var, g0, g1)))
        result = tuple(sorted(out))
        memo[items] = result
        return result

    reduced = rec(tuple(sorted(pairs)))
    store = f.store
    return [(pool.values[vid], BoolFn(store, node)) for vid, node in reduced]


def _sort_terms(f: Mvbe) -> Mvbe:
    """Deterministic term order: by lexicographically smallest satisfying
    assignment of the guard over the variable order."""
    if f.is_zero or len(f.terms) <= 1:
        return f
    universe = f.support()

    def key(term):
        sat = term[1].sat_lex_smallest() or {}
        return tuple(sat.get(v, 0) for v in universe)

    f.terms.sort(key=key)
    return f


# -- text rendering ------------------------------------------------------


def format_complex(c: complex, digits=8) -> str:
    re, im = c.real, c.imag

    def fmt(x):
        s = f"{x:.{digits}g}"
        return "0" if s in ("-0", "-0.0") else s

    if abs(im) < 1e-12:
        return fmt(re)
    if abs(re) < 1e-12:
        return "i" if fmt(im) == "1" else ("-i" if fmt(im) == "-1" else fmt(im) + "i")
    sign = "+" if im >= 0 else "-"
    return f"({fmt(re)}{sign}{fmt(abs(im))}i)"


def _factor_guard(guard: BoolFn):
    """Pull literal and (x <-> y) / (x <-> ~y) factors out of a guard.

    Mirrors the way gate expressions are usually written by hand;
    whatever cannot be factored is rendered as a sum of cubes.
    """
    store = guard.store
    factors = []
    while not (guard.is_true or guard.is_false):
        supp = guard.support()
        progressed = False
        for v in supp:
            c0 = guard.cofactor(v, 0)
            c1 = guard.cofactor(v, 1)
            if c0.is_false:
                factors.append(("lit", v, 1))
                guard = c1
                progressed = True
                break
            if c1.is_false:
                factors.append(("lit", v, 0))
                guard = c0
                progressed = True
                break
        if progressed:
            continue
        for x, y in itertools.combinations(supp, 2):
            f00 = guard.cofactor(x, 0).cofactor(y, 0)
            f01 = guard.cofactor(x, 0).cofactor(y, 1)
            f10 = guard.cofactor(x, 1).cofactor(y, 0)
            f11 = guard.cofactor(x, 1).cofactor(y, 1)
            if f01.is_false and f10.is_false and not (f00.is_false and f11.is_false):
                factors.append(("iff", x, y))
                guard = store.var(y).ite(f11, f00)
                progressed = True
                break
            if f00.is_false and f11.is_false and not (f01.is_false and f10.is_false):
                factors.append(("xor", x, y))
                guard = store.var(y).ite(f01, f10)
                progressed = True
                break
        if not progressed:
            break
    return factors, guard


def _render_guard(guard: BoolFn) -> str:
    store = guard.store
    if guard.is_true:
        return "1"
    if guard.is_false:
        return "0"
    factors, rest = _factor_guard(guard)
    parts = []
    for kind, *args in factors:
        if kind == "lit":
            v, bit = args
            parts.append(store.name_of(v) if bit else "~" + store.name_of(v))
        elif kind == "iff":
            x, y = args
            parts.append(f"({store.name_of(x)} <-> {store.name_of(y)})")
        else:
            x, y = args
            parts.append(f"({store.name_of(x)} <-> ~{store.name_of(y)})")
    if not rest.is_true:
        cubes = []
        for cube in rest.iter_cubes():
            lits = [
                (store.name_of(v) if bit else "~" + store.name_of(v))
                for v, bit in sorted(cube.items(), key=lambda kv: store.level_of(kv[0]))
            ]
            cubes.append(" ".join(lits))
        sop = " + ".join(cubes)
        parts.append(f"({sop})" if (parts and len(cubes) > 1) else sop)
    return " ".join(parts)


def _render_coef(coef: np.ndarray, digits=8) -> str:
    if coef.shape == (1, 1):
        return format_complex(complex(coef[0, 0]), digits)
    rows = []
    for r in range(coef.shape[0]):
        rows.append(
            ", ".join(format_complex(complex(x), digits) for x in coef[r])
        )
    return "[" + "; ".join(rows) + "]"


def render_mvbe(f: Mvbe, digits=8) -> str:
    if f.is_zero:
        return "0"
    lines = [
        f"{_render_coef(coef, digits)} * {_render_guard(guard)}"
        for coef, guard in f.terms
    ]
    return "\n".join(lines)
