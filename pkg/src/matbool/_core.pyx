# distutils: language = c++
# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled ROBDD manager: same interface and semantics as ``_pure``.

Nodes live in flat C++ vectors with a lossless unique table
(unordered_map keyed by a packed var/low/high word) and a lossy
direct-mapped operation cache. Also hosts the scalar normal-form
recursion used by the expression layer, so the whole hot path stays out
of the interpreter.
"""
from cython.operator cimport dereference as deref, preincrement as inc
from libcpp.vector cimport vector
from libcpp.unordered_map cimport unordered_map
from libcpp.algorithm cimport sort as cpp_sort
from libc.stdint cimport int32_t, int64_t, uint32_t, uint64_t
from libc.math cimport llround, hypot

cdef int32_t MAX_NODES = (1 << 24) - 1
cdef int32_t MAX_VARS = (1 << 16) - 1
cdef int64_t TERMINAL_LEVEL = 1 << 60

cdef uint64_t CACHE_SIZE = 1 << 20
cdef uint64_t CACHE_MASK = CACHE_SIZE - 1

cdef enum:
    OP_AND = 1
    OP_OR = 2
    OP_XOR = 3
    OP_IFF = 4
    OP_ITE = 5
    OP_RESTRICT = 6
    OP_EXISTS1 = 7


cdef inline uint64_t _mix(uint64_t a, uint64_t b) nogil:
    cdef uint64_t x = a * <uint64_t>0x9E3779B97F4A7C15 + b
    x ^= x >> 29
    x *= <uint64_t>0xBF58476D1CE4E5B9
    x ^= x >> 32
    return x


cdef class Manager:
    cdef vector[int32_t] var_
    cdef vector[int32_t] low_
    cdef vector[int32_t] high_
    cdef unordered_map[uint64_t, int32_t] unique_
    cdef vector[int32_t] level_of_
    cdef vector[int32_t] order_
    cdef vector[int32_t] proj_
    cdef vector[uint64_t] ck1_
    cdef vector[int32_t] ck2_
    cdef vector[int32_t] cval_

    FALSE = 0
    TRUE = 1

    def __cinit__(self):
        self.var_.push_back(-1)
        self.var_.push_back(-1)
        self.low_.push_back(0)
        self.low_.push_back(1)
        self.high_.push_back(0)
        self.high_.push_back(1)
        self.ck1_.resize(CACHE_SIZE)
        self.ck2_.resize(CACHE_SIZE, -1)
        self.cval_.resize(CACHE_SIZE, -1)

    # -- cache helpers -------------------------------------------------

    cdef inline int32_t _cache_get(self, uint64_t k1, int32_t k2) nogil:
        cdef uint64_t idx = _mix(k1, <uint64_t><int64_t>k2) & CACHE_MASK
        if self.ck1_[idx] == k1 and self.ck2_[idx] == k2:
            return self.cval_[idx]
        return -1

    cdef inline void _cache_put(self, uint64_t k1, int32_t k2,
                                int32_t value) nogil:
        cdef uint64_t idx = _mix(k1, <uint64_t><int64_t>k2) & CACHE_MASK
        self.ck1_[idx] = k1
        self.ck2_[idx] = k2
        self.cval_[idx] = value

    cdef inline uint64_t _opkey(self, int op, int32_t a, int32_t b) nogil:
        return ((<uint64_t>op << 56)
                | (<uint64_t><uint32_t>a << 28)
                | <uint64_t><uint32_t>b)

    # -- variables -----------------------------------------------------

    def new_var(self, level=None):
        cdef int32_t var = <int32_t>self.level_of_.size()
        if var >= MAX_VARS:
            raise MemoryError("variable capacity exceeded")
        cdef int32_t lvl
        cdef size_t i
        if level is None or level == <int>self.order_.size():
            self.order_.push_back(var)
            self.level_of_.push_back(<int32_t>self.order_.size() - 1)
        else:
            lvl = <int32_t>level
            if lvl < 0 or lvl > <int32_t>self.order_.size():
                raise ValueError("variable level out of range")
            self.order_.insert(self.order_.begin() + lvl, var)
            self.level_of_.push_back(0)
            for i in range(<size_t>lvl, self.order_.size()):
                self.level_of_[self.order_[i]] = <int32_t>i
        self.proj_.push_back(self._mk(var, 0, 1))
        return var

    @property
    def num_vars(self):
        return self.level_of_.size()

    def level(self, var):
        return self.level_of_[<int32_t>var]

    def var_at_level(self, level):
        return self.order_[<int32_t>level]

    def num_nodes(self):
        return self.var_.size()

    def var_node(self, var):
        return self.proj_[<int32_t>var]

    # -- structure -----------------------------------------------------

    def top_var(self, f):
        return self.var_[<int32_t>f]

    def low(self, f):
        return self.low_[<int32_t>f]

    def high(self, f):
        return self.high_[<int32_t>f]

    def mk(self, var, low, high):
        return self._mk(<int32_t>var, <int32_t>low, <int32_t>high)

    cdef inline int64_t _node_level(self, int32_t f) nogil:
        if f < 2:
            return TERMINAL_LEVEL
        return self.level_of_[self.var_[f]]

    cdef int32_t _mk(self, int32_t var, int32_t low, int32_t high) except -1:
        if low == high:
            return low
        if (self.level_of_[var] >= self._node_level(low)
                or self.level_of_[var] >= self._node_level(high)):
            raise ValueError("mk: variable not above children in the order")
        cdef uint64_t key = ((<uint64_t><uint32_t>var << 48)
                             | (<uint64_t><uint32_t>low << 24)
                             | <uint64_t><uint32_t>high)
        cdef unordered_map[uint64_t, int32_t].iterator it = self.unique_.find(key)
        if it != self.unique_.end():
            return deref(it).second
        cdef int32_t node = <int32_t>self.var_.size()
        if node >= MAX_NODES:
            raise MemoryError("node capacity exceeded")
        self.var_.push_back(var)
        self.low_.push_back(low)
        self.high_.push_back(high)
        self.unique_[key] = node
        return node

    # -- connectives ------------------------------------------------------

    def neg(self, f):
        return self._ite(<int32_t>f, 0, 1)

    def conj(self, f, g):
        return self._apply2(OP_AND, <int32_t>f, <int32_t>g)

    def disj(self, f, g):
        return self._apply2(OP_OR, <int32_t>f, <int32_t>g)

    def xor(self, f, g):
        return self._apply2(OP_XOR, <int32_t>f, <int32_t>g)

    def iff(self, f, g):
        return self._apply2(OP_IFF, <int32_t>f, <int32_t>g)

    def ite(self, f, g, h):
        return self._ite(<int32_t>f, <int32_t>g, <int32_t>h)

    cdef int32_t _apply2(self, int op, int32_t f, int32_t g) except -1:
        if op == OP_AND:
            if f == g:
                return f
            if f == 0 or g == 0:
                return 0
            if f == 1:
                return g
            if g == 1:
                return f
        elif op == OP_OR:
            if f == g:
                return f
            if f == 1 or g == 1:
                return 1
            if f == 0:
                return g
            if g == 0:
                return f
        elif op == OP_XOR:
            if f == g:
                return 0
            if f == 0:
                return g
            if g == 0:
                return f
            if f == 1:
                return self._ite(g, 0, 1)
            if g == 1:
                return self._ite(f, 0, 1)
        else:
            if f == g:
                return 1
            if f == 1:
                return g
            if g == 1:
                return f
            if f == 0:
                return self._ite(g, 0, 1)
            if g == 0:
                return self._ite(f, 0, 1)
        cdef int32_t a = f if f < g else g
        cdef int32_t b = g if f < g else f
        cdef uint64_t k1 = self._opkey(op, a, b)
        cdef int32_t hit = self._cache_get(k1, 0)
        if hit >= 0:
            return hit
        cdef int64_t la = self._node_level(a)
        cdef int64_t lb = self._node_level(b)
        cdef int64_t lvl = la if la < lb else lb
        cdef int32_t var = self.order_[lvl]
        cdef int32_t a0, a1, b0, b1
        if la == lvl:
            a0 = self.low_[a]
            a1 = self.high_[a]
        else:
            a0 = a
            a1 = a
        if lb == lvl:
            b0 = self.low_[b]
            b1 = self.high_[b]
        else:
            b0 = b
            b1 = b
        cdef int32_t result = self._mk(
            var, self._apply2(op, a0, b0), self._apply2(op, a1, b1)
        )
        self._cache_put(k1, 0, result)
        return result

    cdef int32_t _ite(self, int32_t f, int32_t g, int32_t h) except -1:
        if f == 1:
            return g
        if f == 0:
            return h
        if g == h:
            return g
        if g == 1 and h == 0:
            return f
        cdef uint64_t k1 = self._opkey(OP_ITE, f, g)
        cdef int32_t hit = self._cache_get(k1, h)
        if hit >= 0:
            return hit
        cdef int64_t lf = self._node_level(f)
        cdef int64_t lg = self._node_level(g)
        cdef int64_t lh = self._node_level(h)
        cdef int64_t lvl = lf
        if lg < lvl:
            lvl = lg
        if lh < lvl:
            lvl = lh
        cdef int32_t var = self.order_[lvl]
        cdef int32_t f0, f1, g0, g1, h0, h1
        if lf == lvl:
            f0 = self.low_[f]
            f1 = self.high_[f]
        else:
            f0 = f
            f1 = f
        if lg == lvl:
            g0 = self.low_[g]
            g1 = self.high_[g]
        else:
            g0 = g
            g1 = g
        if lh == lvl:
            h0 = self.low_[h]
            h1 = self.high_[h]
        else:
            h0 = h
            h1 = h
        cdef int32_t result = self._mk(
            var, self._ite(f0, g0, h0), self._ite(f1, g1, h1)
        )
        self._cache_put(k1, h, result)
        return result

    # -- cofactor / quantification ----------------------------------------

    def restrict(self, f, var, bit):
        return self._restrict(<int32_t>f, <int32_t>var, 1 if bit else 0)

    cdef int32_t _restrict(self, int32_t f, int32_t var, int bit) except -1:
        if f < 2:
            return f
        if self._node_level(f) > self.level_of_[var]:
            return f
        cdef uint64_t k1 = self._opkey(OP_RESTRICT, f, var)
        cdef int32_t hit = self._cache_get(k1, bit)
        if hit >= 0:
            return hit
        cdef int32_t result
        if self.var_[f] == var:
            result = self.high_[f] if bit else self.low_[f]
        else:
            result = self._mk(
                self.var_[f],
                self._restrict(self.low_[f], var, bit),
                self._restrict(self.high_[f], var, bit),
            )
        self._cache_put(k1, bit, result)
        return result

    def exists1(self, f, var):
        return self._exists1(<int32_t>f, <int32_t>var)

    cdef int32_t _exists1(self, int32_t f, int32_t var) except -1:
        if f < 2:
            return f
        if self._node_level(f) > self.level_of_[var]:
            return f
        cdef uint64_t k1 = self._opkey(OP_EXISTS1, f, var)
        cdef int32_t hit = self._cache_get(k1, 0)
        if hit >= 0:
            return hit
        cdef int32_t result
        if self.var_[f] == var:
            result = self._apply2(OP_OR, self.low_[f], self.high_[f])
        else:
            result = self._mk(
                self.var_[f],
                self._exists1(self.low_[f], var),
                self._exists1(self.high_[f], var),
            )
        self._cache_put(k1, 0, result)
        return result

    def exists(self, f, variables):
        cdef int32_t node = <int32_t>f
        for var in sorted(variables, key=self._level_key, reverse=True):
            node = self._exists1(node, <int32_t>var)
        return node

    def forall(self, f, variables):
        cdef int32_t node = <int32_t>f
        cdef int32_t v
        for var in sorted(variables, key=self._level_key, reverse=True):
            v = <int32_t>var
            node = self._apply2(
                OP_AND, self._restrict(node, v, 0), self._restrict(node, v, 1)
            )
        return node

    def _level_key(self, var):
        return self.level_of_[<int32_t>var]

    # -- renaming ------------------------------------------------------------

    def rename(self, f, pairs):
        cdef unordered_map[int32_t, int32_t] mapping
        cdef unordered_map[int32_t, int32_t] memo
        for src, dst in pairs:
            mapping[<int32_t>src] = <int32_t>dst
        return self._rename_walk(<int32_t>f, mapping, memo)

    cdef int32_t _rename_walk(self, int32_t node,
                              unordered_map[int32_t, int32_t]& mapping,
                              unordered_map[int32_t, int32_t]& memo) except -1:
        if node < 2:
            return node
        cdef unordered_map[int32_t, int32_t].iterator it = memo.find(node)
        if it != memo.end():
            return deref(it).second
        cdef int32_t var = self.var_[node]
        it = mapping.find(var)
        if it != mapping.end():
            var = deref(it).second
        cdef int32_t result = self._mk(
            var,
            self._rename_walk(self.low_[node], mapping, memo),
            self._rename_walk(self.high_[node], mapping, memo),
        )
        memo[node] = result
        return result

    # -- inspection ------------------------------------------------------------

    def support(self, f):
        cdef vector[int32_t] stack
        cdef unordered_map[int32_t, char] seen
        cdef unordered_map[int32_t, char] found
        cdef int32_t node
        stack.push_back(<int32_t>f)
        while stack.size() > 0:
            node = stack.back()
            stack.pop_back()
            if node < 2 or seen.count(node):
                continue
            seen[node] = 1
            found[self.var_[node]] = 1
            stack.push_back(self.low_[node])
            stack.push_back(self.high_[node])
        cdef list out = []
        cdef unordered_map[int32_t, char].iterator it = found.begin()
        while it != found.end():
            out.append(deref(it).first)
            inc(it)
        out.sort(key=self._level_key)
        return out

    def evaluate(self, f, assignment):
        cdef int32_t node = <int32_t>f
        while node >= 2:
            if assignment[self.var_[node]]:
                node = self.high_[node]
            else:
                node = self.low_[node]
        return node


# -- scalar normal form ---------------------------------------------------

# A term is packed into one int64: (value id << 24) | guard node.
cdef int64_t NODE_MASK = (1 << 24) - 1


cdef class _ScalarNormalizer:
    cdef Manager mgr
    cdef double eps
    cdef vector[double] rep_re
    cdef vector[double] rep_im
    cdef unordered_map[uint64_t, vector[int32_t]] grid
    cdef unordered_map[uint64_t, vector[int32_t]] memo_buckets
    cdef vector[vector[int64_t]] memo_keys
    cdef vector[vector[int64_t]] memo_vals

    def __cinit__(self, Manager mgr, double eps):
        self.mgr = mgr
        self.eps = eps

    cdef inline uint64_t _cell_key(self, int64_t cr, int64_t ci) nogil:
        return _mix(<uint64_t>cr, <uint64_t>ci)

    cdef int32_t intern(self, double re, double im):
        """Value id for (re, im); -1 when it is zero within eps. Joins
        the first existing representative within eps (own or adjacent
        grid cell)."""
        if hypot(re, im) <= self.eps:
            return -1
        cdef int64_t cr = llround(re / self.eps)
        cdef int64_t ci = llround(im / self.eps)
        cdef int dr, di
        cdef uint64_t key
        cdef int32_t vid
        cdef size_t i
        cdef unordered_map[uint64_t, vector[int32_t]].iterator it
        for dr in range(-1, 2):
            for di in range(-1, 2):
                key = self._cell_key(cr + dr, ci + di)
                it = self.grid.find(key)
                if it == self.grid.end():
                    continue
                for i in range(deref(it).second.size()):
                    vid = deref(it).second[i]
                    if hypot(self.rep_re[vid] - re,
                             self.rep_im[vid] - im) <= self.eps:
                        return vid
        vid = <int32_t>self.rep_re.size()
        self.rep_re.push_back(re)
        self.rep_im.push_back(im)
        self.grid[self._cell_key(cr, ci)].push_back(vid)
        return vid

    cdef uint64_t _hash_items(self, vector[int64_t]& items) nogil:
        cdef uint64_t h = <uint64_t>0xCBF29CE484222325
        cdef size_t i
        for i in range(items.size()):
            h = _mix(h, <uint64_t>items[i])
        return h

    cdef int _memo_find(self, uint64_t h, vector[int64_t]& items):
        cdef unordered_map[uint64_t, vector[int32_t]].iterator it
        it = self.memo_buckets.find(h)
        if it == self.memo_buckets.end():
            return -1
        cdef size_t i, j
        cdef int32_t slot
        cdef bint same
        for i in range(deref(it).second.size()):
            slot = deref(it).second[i]
            if self.memo_keys[slot].size() != items.size():
                continue
            same = True
            for j in range(items.size()):
                if self.memo_keys[slot][j] != items[j]:
                    same = False
                    break
            if same:
                return slot
        return -1

    cdef vector[int64_t] rec(self, vector[int64_t]& items):
        cdef vector[int64_t] result
        if items.size() == 0:
            return result
        cdef size_t i
        cdef bint all_true = True
        cdef int32_t node
        for i in range(items.size()):
            if (items[i] & NODE_MASK) != 1:
                all_true = False
                break
        cdef double acc_re, acc_im
        cdef int32_t vid
        if all_true:
            acc_re = 0.0
            acc_im = 0.0
            for i in range(items.size()):
                vid = <int32_t>(items[i] >> 24)
                acc_re += self.rep_re[vid]
                acc_im += self.rep_im[vid]
            vid = self.intern(acc_re, acc_im)
            if vid >= 0:
                result.push_back((<int64_t>vid << 24) | 1)
            return result
        cdef uint64_t h = self._hash_items(items)
        cdef int slot = self._memo_find(h, items)
        if slot >= 0:
            return self.memo_vals[slot]
        # split on the shallowest top variable among the guards
        cdef int64_t best = TERMINAL_LEVEL
        cdef int64_t lvl
        for i in range(items.size()):
            node = <int32_t>(items[i] & NODE_MASK)
            if node >= 2:
                lvl = self.mgr.level_of_[self.mgr.var_[node]]
                if lvl < best:
                    best = lvl
        cdef int32_t var = self.mgr.order_[best]
        cdef vector[int64_t] lo
        cdef vector[int64_t] hi
        cdef int32_t l, r
        cdef int64_t vid_part
        for i in range(items.size()):
            node = <int32_t>(items[i] & NODE_MASK)
            vid_part = items[i] & ~NODE_MASK
            if node >= 2 and self.mgr.var_[node] == var:
                l = self.mgr.low_[node]
                r = self.mgr.high_[node]
            else:
                l = node
                r = node
            if l != 0:
                lo.push_back(vid_part | l)
            if r != 0:
                hi.push_back(vid_part | r)
        cpp_sort(lo.begin(), lo.end())
        cpp_sort(hi.begin(), hi.end())
        cdef vector[int64_t] r0 = self.rec(lo)
        cdef vector[int64_t] r1 = self.rec(hi)
        # merge-join on value id (unique and ascending within each side)
        cdef size_t i0 = 0, i1 = 0
        cdef int64_t v0, v1
        cdef int32_t g0, g1, merged
        while i0 < r0.size() or i1 < r1.size():
            v0 = (r0[i0] >> 24) if i0 < r0.size() else (<int64_t>1 << 40)
            v1 = (r1[i1] >> 24) if i1 < r1.size() else (<int64_t>1 << 40)
            if v0 < v1:
                g0 = <int32_t>(r0[i0] & NODE_MASK)
                g1 = 0
                vid = <int32_t>v0
                i0 += 1
            elif v1 < v0:
                g0 = 0
                g1 = <int32_t>(r1[i1] & NODE_MASK)
                vid = <int32_t>v1
                i1 += 1
            else:
                g0 = <int32_t>(r0[i0] & NODE_MASK)
                g1 = <int32_t>(r1[i1] & NODE_MASK)
                vid = <int32_t>v0
                i0 += 1
                i1 += 1
            merged = g0 if g0 == g1 else self.mgr._mk(var, g0, g1)
            result.push_back((<int64_t>vid << 24) | merged)
        cdef int32_t new_slot = <int32_t>self.memo_keys.size()
        self.memo_keys.push_back(items)
        self.memo_vals.push_back(result)
        self.memo_buckets[h].push_back(new_slot)
        return result

    def run(self, list terms):
        cdef vector[int64_t] items
        cdef int32_t vid
        cdef int32_t node
        for value, guard in terms:
            node = <int32_t>guard
            if node == 0:
                continue
            vid = self.intern(value.real, value.imag)
            if vid < 0:
                continue
            items.push_back((<int64_t>vid << 24) | node)
        cpp_sort(items.begin(), items.end())
        cdef vector[int64_t] reduced = self.rec(items)
        out = []
        cdef size_t i
        for i in range(reduced.size()):
            vid = <int32_t>(reduced[i] >> 24)
            node = <int32_t>(reduced[i] & NODE_MASK)
            out.append((complex(self.rep_re[vid], self.rep_im[vid]), node))
        return out


def normalize_scalars(Manager mgr, list terms, double eps):
    """Reduced normal form for 1x1 expressions.

    terms: (complex, guard_node) pairs; eps must be positive. Returns
    (complex, guard_node) pairs with pairwise-disjoint guards and
    clustered coefficients (first-seen representative wins).
    """
    if eps <= 0:
        raise ValueError("normalize_scalars needs a positive tolerance")
    return _ScalarNormalizer(mgr, eps).run(terms)
