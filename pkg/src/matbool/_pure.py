"""Pure-Python ROBDD manager.

Reference implementation of the node-level kernel. The compiled twin in
``_core`` exposes the same interface; ``matbool.bdd`` picks one at import.

Nodes are integers: 0 is the false terminal, 1 the true terminal, and
every id >= 2 names a (var, low, high) triple kept canonical through a
unique table. Variables are dense integer ids; their position in the
global order is a separate level table, so a fresh variable can be
inserted between existing ones without disturbing any live node.
"""

_OP_AND = 0
_OP_OR = 1
_OP_XOR = 2
_OP_IFF = 3
_OP_ITE = 4
_OP_RESTRICT = 5
_OP_EXISTS1 = 6

_TERMINAL_LEVEL = 1 << 60


class Manager:
    FALSE = 0
    TRUE = 1

    def __init__(self):
        # parallel node arrays; slots 0/1 are the terminals
        self._var = [-1, -1]
        self._low = [0, 1]
        self._high = [0, 1]
        self._unique = {}      # (var, low, high) -> node
        self._cache = {}       # (op, a, b[, c]) -> node
        self._level_of = []    # var -> level
        self._order = []       # level -> var
        self._proj = []        # var -> projection node

    # -- variables ---------------------------------------------------

    def new_var(self, level=None):
        var = len(self._level_of)
        if level is None or level == len(self._order):
            self._order.append(var)
            self._level_of.append(len(self._order) - 1)
        else:
            if not 0 <= level <= len(self._order):
                raise ValueError("variable level out of range")
            self._order.insert(level, var)
            self._level_of.append(0)
            for lvl in range(level, len(self._order)):
                self._level_of[self._order[lvl]] = lvl
        self._proj.append(self._mk(var, 0, 1))
        return var

    @property
    def num_vars(self):
        return len(self._level_of)

    def level(self, var):
        return self._level_of[var]

    def var_at_level(self, level):
        return self._order[level]

    def num_nodes(self):
        return len(self._var)

    def var_node(self, var):
        return self._proj[var]

    # -- structure ---------------------------------------------------

    def top_var(self, f):
        return self._var[f]

    def low(self, f):
        return self._low[f]

    def high(self, f):
        return self._high[f]

    def _node_level(self, f):
        return _TERMINAL_LEVEL if f < 2 else self._level_of[self._var[f]]

    def mk(self, var, low, high):
        """Canonical node for ite(var, high, low); var must sit above both."""
        return self._mk(var, low, high)

    def _mk(self, var, low, high):
        if low == high:
            return low
        lvl = self._level_of[var]
        if lvl >= self._node_level(low) or lvl >= self._node_level(high):
            raise ValueError("mk: variable not above children in the order")
        key = (var, low, high)
        node = self._unique.get(key)
        if node is None:
            node = len(self._var)
            self._var.append(var)
            self._low.append(low)
            self._high.append(high)
            self._unique[key] = node
        return node

    # -- connectives -------------------------------------------------

    def neg(self, f):
        return self.ite(f, 0, 1)

    def conj(self, f, g):
        if f == g:
            return f
        if f == 0 or g == 0:
            return 0
        if f == 1:
            return g
        if g == 1:
            return f
        return self._apply2(_OP_AND, f, g)

    def disj(self, f, g):
        if f == g:
            return f
        if f == 1 or g == 1:
            return 1
        if f == 0:
            return g
        if g == 0:
            return f
        return self._apply2(_OP_OR, f, g)

    def xor(self, f, g):
        if f == g:
            return 0
        if f == 0:
            return g
        if g == 0:
            return f
        if f == 1:
            return self.neg(g)
        if g == 1:
            return self.neg(f)
        return self._apply2(_OP_XOR, f, g)

    def iff(self, f, g):
        if f == g:
            return 1
        if f == 1:
            return g
        if g == 1:
            return f
        if f == 0:
            return self.neg(g)
        if g == 0:
            return self.neg(f)
        return self._apply2(_OP_IFF, f, g)

    def _apply2(self, op, f, g):
        if g < f:
            f, g = g, f
        key = (op, f, g)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        lf = self._node_level(f)
        lg = self._node_level(g)
        lvl = lf if lf < lg else lg
        var = self._order[lvl]
        f0, f1 = (self._low[f], self._high[f]) if lf == lvl else (f, f)
        g0, g1 = (self._low[g], self._high[g]) if lg == lvl else (g, g)
        if op == _OP_AND:
            low, high = self.conj(f0, g0), self.conj(f1, g1)
        elif op == _OP_OR:
            low, high = self.disj(f0, g0), self.disj(f1, g1)
        elif op == _OP_XOR:
            low, high = self.xor(f0, g0), self.xor(f1, g1)
        else:
            low, high = self.iff(f0, g0), self.iff(f1, g1)
        result = self._mk(var, low, high)
        self._cache[key] = result
        return result

    def ite(self, f, g, h):
        if f == 1:
            return g
        if f == 0:
            return h
        if g == h:
            return g
        if g == 1 and h == 0:
            return f
        key = (_OP_ITE, f, g, h)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        lf, lg, lh = self._node_level(f), self._node_level(g), self._node_level(h)
        lvl = min(lf, lg, lh)
        var = self._order[lvl]
        f0, f1 = (self._low[f], self._high[f]) if lf == lvl else (f, f)
        g0, g1 = (self._low[g], self._high[g]) if lg == lvl else (g, g)
        h0, h1 = (self._low[h], self._high[h]) if lh == lvl else (h, h)
        result = self._mk(var, self.ite(f0, g0, h0), self.ite(f1, g1, h1))
        self._cache[key] = result
        return result

    # -- cofactor / quantification ------------------------------------

    def restrict(self, f, var, bit):
        if f < 2:
            return f
        lvl = self._level_of[var]
        if self._node_level(f) > lvl:
            return f
        key = (_OP_RESTRICT, f, var, bit)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        if self._var[f] == var:
            result = self._high[f] if bit else self._low[f]
        else:
            result = self._mk(
                self._var[f],
                self.restrict(self._low[f], var, bit),
                self.restrict(self._high[f], var, bit),
            )
        self._cache[key] = result
        return result

    def exists1(self, f, var):
        if f < 2:
            return f
        lvl = self._level_of[var]
        if self._node_level(f) > lvl:
            return f
        key = (_OP_EXISTS1, f, var)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        if self._var[f] == var:
            result = self.disj(self._low[f], self._high[f])
        else:
            result = self._mk(
                self._var[f],
                self.exists1(self._low[f], var),
                self.exists1(self._high[f], var),
            )
        self._cache[key] = result
        return result

    def exists(self, f, variables):
        # innermost (deepest) variable first
        for var in sorted(variables, key=lambda v: -self._level_of[v]):
            f = self.exists1(f, var)
        return f

    def forall(self, f, variables):
        for var in sorted(variables, key=lambda v: -self._level_of[v]):
            f = self.conj(self.restrict(f, var, 0), self.restrict(f, var, 1))
        return f

    # -- renaming ------------------------------------------------------

    def rename(self, f, pairs):
        """Rewire variables; callers must pass an order-compatible map."""
        mapping = dict(pairs)
        memo = {}

        def walk(node):
            if node < 2:
                return node
            hit = memo.get(node)
            if hit is not None:
                return hit
            var = mapping.get(self._var[node], self._var[node])
            result = self._mk(var, walk(self._low[node]), walk(self._high[node]))
            memo[node] = result
            return result

        return walk(f)

    # -- inspection ----------------------------------------------------

    def support(self, f):
        seen = set()
        variables = set()
        stack = [f]
        while stack:
            node = stack.pop()
            if node < 2 or node in seen:
                continue
            seen.add(node)
            variables.add(self._var[node])
            stack.append(self._low[node])
            stack.append(self._high[node])
        return sorted(variables, key=lambda v: self._level_of[v])

    def evaluate(self, f, assignment):
        node = f
        while node >= 2:
            bit = assignment[self._var[node]]
            node = self._high[node] if bit else self._low[node]
        return node
