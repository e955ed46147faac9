"""Reference heavy-light recursive engine.

Works on int64 blocks of shape (rows, C+1): rows = 1 for plain profit
arrays, k+1 for component-counting tables.  The engine processes one heavy
path per ``solve_head`` call: results are computed bottom-up along the path
on a single shared input array, and real recursion happens only into light
subtrees, bounding Python stack depth by the light depth (<= log2 n).

Per invocation of a vertex the heavy child result (all states at once) comes
from the path iteration; each chain threads light children left to right,
skipping inert states (the block passes through unchanged).  Operation
counters are incremented at exactly the same points as in the compiled
kernels so the two implementations are interchangeable in tests.
"""

from __future__ import annotations

import numpy as np

from ._lowering import KIND_EXPLICIT, KIND_ONEHOT, KIND_PRODUCT, KIND_UNIFORM, Lowered
from .profit_array import _NEG
from .tree import HldDecoration, Instance, reordered_children


def identity_block(rows: int, capacity: int) -> np.ndarray:
    x = np.full((rows, capacity + 1), _NEG, dtype=np.int64)
    x[0, 0] = 0
    return x


class Engine:
    def __init__(
        self,
        instance: Instance,
        lowered: Lowered,
        hld: HldDecoration,
        rows: int,
        stats,
    ):
        self.low = lowered
        self.stats = stats
        self.cap = instance.capacity
        self.rows = rows
        self.w = instance.weights
        self.p = instance.profits
        self.heavy = hld.heavy_child
        self.kids = tuple(
            reordered_children(instance, hld, u) for u in range(instance.n)
        )
        self._neg = np.full((rows, instance.capacity + 1), _NEG, dtype=np.int64)
        self._neg.flags.writeable = False

    def identity(self) -> np.ndarray:
        return identity_block(self.rows, self.cap)

    def solve_head(self, head: int, x: np.ndarray, capture=None) -> np.ndarray:
        """Solve the whole heavy path starting at ``head`` on input ``x``;
        returns the (Q, rows, C+1) result block for ``head``.

        ``capture(u, block)`` is called for every path vertex with its own
        result block (deepest first); nested light-subtree entries never
        fire the capture.
        """
        path = [head]
        while self.heavy[path[-1]] != -1:
            path.append(int(self.heavy[path[-1]]))
        below = None
        for u in reversed(path):
            below = self._vertex(u, below, x)
            if capture is not None:
                capture(u, below)
        return below

    # -- one vertex ---------------------------------------------------------

    def _vertex(self, u: int, below, x: np.ndarray) -> np.ndarray:
        stats = self.stats
        stats.invocations_per_vertex[u] += 1
        kids = self.kids[u]
        d = len(kids)
        low = self.low
        out = np.full((low.n_states, self.rows, self.cap + 1), _NEG, dtype=np.int64)
        for qi, is_inert in enumerate(low.inert):
            if is_inert:
                out[qi] = x
        w_u = int(self.w[u])
        p_u = int(self.p[u])
        for g in low.generators:
            if not g.applicable(d):
                continue
            for z in self._chains(g, kids, d, below, x):
                stats.chains += 1
                shifted = None
                for q, sigma in g.sources:
                    if sigma:
                        if shifted is None:
                            shifted = self._shift_add(z, w_u, p_u)
                        stats.shift_adds += 1
                        cand = shifted
                    else:
                        cand = z
                    np.maximum(out[q], cand, out=out[q])
                    stats.maxima += 1
        return out

    def _shift_add(self, z: np.ndarray, w: int, p: int) -> np.ndarray:
        if w > self.cap:
            return self._neg
        out = np.full_like(z, _NEG)
        np.add(z[:, : self.cap + 1 - w], p, out=out[:, w:])
        out[out < 0] = _NEG
        return out

    def _shift_count(self, z: np.ndarray, inc: int) -> np.ndarray:
        if inc == 0:
            return z
        out = np.full_like(z, _NEG)
        if inc < self.rows:
            out[inc:] = z[: self.rows - inc]
        return out

    # -- chains -------------------------------------------------------------

    def _step(self, v: int, z: np.ndarray, qi: int) -> np.ndarray:
        if self.low.inert[qi]:
            return z
        return self.solve_head(v, z)[qi]

    def _chains(self, g, kids, d: int, below, x: np.ndarray):
        if g.kind == KIND_UNIFORM:
            (a,) = g.params
            z = below[a] if d else x
            for i in range(1, d):
                z = self._step(kids[i], z, a)
            yield z
        elif g.kind == KIND_ONEHOT:
            a, b = g.params
            z = below[a]
            for i in range(1, d):
                z = self._step(kids[i], z, b)
            yield z
            pb = below[b]
            for j in range(1, d):
                zz = self._step(kids[j], pb, a)
                for i in range(j + 1, d):
                    zz = self._step(kids[i], zz, b)
                yield zz
                if j < d - 1:
                    pb = self._step(kids[j], pb, b)
        elif g.kind == KIND_PRODUCT:
            yield self._product_chain(g.params, kids, d, below, x)
        elif g.kind == KIND_EXPLICIT:
            t = g.params
            z = below[t[0]] if d else x
            for i in range(1, d):
                z = self._step(kids[i], z, t[i])
            yield z

    def _product_chain(self, options, kids, d: int, below, x: np.ndarray):
        stats = self.stats
        inert = self.low.inert
        if d == 0:
            return x
        acc = None
        for s, inc in options:
            cand = self._shift_count(below[s], inc)
            if acc is None:
                acc = cand
            else:
                acc = np.maximum(acc, cand)
                stats.maxima += 1
        z = acc
        for i in range(1, d):
            v = kids[i]
            full = None
            if any(not inert[s] for s, _ in options):
                full = self.solve_head(v, z)
            acc = None
            for s, inc in options:
                row = z if inert[s] else full[s]
                cand = self._shift_count(row, inc)
                if acc is None:
                    acc = cand
                else:
                    acc = np.maximum(acc, cand)
                    stats.maxima += 1
            z = acc
        return z
