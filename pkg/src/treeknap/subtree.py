"""All-rooted-subtree values, complement tables, and k-subtree selection.

Three problems layered on the heavy-light engine:

* ``for_all_subtree`` — the plain optimum for every rooted subtree, from one
  engine pass per heavy path (the path iteration already computes every
  path vertex's result; light subtrees are reached through their own heads).
* ``for_all_subtree_complement`` — for every vertex ``u`` and state ``q``,
  the best selection of the tree with ``T_u`` deleted, over runs that assign
  ``q`` to ``parent(u)`` and leave u's child slot unconstrained.  Computed
  top-down along heavy paths: hole tables are extended vertex by vertex,
  sibling subtrees enter as standalone solution arrays (threading an array
  through a subtree equals max-plus convolution with that subtree's own
  array), combined with prefix/suffix convolution products.  Each subtree is
  therefore entered only by the per-path solution passes, O(log n) times.
* ``conn_k`` — best selection of at most k pairwise non-ancestral full
  rooted subtrees under one shared capacity, via ``lift_k`` and the engine
  running on component-counting tables.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._engine import Engine, identity_block
from ._lowering import (
    KIND_EXPLICIT,
    KIND_ONEHOT,
    KIND_PRODUCT,
    KIND_UNIFORM,
    lower,
)
from .automaton import Automaton, Product, Rule, is_prefix_closed
from .errors import ClosureError, SolverError
from .profit_array import _NEG, INFEASIBLE, ProfitArray
from .solvers import CallStats, _conv_vec, _require_plain
from .tree import Instance, decorate_hld, reordered_children


def _best_over_rows(block: np.ndarray, rows) -> int | object:
    """Best value over the given rows of a (.., C+1) block, or INFEASIBLE."""
    best = None
    for row in rows:
        vals = block[row] if not isinstance(row, np.ndarray) else row
        top = int(vals.max()) if vals.size else _NEG
        if top >= 0 and (best is None or top > best):
            best = top
    return INFEASIBLE if best is None else best


# -- all-subtree values -----------------------------------------------------


@dataclass
class SubtreeValues:
    values: list  # per-vertex optimum (int) or INFEASIBLE
    stats: CallStats

    def value(self, u: int):
        return self.values[u]

    def __len__(self) -> int:
        return len(self.values)


def for_all_subtree(instance: Instance, aut: Automaton) -> SubtreeValues:
    """Optimum of every rooted subtree T_u under u's own root constraint,
    sharing the global capacity."""
    low = lower(aut)
    _require_plain(low)
    stats = CallStats.for_instance(instance.n)
    hld = decorate_hld(instance)
    eng = Engine(instance, low, hld, rows=1, stats=stats)
    init_idx = list(low.initial)
    values: list = [None] * instance.n

    def collect(u, block):
        values[u] = _best_over_rows(block[:, 0, :], init_idx)

    for path in hld.heavy_paths:
        eng.solve_head(path[0], eng.identity(), capture=collect)
    return SubtreeValues(values, stats)


# -- complement tables ------------------------------------------------------


@dataclass
class ComplementTable:
    state_names: tuple[str, ...]
    table: np.ndarray  # int64 (n, Q, C+1)
    stats: CallStats

    def row(self, u: int, q: str) -> ProfitArray:
        return ProfitArray(np.array(self.table[u, self.state_names.index(q)]))

    def value(self, u: int):
        """Best complement value at u over all parent states."""
        return _best_over_rows(self.table[u], range(len(self.state_names)))


def for_all_subtree_complement(instance: Instance, aut: Automaton) -> ComplementTable:
    n = instance.n
    cap = instance.capacity
    state_names = aut.states
    Q = len(state_names)
    table = np.full((n, Q, cap + 1), _NEG, dtype=np.int64)
    table[0, :, 0] = 0  # root rows: identity for every state

    def emit(u, block):
        table[u] = block

    stats = _complement_stream(instance, aut, emit)
    return ComplementTable(state_names, table, stats)


def for_all_subtree_complement_stream(instance: Instance, aut: Automaton, callback) -> CallStats:
    """Streaming form: ``callback(u, block)`` once per vertex u != root with
    the (Q, C+1) complement block (rows follow ``aut.states``)."""
    return _complement_stream(instance, aut, callback)


def _complement_stream(instance: Instance, aut: Automaton, callback) -> CallStats:
    n = instance.n
    cap = instance.capacity
    if not is_prefix_closed(aut, n):
        raise ClosureError(
            "complement tables need a prefix-closed automaton "
            "(every generated tuple keeps all its prefixes generable); "
            "apply prefix_closure first"
        )
    base = lower(aut)
    _require_plain(base)
    full = lower(aut, drop_inert_sources=False)
    stats = CallStats.for_instance(n)
    hld = decorate_hld(instance)
    eng = Engine(instance, base, hld, rows=1, stats=stats)
    Q = base.n_states

    # standalone solution arrays of every rooted subtree, one engine pass
    # per heavy path
    B = np.full((n, Q, cap + 1), _NEG, dtype=np.int64)

    def collect(u, block):
        B[u] = block[:, 0, :]

    for path in hld.heavy_paths:
        eng.solve_head(path[0], eng.identity(), capture=collect)

    identity = np.full(cap + 1, _NEG, dtype=np.int64)
    identity[0] = 0

    def conv(a, b):
        return _conv_vec(a, b, cap, stats)

    def prefix_products(rows):
        """pref[i] = fold of rows[0..i-1]; pref[0] = identity."""
        pref = [identity]
        for r in rows:
            pref.append(conv(pref[-1], r))
        return pref

    def suffix_products(rows):
        suff = [identity]
        for r in reversed(rows):
            suff.append(conv(r, suff[-1]))
        suff.reverse()
        return suff

    def shift(z, w, p):
        if w > cap:
            return None
        out = np.full(cap + 1, _NEG, dtype=np.int64)
        np.add(z[: cap + 1 - w], p, out=out[w:])
        out[out < 0] = _NEG
        return out

    # hole tables: H[u][s] = best selection outside T_u over runs handing
    # state s into u's slot
    H = np.full((n, Q, cap + 1), _NEG, dtype=np.int64)
    for qi in base.initial:
        H[0, qi, 0] = 0

    heads = sorted(path[0] for path in hld.heavy_paths)
    paths = {path[0]: path for path in hld.heavy_paths}
    w_arr, p_arr = instance.weights, instance.profits

    for head in heads:
        for u in paths[head]:
            kids = reordered_children(instance, hld, u)
            d = len(kids)
            if d == 0:
                continue
            w_u, p_u = int(w_arr[u]), int(p_arr[u])
            pub = np.full((d, Q, cap + 1), _NEG, dtype=np.int64)

            def emit_chain(P, holes, hole_states, sources):
                """Combine sibling product P with each source's hole table
                row and record hole/public contributions."""
                for qs, sigma in sources:
                    if not (H[u, qs] >= 0).any():
                        continue
                    z = conv(H[u, qs], P)
                    if sigma:
                        z = shift(z, w_u, p_u)
                        if z is None:
                            continue
                    for h in holes:
                        v = kids[h]
                        for s2 in hole_states:
                            np.maximum(H[v, s2], z, out=H[v, s2])
                        np.maximum(pub[h, qs], z, out=pub[h, qs])

            for g in full.generators:
                if not g.applicable(d):
                    continue
                if g.kind == KIND_UNIFORM:
                    (a,) = g.params
                    rows = [B[v, a] for v in kids]
                    pref = prefix_products(rows)
                    suff = suffix_products(rows)
                    for h in range(d):
                        P = conv(pref[h], suff[h + 1])
                        emit_chain(P, [h], [a], g.sources)
                elif g.kind == KIND_ONEHOT:
                    a, b = g.params
                    rows_b = [B[v, b] for v in kids]
                    rows_a = [B[v, a] for v in kids]
                    pref = prefix_products(rows_b)
                    suff = suffix_products(rows_b)
                    for h in range(d):
                        # special lands in the hole: siblings all default
                        P = conv(pref[h], suff[h + 1])
                        emit_chain(P, [h], [a], g.sources)
                        if d >= 2:
                            # special at some sibling t != h: hole gets the
                            # default; best over t via the except-one scheme
                            others = [j for j in range(d) if j != h]
                            orows = [rows_b[j] for j in others]
                            opref = prefix_products(orows)
                            osuff = suffix_products(orows)
                            best_t = None
                            for k, t in enumerate(others):
                                Pt = conv(conv(opref[k], rows_a[t]), osuff[k + 1])
                                if best_t is None:
                                    best_t = Pt
                                else:
                                    best_t = np.maximum(best_t, Pt)
                                    stats.maxima += 1
                            emit_chain(best_t, [h], [b], g.sources)
                elif g.kind == KIND_PRODUCT:
                    opts = [s for s, _inc in g.params]
                    rows = []
                    for v in kids:
                        acc = B[v, opts[0]]
                        for s in opts[1:]:
                            acc = np.maximum(acc, B[v, s])
                            stats.maxima += 1
                        rows.append(acc)
                    pref = prefix_products(rows)
                    suff = suffix_products(rows)
                    for h in range(d):
                        P = conv(pref[h], suff[h + 1])
                        emit_chain(P, [h], opts, g.sources)
                else:
                    t = g.params
                    rows = [B[v, t[i]] for i, v in enumerate(kids)]
                    pref = prefix_products(rows)
                    suff = suffix_products(rows)
                    for h in range(d):
                        P = conv(pref[h], suff[h + 1])
                        emit_chain(P, [h], [t[h]], g.sources)

            for h, v in enumerate(kids):
                callback(v, pub[h])
    return stats


# -- k-subtree selection ----------------------------------------------------


def lift_k(aut: Automaton, k: int) -> Automaton:
    """Wrap ``aut`` so runs count how many pairwise non-ancestral full
    subtrees are handed to an original initial state.

    Adds a fresh unselected state ``out`` whose single rule lets every
    child independently stay out (+0) or start a component at some
    original initial state (+1).  The lifted automaton starts at ``out``;
    a component rooted at the tree root itself is accounted separately by
    the solver (one root-level +1).
    """
    if k < 0:
        raise SolverError("k must be nonnegative")
    out = "out"
    names = set(aut.states)
    while out in names:
        out += "_"
    options = ((out, 0),) + tuple((q0, 1) for q0 in aut.initial)
    rules = aut.rules + (Rule(out, 0, Product(options)),)
    return Automaton(aut.states + (out,), (out,), rules)


@dataclass
class KSubtreeResult:
    best: list  # best[l]: profit with exactly l subtrees, or INFEASIBLE
    stats: CallStats


def conn_k(instance: Instance, aut: Automaton, k: int) -> KSubtreeResult:
    """best[l] for l in 0..k: maximum profit of selections formed by l
    pairwise non-ancestral rooted subtrees, each fully accepted from an
    initial state of ``aut``, under the shared capacity."""
    _require_plain(lower(aut))
    lifted = lift_k(aut, k)
    low = lower(lifted)
    stats = CallStats.for_instance(instance.n)
    hld = decorate_hld(instance)
    eng = Engine(instance, low, hld, rows=k + 1, stats=stats)
    block = eng.solve_head(0, eng.identity())
    out_idx = low.state_names.index(lifted.initial[0])
    init_idx = [low.state_names.index(q) for q in aut.initial]
    best: list = []
    for l in range(k + 1):
        rows = [block[out_idx, l]]
        if l >= 1:
            rows.extend(block[qi, l - 1] for qi in init_idx)
        best.append(_best_over_rows(None, rows))
    return KSubtreeResult(best, stats)
