"""The three solving algorithms over a common rule lowering.

* ``baseline_dp`` — bottom-up table dynamic programming with max-plus
  convolutions; the only solver that reconstructs witness sets.
* ``recdp`` — array-threading recursion, one state at a time, children in
  input order; takes the continuation array as an explicit parameter.
* ``hlrecdp`` — heavy-light variant: heavy paths are iterated (one entry
  per invocation, results for all states at once), recursion descends only
  into light subtrees, inert states pass arrays through.

All three produce identical per-state root arrays.  ``baseline_dp`` and
``hlrecdp`` each have a compiled kernel for uniform/one-hot rule sets and a
pure-Python reference path; both update the same counters at the same
points.
"""

from __future__ import annotations

import itertools
import sys
import threading
from dataclasses import dataclass, field

import numpy as np

from ._engine import Engine, identity_block
from ._lowering import (
    KIND_EXPLICIT,
    KIND_ONEHOT,
    KIND_PRODUCT,
    KIND_UNIFORM,
    flatten,
    lower,
)
from .automaton import Automaton, accepts
from .errors import InternalError, SolverError
from .profit_array import _NEG, INFEASIBLE, ProfitArray
from .tree import Instance, decorate_hld

_PRODUCT_DEGREE_LIMIT = 60
_PRODUCT_TUPLE_LIMIT = 10**6

ALGORITHMS = ("baseline", "recdp", "hlrecdp", "oracle")


@dataclass
class CallStats:
    """Exact, deterministic operation counters for one solver run."""

    invocations_per_vertex: np.ndarray
    chains: int = 0
    convolutions: int = 0
    shift_adds: int = 0
    maxima: int = 0

    @classmethod
    def for_instance(cls, n: int) -> "CallStats":
        return cls(invocations_per_vertex=np.zeros(n, dtype=np.int64))

    @property
    def total_invocations(self) -> int:
        return int(self.invocations_per_vertex.sum())

    def __eq__(self, other) -> bool:
        if not isinstance(other, CallStats):
            return NotImplemented
        return (
            np.array_equal(self.invocations_per_vertex, other.invocations_per_vertex)
            and self.chains == other.chains
            and self.convolutions == other.convolutions
            and self.shift_adds == other.shift_adds
            and self.maxima == other.maxima
        )


@dataclass
class SolveResult:
    arrays: dict[str, ProfitArray]  # root array for every state
    initial: tuple[str, ...]
    stats: CallStats
    witness: list[int] | None = None

    @property
    def optimum(self):
        """Best profit over the initial states, or INFEASIBLE."""
        best = INFEASIBLE
        for q in self.initial:
            bv = self.arrays[q].best_value()
            if bv is INFEASIBLE:
                continue
            if best is INFEASIBLE or bv[0] > best[0] or (bv[0] == best[0] and bv[1] < best[1]):
                best = bv
        return INFEASIBLE if best is INFEASIBLE else best[0]

    @property
    def weight(self):
        best = INFEASIBLE
        for q in self.initial:
            bv = self.arrays[q].best_value()
            if bv is INFEASIBLE:
                continue
            if best is INFEASIBLE or bv[0] > best[0] or (bv[0] == best[0] and bv[1] < best[1]):
                best = bv
        return None if best is INFEASIBLE else best[1]


def _require_plain(low):
    if low.has_increments:
        raise SolverError(
            "PRODUCT count increments need the component-counting solver (conn_k); "
            "plain solvers cannot honor them"
        )


def _wrap_block(low, block) -> dict[str, ProfitArray]:
    return {
        q: ProfitArray(np.array(block[i], dtype=np.int64))
        for i, q in enumerate(low.state_names)
    }


def _pick_engine(engine: str, low) -> str:
    if engine == "auto":
        return "compiled" if low.kernel_ok else "python"
    if engine not in ("python", "compiled"):
        raise SolverError(f"unknown engine {engine!r} (auto, python, compiled)")
    if engine == "compiled" and not low.kernel_ok:
        raise SolverError(
            "compiled engine supports uniform/one-hot rules only; use engine='python'"
        )
    return engine


# -- hlrecdp ----------------------------------------------------------------


def hlrecdp(instance: Instance, aut: Automaton, *, engine: str = "auto") -> SolveResult:
    low = lower(aut)
    _require_plain(low)
    stats = CallStats.for_instance(instance.n)
    hld = decorate_hld(instance)
    choice = _pick_engine(engine, low)
    if choice == "compiled":
        block = _hlrecdp_kernel(instance, low, hld, stats)
    else:
        eng = Engine(instance, low, hld, rows=1, stats=stats)
        block = eng.solve_head(0, eng.identity())[:, 0, :]
    return SolveResult(_wrap_block(low, block), aut.initial, stats)


def _hlrecdp_kernel(instance, low, hld, stats):
    from . import _kernels

    flat = flatten(low)
    kptr, kflat = _flat_children(instance, hld)
    x0 = identity_block(1, instance.capacity)[0]
    cnt = np.zeros(4, dtype=np.int64)
    depth_cap = int(hld.light_depth.max()) + 2 if instance.n else 2
    block = _kernels.hlrecdp_kernel(
        instance.n,
        instance.capacity,
        np.asarray(instance.weights, dtype=np.int64),
        np.asarray(instance.profits, dtype=np.int64),
        np.asarray(hld.heavy_child, dtype=np.int64),
        kptr,
        kflat,
        flat.gen_kind,
        flat.gen_a,
        flat.gen_b,
        flat.src_ptr,
        flat.src_q,
        flat.src_sigma,
        flat.inert,
        flat.n_states,
        depth_cap,
        x0,
        stats.invocations_per_vertex,
        cnt,
    )
    _fold_counts(stats, cnt)
    return np.array(block)


def _fold_counts(stats, cnt):
    from ._kernels import CNT_CHAINS, CNT_CONVOLUTIONS, CNT_MAXIMA, CNT_SHIFT_ADDS

    stats.chains += int(cnt[CNT_CHAINS])
    stats.shift_adds += int(cnt[CNT_SHIFT_ADDS])
    stats.maxima += int(cnt[CNT_MAXIMA])
    stats.convolutions += int(cnt[CNT_CONVOLUTIONS])


def _flat_children(instance, hld=None):
    """Children flattened to (ptr, flat); heavy-first when hld is given."""
    n = instance.n
    ids = np.arange(1, n, dtype=np.int64)
    par = instance.parent[1:]
    if hld is not None:
        light = (hld.heavy_child[par] != ids).astype(np.int8)
        order = np.lexsort((ids, light, par))
    else:
        order = np.lexsort((ids, par))
    flat = ids[order]
    counts = np.bincount(par, minlength=n)
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=ptr[1:])
    return ptr, flat


# -- recdp ------------------------------------------------------------------


def recdp(
    instance: Instance,
    aut: Automaton,
    x0: ProfitArray,
    *,
    stats: CallStats | None = None,
) -> dict[str, ProfitArray]:
    """Array-threading recursion of the continuation ``x0`` through the tree,
    one state at a time, children in input order.  Returns the root array
    for every state; inert states return ``x0`` unchanged."""
    if len(x0) != instance.capacity + 1:
        raise SolverError(
            f"x0 has length {len(x0)}, expected capacity + 1 = {instance.capacity + 1}"
        )
    low = lower(aut)
    _require_plain(low)
    if stats is None:
        stats = CallStats.for_instance(instance.n)
    cap = instance.capacity
    w = instance.weights
    p = instance.profits
    children = instance.children
    inert = low.inert
    neg = np.full(cap + 1, _NEG, dtype=np.int64)
    neg.flags.writeable = False

    def shift_add(z, wu, pu):
        if wu > cap:
            return neg
        out = np.full(cap + 1, _NEG, dtype=np.int64)
        np.add(z[: cap + 1 - wu], pu, out=out[wu:])
        out[out < 0] = _NEG
        return out

    def state_result(u, qi, z):
        if inert[qi]:
            return z
        stats.invocations_per_vertex[u] += 1
        kids = children[u]
        d = len(kids)
        out = neg.copy()
        wu = int(w[u])
        pu = int(p[u])
        for g in low.generators:
            if not g.applicable(d):
                continue
            for q, sigma in g.sources:
                if q != qi:
                    continue
                for chain in _recdp_chains(g, kids, d, z, state_result, stats):
                    stats.chains += 1
                    cand = shift_add(chain, wu, pu) if sigma else chain
                    if sigma:
                        stats.shift_adds += 1
                    np.maximum(out, cand, out=out)
                    stats.maxima += 1
        return out

    height = int(instance.depth_array().max()) if instance.n else 0

    def run():
        return {
            q: ProfitArray(np.array(state_result(0, qi, x0.vals)))
            for qi, q in enumerate(low.state_names)
        }

    return _with_deep_stack(run, height)


def _recdp_chains(g, kids, d, z, state_result, stats):
    if g.kind == KIND_UNIFORM:
        (a,) = g.params
        cur = z
        for v in kids:
            cur = state_result(v, a, cur)
        yield cur
    elif g.kind == KIND_ONEHOT:
        a, b = g.params
        for pos in range(d):
            cur = z
            for i, v in enumerate(kids):
                cur = state_result(v, a if i == pos else b, cur)
            yield cur
    elif g.kind == KIND_PRODUCT:
        cur = z
        for v in kids:
            acc = None
            for s, _inc in g.params:  # increments rejected upstream
                cand = state_result(v, s, cur)
                if acc is None:
                    acc = cand
                else:
                    acc = np.maximum(acc, cand)
                    stats.maxima += 1
            cur = acc
        yield cur
    else:
        cur = z
        for v, s in zip(kids, g.params):
            cur = state_result(v, s, cur)
        yield cur


def _with_deep_stack(fn, height):
    """Run fn, on a dedicated big-stack thread when the recursion is deep."""
    if height < 400:
        return fn()
    result: list = []
    error: list = []
    limit = height * 3 + 10_000

    def target():
        old_limit = sys.getrecursionlimit()
        try:
            sys.setrecursionlimit(limit)
            result.append(fn())
        except BaseException as exc:  # propagated below
            error.append(exc)
        finally:
            sys.setrecursionlimit(old_limit)

    old_size = threading.stack_size(min(max(height * 2500, 32 << 20), 1 << 30))
    try:
        th = threading.Thread(target=target)
        th.start()
        th.join()
    finally:
        threading.stack_size(old_size)
    if error:
        raise error[0]
    return result[0]


# -- baseline ---------------------------------------------------------------


def baseline_dp(
    instance: Instance,
    aut: Automaton,
    *,
    witness: bool = True,
    engine: str = "auto",
) -> SolveResult:
    low = lower(aut)
    _require_plain(low)
    stats = CallStats.for_instance(instance.n)
    if engine == "auto":
        engine = "compiled" if low.kernel_ok and not witness else "python"
    if engine == "compiled":
        if witness:
            raise SolverError("witness reconstruction needs engine='python'")
        if not low.kernel_ok:
            raise SolverError(
                "compiled engine supports uniform/one-hot rules only; use engine='python'"
            )
        table = _baseline_kernel(instance, low, stats)
        result = SolveResult(_wrap_block(low, table[0]), aut.initial, stats)
        return result
    table, choice = _baseline_python(instance, low, stats, witness)
    result = SolveResult(_wrap_block(low, table[0]), aut.initial, stats)
    if witness:
        result.witness = _reconstruct_witness(instance, aut, low, table, choice, result)
    return result


def _baseline_kernel(instance, low, stats):
    from . import _kernels

    flat = flatten(low)
    cptr, cflat = _flat_children(instance)
    cnt = np.zeros(4, dtype=np.int64)
    max_deg = max((len(c) for c in instance.children), default=0)
    table = _kernels.baseline_kernel(
        instance.n,
        instance.capacity,
        np.asarray(instance.weights, dtype=np.int64),
        np.asarray(instance.profits, dtype=np.int64),
        cptr,
        cflat,
        flat.gen_kind,
        flat.gen_a,
        flat.gen_b,
        flat.src_ptr,
        flat.src_q,
        flat.src_sigma,
        flat.inert,
        flat.n_states,
        max(max_deg, 1),
        stats.invocations_per_vertex,
        cnt,
    )
    _fold_counts(stats, cnt)
    return table


def _conv_vec(a, b, cap, stats):
    """Dense max-plus convolution truncated at cap, like the compiled
    kernel: BOTTOM operands produce hugely negative sums that never win."""
    stats.convolutions += 1
    out = np.full(cap + 1, _NEG, dtype=np.int64)
    for c2 in range(cap + 1):
        seg = a[: cap + 1 - c2] + int(b[c2])
        np.maximum(out[c2:], seg, out=out[c2:])
    out[out < 0] = _NEG
    return out


def _product_states(g):
    return sorted({s for s, _ in g.params})


def _baseline_chains(g, u, table, kids, d, cap, stats, identity):
    """Yield (variant, vector) chains for one generator at vertex u.

    Variants number the concrete tuples: one-hot by special position,
    product by expansion index; convolution call sites mirror the compiled
    kernel so counters agree.
    """
    if g.kind == KIND_UNIFORM:
        (a,) = g.params
        acc = identity
        for i, v in enumerate(kids):
            child = table[v, a]
            acc = child if i == 0 else _conv_vec(acc, child, cap, stats)
        yield 0, acc
    elif g.kind == KIND_ONEHOT:
        a, b = g.params
        pref = [None] * max(d - 1, 0)
        for i in range(d - 1):
            child = table[kids[i], b]
            pref[i] = child if i == 0 else _conv_vec(pref[i - 1], child, cap, stats)
        suff = [None] * d
        for i in range(d - 1, 0, -1):
            child = table[kids[i], b]
            suff[i] = child if i == d - 1 else _conv_vec(child, suff[i + 1], cap, stats)
        for j in range(d):
            acc = table[kids[j], a]
            if j > 0:
                acc = _conv_vec(pref[j - 1], acc, cap, stats)
            if j < d - 1:
                acc = _conv_vec(acc, suff[j + 1], cap, stats)
            yield j, acc
    elif g.kind == KIND_PRODUCT:
        states = _product_states(g)
        if len(states) > 1:
            if d > _PRODUCT_DEGREE_LIMIT or len(states) ** d > _PRODUCT_TUPLE_LIMIT:
                raise SolverError(
                    f"PRODUCT rule of width {len(states)} cannot be expanded at a "
                    f"vertex of degree {d}; use recdp or hlrecdp"
                )
        for variant, tup in enumerate(itertools.product(states, repeat=d)):
            acc = identity
            for i, v in enumerate(kids):
                child = table[v, tup[i]]
                acc = child if i == 0 else _conv_vec(acc, child, cap, stats)
            yield variant, acc
    else:
        acc = identity
        for i, v in enumerate(kids):
            child = table[v, g.params[i]]
            acc = child if i == 0 else _conv_vec(acc, child, cap, stats)
        yield 0, acc


def _baseline_python(instance, low, stats, want_witness):
    n, cap = instance.n, instance.capacity
    Q = low.n_states
    table = np.full((n, Q, cap + 1), _NEG, dtype=np.int64)
    if want_witness:
        choice = {
            "g": np.full((n, Q, cap + 1), -1, dtype=np.int32),
            "v": np.zeros((n, Q, cap + 1), dtype=np.int32),
            "s": np.zeros((n, Q, cap + 1), dtype=np.int8),
        }
    else:
        choice = None
    identity = np.full(cap + 1, _NEG, dtype=np.int64)
    identity[0] = 0
    identity.flags.writeable = False

    for u in range(n - 1, -1, -1):
        stats.invocations_per_vertex[u] += 1
        for qi in range(Q):
            if low.inert[qi]:
                table[u, qi, 0] = 0
        kids = instance.children[u]
        d = len(kids)
        wu = int(instance.weights[u])
        pu = int(instance.profits[u])
        for gi, g in enumerate(low.generators):
            if not g.applicable(d):
                continue
            for variant, chain in _baseline_chains(
                g, u, table, kids, d, cap, stats, identity
            ):
                stats.chains += 1
                shifted = None
                for q, sigma in g.sources:
                    if sigma:
                        if shifted is None:
                            if wu > cap:
                                shifted = np.full(cap + 1, _NEG, dtype=np.int64)
                            else:
                                shifted = np.full(cap + 1, _NEG, dtype=np.int64)
                                np.add(chain[: cap + 1 - wu], pu, out=shifted[wu:])
                                shifted[shifted < 0] = _NEG
                        stats.shift_adds += 1
                        cand = shifted
                    else:
                        cand = chain
                    if want_witness:
                        better = cand > table[u, q]
                        if better.any():
                            choice["g"][u, q, better] = gi
                            choice["v"][u, q, better] = variant
                            choice["s"][u, q, better] = sigma
                    np.maximum(table[u, q], cand, out=table[u, q])
                    stats.maxima += 1
    return table, choice


def _tuple_for(g, variant, d):
    if g.kind == KIND_UNIFORM:
        return (g.params[0],) * d
    if g.kind == KIND_ONEHOT:
        a, b = g.params
        return tuple(a if i == variant else b for i in range(d))
    if g.kind == KIND_PRODUCT:
        states = _product_states(g)
        if d == 0:
            return ()
        return tuple(
            itertools.islice(itertools.product(states, repeat=d), variant, None)
        )[0]
    return g.params


def _reconstruct_witness(instance, aut, low, table, choice, result):
    optimum = result.optimum
    if optimum is INFEASIBLE:
        return None
    # earliest initial state achieving the optimum, then smallest weight
    root_q = root_c = None
    for q in aut.initial:
        bv = result.arrays[q].best_value()
        if bv is not INFEASIBLE and bv[0] == optimum:
            root_q, root_c = low.state_names.index(q), bv[1]
            break
    selected: list[int] = []
    no_op_stats = CallStats.for_instance(instance.n)
    stack = [(0, root_q, root_c)]
    while stack:
        u, qi, c = stack.pop()
        if low.inert[qi]:
            continue  # identity row: nothing selected below
        gi = int(choice["g"][u, qi, c])
        if gi < 0:
            raise InternalError("witness reconstruction hit an unset table cell")
        g = low.generators[gi]
        variant = int(choice["v"][u, qi, c])
        sigma = int(choice["s"][u, qi, c])
        if sigma:
            selected.append(u)
            c -= int(instance.weights[u])
        kids = instance.children[u]
        d = len(kids)
        tup = _tuple_for(g, variant, d)
        # recompute prefix folds of this one tuple and split the weight
        pref = [None] * (d + 1)
        pref[0] = np.full(instance.capacity + 1, _NEG, dtype=np.int64)
        pref[0][0] = 0
        for i in range(1, d + 1):
            pref[i] = _conv_vec(
                pref[i - 1], table[kids[i - 1], tup[i - 1]], instance.capacity, no_op_stats
            )
        for i in range(d, 0, -1):
            row = table[kids[i - 1], tup[i - 1]]
            target = pref[i][c]
            for ci in range(c + 1):
                if row[ci] >= 0 and pref[i - 1][c - ci] >= 0 and row[ci] + pref[i - 1][c - ci] == target:
                    stack.append((kids[i - 1], tup[i - 1], ci))
                    c -= ci
                    break
            else:
                raise InternalError("witness reconstruction failed to split weights")
    selected.sort()
    labels = [0] * instance.n
    for u in selected:
        labels[u] = 1
    total_w = sum(int(instance.weights[u]) for u in selected)
    total_p = sum(int(instance.profits[u]) for u in selected)
    if total_w > instance.capacity or total_p != optimum or not accepts(aut, instance, labels):
        raise InternalError("witness failed validation")
    return selected


# -- dispatch ---------------------------------------------------------------


def solve(instance: Instance, aut: Automaton, algorithm: str = "hlrecdp"):
    """Run one algorithm; returns (optimum or INFEASIBLE, CallStats)."""
    if algorithm == "baseline":
        res = baseline_dp(instance, aut, witness=False)
        return res.optimum, res.stats
    if algorithm == "hlrecdp":
        res = hlrecdp(instance, aut)
        return res.optimum, res.stats
    if algorithm == "recdp":
        stats = CallStats.for_instance(instance.n)
        x0 = ProfitArray.identity(instance.capacity)
        arrays = recdp(instance, aut, x0, stats=stats)
        best = INFEASIBLE
        for q in aut.initial:
            bv = arrays[q].best_value()
            if bv is not INFEASIBLE and (best is INFEASIBLE or bv[0] > best):
                best = bv[0]
        return best, stats
    if algorithm == "oracle":
        from .oracle import brute_force

        res = brute_force(instance, aut)
        best = res.array.best_value()
        stats = CallStats.for_instance(instance.n)
        return (INFEASIBLE if best is INFEASIBLE else best[0]), stats
    raise SolverError(f"unknown algorithm {algorithm!r} (choose from {', '.join(ALGORITHMS)})")
