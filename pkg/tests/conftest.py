"""Shared fixtures and independent reference implementations.

The two reference oracles here (``run_search_accepts`` and
``complement_oracle_row``) are deliberately written against the rule
templates directly, materializing tuples and backtracking, so they share no
evaluation machinery with the code under test.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np
import pytest

from treeknap import BUILTIN_NAMES, build_tree, builtin, pointwise_max
from treeknap.automaton import Explicit, OneHot, Product, Uniform
from treeknap.profit_array import _NEG


@pytest.fixture
def f1():
    """Star: root 0 with children 1, 2; capacity 3."""
    return build_tree([0, 0], [1, 2, 1], [2, 4, 3], 3)


@pytest.fixture
def f2():
    """Path 0-1-2; capacity 2."""
    return build_tree([0, 1], [1, 1, 1], [2, 3, 4], 2)


@pytest.fixture
def builtins_by_name():
    return {name: builtin(name) for name in BUILTIN_NAMES}


def merged_root_array(arrays, initial):
    """Pointwise max of the root arrays over the initial states."""
    acc = arrays[initial[0]]
    for q in initial[1:]:
        acc = pointwise_max(acc, arrays[q])
    return acc


def random_automaton(
    rng,
    *,
    shapes=("uniform", "onehot", "product"),
    max_states=3,
    allow_increments=False,
):
    """Small random automaton drawing rule shapes from ``shapes``.

    Explicit shapes are order-sensitive under child reordering, so they are
    excluded by default; pass them in only for order-preserving solvers or
    path instances.
    """
    from treeknap import Automaton, Rule

    k = int(rng.integers(1, max_states + 1))
    states = tuple(f"q{i}" for i in range(k))
    rules = []
    seen = set()
    for _ in range(int(rng.integers(1, 2 * k + 3))):
        q = states[int(rng.integers(k))]
        sym = int(rng.integers(2))
        kind = shapes[int(rng.integers(len(shapes)))]
        if kind == "uniform":
            shape = Uniform(states[int(rng.integers(k))])
        elif kind == "onehot":
            shape = OneHot(states[int(rng.integers(k))], states[int(rng.integers(k))])
        elif kind == "product":
            m = int(rng.integers(1, k + 1))
            chosen = rng.choice(k, size=m, replace=False)
            shape = Product(
                tuple(
                    (states[int(i)], int(rng.integers(2)) if allow_increments else 0)
                    for i in chosen
                )
            )
        else:
            d = int(rng.integers(0, 3))
            shape = Explicit(tuple(states[int(rng.integers(k))] for _ in range(d)))
        key = (q, sym, shape)
        if key in seen:
            continue
        seen.add(key)
        rules.append(Rule(q, sym, shape))
    m = int(rng.integers(1, k + 1))
    init = tuple(states[int(i)] for i in sorted(rng.choice(k, size=m, replace=False)))
    return Automaton(states, init, tuple(rules))


def _rule_tuples(aut, state, symbol, d):
    """Materialize every concrete child-state tuple of arity d (no dedup)."""
    for rule in aut.rules:
        if rule.state != state or rule.symbol != symbol:
            continue
        shape = rule.shape
        if isinstance(shape, Uniform):
            yield (shape.state,) * d
        elif isinstance(shape, OneHot):
            for pos in range(d):
                yield tuple(
                    shape.special if j == pos else shape.default for j in range(d)
                )
        elif isinstance(shape, Product):
            yield from itertools.product([s for s, _ in shape.options], repeat=d)
        elif isinstance(shape, Explicit):
            if len(shape.states) == d:
                yield shape.states


def run_search_accepts(aut, instance, labels):
    """Top-down backtracking run search over materialized rule tuples.

    Exponential; only for tiny trees.  Used to cross-check ``accepts``.
    """

    def ok(v, q):
        kids = instance.children[v]
        for t in _rule_tuples(aut, q, labels[v], len(kids)):
            if all(ok(c, t[i]) for i, c in enumerate(kids)):
                return True
        return False

    return any(ok(0, q) for q in aut.initial)


def subtree_vertices(instance, u):
    """Vertex set of the rooted subtree at u (parent(i) < i makes this a scan)."""
    members = {u}
    for v in range(u + 1, instance.n):
        if int(instance.parent[v]) in members:
            members.add(v)
    return members


def complement_oracle_row(instance, aut, u, q):
    """Exact-weight best-profit array over selections outside the subtree of u,
    where some run succeeds everywhere outside that subtree, hands state ``q``
    to u's parent slot, and leaves u's own slot unconstrained (wildcard hole).

    Subset enumeration over the outside vertices plus a backtracking run
    search with the hole skipped.  Exponential; only for tiny trees.
    """
    n, cap = instance.n, instance.capacity
    in_sub = subtree_vertices(instance, u)
    outside = [v for v in range(n) if v not in in_sub]
    p = int(instance.parent[u])
    rules_by = {}
    for r in aut.rules:
        rules_by.setdefault((r.state, r.symbol), []).append(r.shape)
    vals = np.full(cap + 1, _NEG, dtype=np.int64)
    for mask in range(1 << len(outside)):
        labels = {v: (mask >> i) & 1 for i, v in enumerate(outside)}
        tw = sum(int(instance.weights[v]) for v in outside if labels[v])
        if tw > cap:
            continue
        tp = sum(int(instance.profits[v]) for v in outside if labels[v])

        @lru_cache(maxsize=None)
        def ok(v, s):
            if v == p and s != q:
                return False
            kids = [c for c in instance.children[v] if c != u]
            hole = u in instance.children[v]
            d = len(kids) + (1 if hole else 0)
            full = list(instance.children[v])
            for shape in rules_by.get((s, labels[v]), []):
                if isinstance(shape, Uniform):
                    if all(ok(c, shape.state) for c in kids):
                        return True
                elif isinstance(shape, OneHot):
                    if d == 0:
                        continue
                    for spos in range(d):
                        good = True
                        for i, c in enumerate(full):
                            if c == u:
                                continue
                            want = shape.special if i == spos else shape.default
                            if not ok(c, want):
                                good = False
                                break
                        if good:
                            return True
                elif isinstance(shape, Product):
                    if all(any(ok(c, s2) for s2, _ in shape.options) for c in kids):
                        return True
                else:
                    if len(shape.states) != d:
                        continue
                    if all(c == u or ok(c, shape.states[i]) for i, c in enumerate(full)):
                        return True
            return False

        if any(ok(0, q0) for q0 in aut.initial):
            if tp > vals[tw]:
                vals[tw] = tp
        ok.cache_clear()
    return vals
