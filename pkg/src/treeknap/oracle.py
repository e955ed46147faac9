"""Brute-force ground truth, instance enumeration, and seeded generation.

The oracle stays deliberately dumb: it enumerates label vectors and reuses
``automaton.accepts`` for filtering, so acceptance has a single
implementation exercised from two directions (solver recurrences vs direct
enumeration).  An independent backtracking run-search lives in the test
suite to cover ``accepts`` itself on tiny trees.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .automaton import Automaton, accepts
from .errors import SolverError
from .profit_array import _NEG, INFEASIBLE, ProfitArray
from .tree import Instance

_BRUTE_LIMIT = 25
_KSUBTREE_N_LIMIT = 12
_KSUBTREE_K_LIMIT = 4
_ENUM_LIMIT = 8


@dataclass
class OracleResult:
    array: ProfitArray
    best_sets: list[list[int]]  # all optimum-achieving sets, lexicographic
    witness_per_weight: dict[int, list[int]]  # smallest-profit-maximal set per weight

    @property
    def optimum(self):
        bv = self.array.best_value()
        return INFEASIBLE if bv is INFEASIBLE else bv[0]


def brute_force(instance: Instance, aut: Automaton) -> OracleResult:
    n = instance.n
    if n > _BRUTE_LIMIT:
        raise SolverError(f"brute force is guarded to n <= {_BRUTE_LIMIT}, got {n}")
    cap = instance.capacity
    w = [int(x) for x in instance.weights]
    p = [int(x) for x in instance.profits]
    vals = np.full(cap + 1, _NEG, dtype=np.int64)
    witness_per_weight: dict[int, list[int]] = {}
    labels = [0] * n
    for mask in range(1 << n):
        tw = tp = 0
        for i in range(n):
            bit = (mask >> i) & 1
            labels[i] = bit
            if bit:
                tw += w[i]
                tp += p[i]
        if tw > cap:
            continue
        if not accepts(aut, instance, labels):
            continue
        if tp > vals[tw]:
            vals[tw] = tp
            witness_per_weight[tw] = [i for i in range(n) if (mask >> i) & 1]
    arr = ProfitArray(vals)
    best = arr.best_value()
    best_sets: list[list[int]] = []
    if best is not INFEASIBLE:
        opt = best[0]
        for mask in range(1 << n):
            tw = tp = 0
            for i in range(n):
                bit = (mask >> i) & 1
                labels[i] = bit
                if bit:
                    tw += w[i]
                    tp += p[i]
            if tw <= cap and tp == opt and accepts(aut, instance, labels):
                best_sets.append([i for i in range(n) if (mask >> i) & 1])
    return OracleResult(arr, best_sets, witness_per_weight)


# -- k-subtree ground truth -------------------------------------------------


def extract_subtree(instance: Instance, root: int) -> tuple[Instance, list[int]]:
    """The rooted subtree T_root as a standalone instance.

    Vertices keep their relative order (ancestors before descendants holds
    automatically since parent(i) < i).  Returns (sub_instance, old_ids).
    """
    members = [root]
    in_sub = {root}
    for v in range(root + 1, instance.n):
        if int(instance.parent[v]) in in_sub:
            members.append(v)
            in_sub.add(v)
    new_id = {old: i for i, old in enumerate(members)}
    parents = [new_id[int(instance.parent[v])] for v in members[1:]]
    from .tree import build_tree

    sub = build_tree(
        parents,
        [int(instance.weights[v]) for v in members],
        [int(instance.profits[v]) for v in members],
        instance.capacity,
    )
    return sub, members


def _is_ancestor_matrix(instance: Instance) -> list[set[int]]:
    """ancestors[v] = set of strict ancestors of v."""
    anc: list[set[int]] = [set() for _ in range(instance.n)]
    for v in range(1, instance.n):
        par = int(instance.parent[v])
        anc[v] = anc[par] | {par}
    return anc


def brute_force_ksubtree(instance: Instance, aut: Automaton, k: int):
    """best[l] for l in 0..k: max total profit of exactly l pairwise
    non-ancestral subtree roots, each carrying a selection of its full
    rooted subtree accepted by the automaton, under one shared capacity."""
    n = instance.n
    if n > _KSUBTREE_N_LIMIT or k > _KSUBTREE_K_LIMIT:
        raise SolverError(
            f"k-subtree brute force is guarded to n <= {_KSUBTREE_N_LIMIT}, "
            f"k <= {_KSUBTREE_K_LIMIT}"
        )
    if k < 0:
        raise SolverError("k must be nonnegative")
    cap = instance.capacity
    anc = _is_ancestor_matrix(instance)
    sub_arrays: dict[int, np.ndarray] = {}
    for v in range(n):
        sub, _ = extract_subtree(instance, v)
        sub_arrays[v] = brute_force(sub, aut).array.vals
    best = [INFEASIBLE] * (k + 1)
    best[0] = 0
    for l in range(1, k + 1):
        for roots in itertools.combinations(range(n), l):
            if any(a in anc[b] for a in roots for b in roots if a != b):
                continue
            acc = np.full(cap + 1, _NEG, dtype=np.int64)
            acc[0] = 0
            for v in roots:
                nxt = np.full(cap + 1, _NEG, dtype=np.int64)
                row = sub_arrays[v]
                for c2 in np.nonzero(row >= 0)[0]:
                    seg = acc[: cap + 1 - c2] + int(row[c2])
                    np.maximum(nxt[c2:], seg, out=nxt[c2:])
                nxt[nxt < 0] = _NEG
                acc = nxt
            top = int(acc.max())
            if top >= 0 and (best[l] is INFEASIBLE or top > best[l]):
                best[l] = top
    return best


# -- exhaustive tree enumeration --------------------------------------------


def enumerate_trees(n: int):
    """All prod_{i=1}^{n-1} i parent sequences with parent(i) < i, in
    lexicographic order, as lists of length n-1 (parents of vertices 1..)."""
    if n > _ENUM_LIMIT:
        raise SolverError(f"tree enumeration is guarded to n <= {_ENUM_LIMIT}, got {n}")
    if n <= 1:
        yield []
        return
    for parents in itertools.product(*(range(i) for i in range(1, n))):
        yield list(parents)


# -- seeded generation ------------------------------------------------------

SHAPES = ("path", "star", "binary", "caterpillar", "random")


def shape_parents(shape: str, n: int, rng: np.random.Generator | None = None) -> list[int]:
    """Parent list (vertices 1..n-1) for a named tree shape."""
    if n < 1:
        raise SolverError("n must be at least 1")
    if shape == "path":
        return [i - 1 for i in range(1, n)]
    if shape == "star":
        return [0] * (n - 1)
    if shape == "binary":
        return [(i - 1) // 2 for i in range(1, n)]
    if shape == "caterpillar":
        # spine on even vertices, one leaf hanging off each spine vertex
        return [i - 2 if i % 2 == 0 else i - 1 for i in range(1, n)]
    if shape == "random":
        if rng is None:
            raise SolverError("random shape needs a seeded generator")
        return [int(rng.integers(0, i)) for i in range(1, n)]
    raise SolverError(f"unknown shape {shape!r} (choose from {', '.join(SHAPES)})")


def random_instance(
    n: int,
    *,
    shape: str = "random",
    max_weight: int = 3,
    max_profit: int = 7,
    capacity: int | None = None,
    max_capacity: int = 9,
    rng: np.random.Generator | None = None,
    seed: int | None = None,
) -> Instance:
    if rng is None:
        rng = np.random.default_rng(seed)
    parents = shape_parents(shape, n, rng)
    weights = [int(rng.integers(0, max_weight + 1)) for _ in range(n)]
    profits = [int(rng.integers(0, max_profit + 1)) for _ in range(n)]
    if capacity is None:
        capacity = int(rng.integers(0, max_capacity + 1))
    from .tree import build_tree

    return build_tree(parents, weights, profits, capacity)
