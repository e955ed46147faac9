"""Rooted-tree knapsack instances and heavy-light decoration.

Vertices are 0..n-1 with vertex 0 the root and parent(i) < i for i >= 1, so a
plain reverse index sweep is already bottom-up.  Weights and profits are
nonnegative ints; capacity is a nonnegative int.  The 63-bit guard rejects
instances whose profit sums could leave the safe int64 range used by
:mod:`treeknap.profit_array`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError, InstanceError

_PROFIT_SUM_LIMIT = 2**62 - 1
_CAPACITY_LIMIT = 2**63 - 1


class Instance:
    """Immutable tree-knapsack instance."""

    __slots__ = ("n", "parent", "weights", "profits", "capacity", "children")

    def __init__(self, parent, weights, profits, capacity):
        parent = np.asarray(parent, dtype=np.int64)
        weights = np.asarray(weights, dtype=np.int64)
        profits = np.asarray(profits, dtype=np.int64)
        n = len(weights)
        if n == 0:
            raise InstanceError("instance must have at least one vertex", "length-mismatch")
        if len(parent) != n or len(profits) != n:
            raise InstanceError(
                f"parent/weights/profits lengths disagree ({len(parent)}/{n}/{len(profits)})",
                "length-mismatch",
            )
        if parent[0] != -1:
            raise InstanceError("vertex 0 is the root and must have parent -1", "parent-order")
        for i in range(1, n):
            if not 0 <= parent[i] < i:
                raise InstanceError(
                    f"parent({i}) = {int(parent[i])} violates parent(i) < i", "parent-order"
                )
        if np.any(weights < 0) or np.any(profits < 0):
            raise InstanceError("weights and profits must be nonnegative", "negative")
        if capacity < 0:
            raise InstanceError("capacity must be nonnegative", "capacity")
        if capacity > _CAPACITY_LIMIT:
            raise InstanceError("capacity exceeds the 63-bit guard", "overflow")
        max_p = int(profits.max()) if n else 0
        if n * max_p > _PROFIT_SUM_LIMIT:
            raise InstanceError(
                "n * max(profit) exceeds the 63-bit overflow guard", "overflow"
            )
        children: list[list[int]] = [[] for _ in range(n)]
        for i in range(1, n):
            children[int(parent[i])].append(i)
        self.n = n
        self.parent = parent
        self.weights = weights
        self.profits = profits
        self.capacity = int(capacity)
        self.children = tuple(tuple(c) for c in children)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.capacity == other.capacity
            and np.array_equal(self.parent, other.parent)
            and np.array_equal(self.weights, other.weights)
            and np.array_equal(self.profits, other.profits)
        )

    def __hash__(self):
        raise TypeError("Instance is not hashable")

    def __repr__(self) -> str:
        return f"Instance(n={self.n}, capacity={self.capacity})"

    def depth_array(self) -> np.ndarray:
        depth = np.zeros(self.n, dtype=np.int64)
        for i in range(1, self.n):
            depth[i] = depth[self.parent[i]] + 1
        return depth

    def height(self) -> int:
        return int(self.depth_array().max())


def build_tree(parents, weights, profits, capacity) -> Instance:
    """Build an instance from the parent list of vertices 1..n-1.

    ``parents`` has length n-1; entry j is the parent of vertex j+1.
    """
    full = [-1] + [int(p) for p in parents]
    return Instance(full, weights, profits, capacity)


@dataclass(frozen=True)
class HldDecoration:
    """Heavy-light decoration of an instance.

    heavy_child(u) is the child with the largest subtree (ties to the smallest
    index) or -1 at leaves.  An edge to a non-heavy child is light;
    light_depth(u) counts light edges on the root-to-u path.  heavy_paths
    partitions the vertices into maximal heavy paths, listed root-first and
    ordered by head index.
    """

    size: np.ndarray
    heavy_child: np.ndarray
    light_depth: np.ndarray
    heavy_paths: tuple[tuple[int, ...], ...] = field(repr=False)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HldDecoration):
            return NotImplemented
        return (
            np.array_equal(self.size, other.size)
            and np.array_equal(self.heavy_child, other.heavy_child)
            and np.array_equal(self.light_depth, other.light_depth)
            and self.heavy_paths == other.heavy_paths
        )


def decorate_hld(instance: Instance) -> HldDecoration:
    # plain lists: python-int arithmetic here is several times faster than
    # numpy scalar indexing, and this runs once per solve
    n = instance.n
    par = instance.parent.tolist()
    size = [1] * n
    for i in range(n - 1, 0, -1):
        size[par[i]] += size[i]
    heavy = [-1] * n
    for u, kids in enumerate(instance.children):
        best, best_size = -1, 0
        for v in kids:
            if size[v] > best_size:  # ties keep the smallest index: children ascend
                best, best_size = v, size[v]
        heavy[u] = best
    light_depth = [0] * n
    for i in range(1, n):
        p = par[i]
        light_depth[i] = light_depth[p] + (0 if heavy[p] == i else 1)
    heads = [u for u in range(n) if u == 0 or heavy[par[u]] != u]
    paths = []
    for h in heads:  # ascending: range order
        path = [h]
        while heavy[path[-1]] != -1:
            path.append(heavy[path[-1]])
        paths.append(tuple(path))
    return HldDecoration(
        np.asarray(size, dtype=np.int64),
        np.asarray(heavy, dtype=np.int64),
        np.asarray(light_depth, dtype=np.int64),
        tuple(paths),
    )


def reordered_children(instance: Instance, hld: HldDecoration, u: int) -> tuple[int, ...]:
    """Children of u with the heavy child first, then the rest ascending."""
    h = int(hld.heavy_child[u])
    if h == -1:
        return ()
    return (h,) + tuple(v for v in instance.children[u] if v != h)


# -- text format ------------------------------------------------------------
#
#   line 1: n C
#   line 2: parent(1) ... parent(n-1)     (omitted entirely when n == 1)
#   line 3: w(0) ... w(n-1)
#   line 4: p(0) ... p(n-1)
#
# '#' starts a comment; blank lines are ignored.


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def _parse_ints(line: str, lineno: int, what: str, expected: int | None = None) -> list[int]:
    parts = line.split()
    try:
        values = [int(tok) for tok in parts]
    except ValueError:
        raise FormatError(f"{what}: expected integers, got {line!r}", lineno) from None
    if expected is not None and len(values) != expected:
        raise FormatError(
            f"{what}: expected {expected} entries, got {len(values)}", lineno
        )
    return values


def parse_instance(text: str) -> Instance:
    lines = list(_content_lines(text))
    if not lines:
        raise FormatError("empty instance file")
    lineno, header = lines[0]
    head = _parse_ints(header, lineno, "header", 2)
    n, capacity = head
    if n < 1:
        raise FormatError(f"n must be >= 1, got {n}", lineno)
    body = lines[1:]
    need = 3 if n > 1 else 2  # parents line present iff n > 1
    if len(body) != need:
        raise FormatError(
            f"expected {need} data lines after the header, got {len(body)}",
            body[-1][0] if body else lineno,
        )
    if n > 1:
        pno, pline = body[0]
        parents = _parse_ints(pline, pno, "parents", n - 1)
        body = body[1:]
    else:
        parents = []
    wno, wline = body[0]
    weights = _parse_ints(wline, wno, "weights", n)
    pno, pline = body[1]
    profits = _parse_ints(pline, pno, "profits", n)
    try:
        return build_tree(parents, weights, profits, capacity)
    except InstanceError as exc:
        raise FormatError(str(exc)) from exc


def serialize_instance(instance: Instance) -> str:
    lines = [f"{instance.n} {instance.capacity}"]
    if instance.n > 1:
        lines.append(" ".join(str(int(p)) for p in instance.parent[1:]))
    lines.append(" ".join(str(int(w)) for w in instance.weights))
    lines.append(" ".join(str(int(p)) for p in instance.profits))
    return "\n".join(lines) + "\n"
