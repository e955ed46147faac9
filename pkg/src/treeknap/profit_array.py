"""Exact-weight profit arrays over the max-plus semiring.

A :class:`ProfitArray` of capacity C holds, for every weight c in 0..C, the
best profit of a solution of weight *exactly* c, or BOTTOM when no such
solution exists.  BOTTOM is the semiring zero: it absorbs addition and is the
identity of max.  Publicly BOTTOM is represented as ``None`` (and serialized
as ``-inf``); it is never a number that could participate in arithmetic.

Internally each row is an int64 vector where every infeasible cell is pinned
to the single sentinel value ``_NEG`` = -2^62 and feasible cells are >= 0.
Every operation renormalizes (any cell < 0 is pinned back to ``_NEG``), so a
sentinel never accumulates across operations, and a single addition of two
in-range cells cannot wrap: cells lie in [-2^62, 2^62) once instances pass
the 63-bit validation guard, so sums lie within int64.

:class:`KTable` stacks k+1 such rows; row l tracks solutions whose component
count is exactly l.  Count increments shift rows downward and drop overflow.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

_NEG = -(2**62)


class _Infeasible:
    """Singleton returned when a query has no feasible solution."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFEASIBLE"


INFEASIBLE = _Infeasible()


def _renormalize(vals: np.ndarray) -> np.ndarray:
    vals[vals < 0] = _NEG
    return vals


class ProfitArray:
    """Length C+1 max-plus vector with exact-weight semantics."""

    __slots__ = ("vals",)

    def __init__(self, vals: np.ndarray):
        # Takes ownership of `vals` (int64, already normalized).
        self.vals = vals

    # -- constructors -------------------------------------------------------

    @staticmethod
    def identity(capacity: int) -> "ProfitArray":
        """The empty-selection array: 0 at weight 0, BOTTOM elsewhere."""
        if capacity < 0:
            raise ValueError("capacity must be nonnegative")
        vals = np.full(capacity + 1, _NEG, dtype=np.int64)
        vals[0] = 0
        return ProfitArray(vals)

    @staticmethod
    def bottom(capacity: int) -> "ProfitArray":
        """All-BOTTOM array (no feasible solution at any weight)."""
        if capacity < 0:
            raise ValueError("capacity must be nonnegative")
        return ProfitArray(np.full(capacity + 1, _NEG, dtype=np.int64))

    @staticmethod
    def from_values(values: Sequence[int | None]) -> "ProfitArray":
        """Build from a list where ``None`` marks BOTTOM entries."""
        vals = np.fromiter(
            (_NEG if v is None else int(v) for v in values),
            dtype=np.int64,
            count=len(values),
        )
        if np.any((vals < 0) & (vals != _NEG)):
            raise ValueError("profit values must be nonnegative")
        return ProfitArray(vals)

    # -- queries ------------------------------------------------------------

    @property
    def capacity(self) -> int:
        return len(self.vals) - 1

    def __len__(self) -> int:
        return len(self.vals)

    def __getitem__(self, c: int) -> int | None:
        v = int(self.vals[c])
        return None if v < 0 else v

    def tolist(self) -> list[int | None]:
        return [None if v < 0 else int(v) for v in self.vals]

    def is_bottom(self) -> bool:
        return bool(np.all(self.vals < 0))

    def best_value(self):
        """Max feasible entry with its smallest witnessing weight.

        Returns ``(value, weight)`` or :data:`INFEASIBLE` if every entry is
        BOTTOM.
        """
        best = int(self.vals.max())
        if best < 0:
            return INFEASIBLE
        weight = int(np.argmax(self.vals == best))
        return best, weight

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProfitArray):
            return NotImplemented
        return np.array_equal(self.vals, other.vals)

    def __hash__(self):
        raise TypeError("ProfitArray is not hashable")

    def __repr__(self) -> str:
        inner = ", ".join("⊥" if v < 0 else str(v) for v in self.vals[:12])
        if len(self.vals) > 12:
            inner += ", ..."
        return f"ProfitArray([{inner}])"

    # -- semiring operations ------------------------------------------------

    def copy(self) -> "ProfitArray":
        return ProfitArray(self.vals.copy())

    def max_with(self, other: "ProfitArray") -> "ProfitArray":
        """Pointwise max (semilattice join); BOTTOM is the identity."""
        return ProfitArray(np.maximum(self.vals, other.vals))

    def shift_add(self, sigma: int, weight: int, profit: int) -> "ProfitArray":
        """Account for one item selected iff sigma == 1.

        For sigma == 0 this is the identity.  For sigma == 1 entries move up
        by ``weight`` (entries that would exceed the capacity fall off) and
        gain ``profit``; weight slots below ``weight`` become BOTTOM.
        """
        if sigma == 0:
            return self
        out = np.full_like(self.vals, _NEG)
        if weight <= self.capacity:
            end = len(self.vals) - weight
            np.add(self.vals[:end], profit, out=out[weight:])
        return ProfitArray(_renormalize(out))


def pointwise_max(a: ProfitArray, b: ProfitArray) -> ProfitArray:
    return a.max_with(b)


def convolve(a: ProfitArray, b: ProfitArray) -> ProfitArray:
    """Max-plus convolution: out[c] = max over c1+c2=c of a[c1]+b[c2].

    Naive O(C^2) evaluation, vectorized one shift at a time; infeasible rows
    of ``b`` are skipped outright.
    """
    if a.capacity != b.capacity:
        raise ValueError("convolve requires equal capacities")
    out = np.full_like(a.vals, _NEG)
    av = a.vals
    for c2 in np.nonzero(b.vals >= 0)[0]:
        seg = av[: len(av) - c2] + b.vals[c2]
        np.maximum(out[c2:], seg, out=out[c2:])
    return ProfitArray(_renormalize(out))


class KTable:
    """k+1 stacked profit rows; row l holds solutions with exactly l components."""

    __slots__ = ("vals",)

    def __init__(self, vals: np.ndarray):
        self.vals = vals  # shape (k+1, C+1) int64, normalized

    @staticmethod
    def identity(k: int, capacity: int) -> "KTable":
        """Row 0 is the identity array; rows 1..k are all-BOTTOM."""
        if k < 0:
            raise ValueError("k must be nonnegative")
        vals = np.full((k + 1, capacity + 1), _NEG, dtype=np.int64)
        vals[0, 0] = 0
        return KTable(vals)

    @staticmethod
    def bottom(k: int, capacity: int) -> "KTable":
        if k < 0:
            raise ValueError("k must be nonnegative")
        return KTable(np.full((k + 1, capacity + 1), _NEG, dtype=np.int64))

    @property
    def k(self) -> int:
        return self.vals.shape[0] - 1

    @property
    def capacity(self) -> int:
        return self.vals.shape[1] - 1

    def row(self, l: int) -> ProfitArray:
        return ProfitArray(self.vals[l].copy())

    def copy(self) -> "KTable":
        return KTable(self.vals.copy())

    def max_with(self, other: "KTable") -> "KTable":
        return KTable(np.maximum(self.vals, other.vals))

    def shift_add(self, sigma: int, weight: int, profit: int) -> "KTable":
        """Item accounting applied to every row identically."""
        if sigma == 0:
            return self
        out = np.full_like(self.vals, _NEG)
        if weight <= self.capacity:
            end = self.vals.shape[1] - weight
            np.add(self.vals[:, :end], profit, out=out[:, weight:])
        return KTable(_renormalize(out))

    def shift_count(self, inc: int) -> "KTable":
        """Shift rows down by ``inc`` component counts; overflow rows drop."""
        if inc == 0:
            return self
        if inc < 0:
            raise ValueError("count increment must be nonnegative")
        out = np.full_like(self.vals, _NEG)
        if inc <= self.k:
            out[inc:] = self.vals[: self.vals.shape[0] - inc]
        return KTable(out)

    def __eq__(self, other) -> bool:
        if not isinstance(other, KTable):
            return NotImplemented
        return np.array_equal(self.vals, other.vals)

    def __hash__(self):
        raise TypeError("KTable is not hashable")

    def __repr__(self) -> str:
        return f"KTable(k={self.k}, capacity={self.capacity})"


def dump_array(a: ProfitArray) -> str:
    """Serialize as one ``c value`` line per index, ``-inf`` for BOTTOM."""
    lines = []
    for c, v in enumerate(a.vals):
        lines.append(f"{c} {'-inf' if v < 0 else int(v)}")
    return "\n".join(lines) + "\n"


def parse_array(text: str) -> ProfitArray:
    """Inverse of :func:`dump_array`."""
    entries: dict[int, int | None] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"expected 'c value', got {raw!r}")
        c = int(parts[0])
        entries[c] = None if parts[1] == "-inf" else int(parts[1])
    if sorted(entries) != list(range(len(entries))):
        raise ValueError("array dump must cover indices 0..C contiguously")
    return ProfitArray.from_values([entries[c] for c in range(len(entries))])
