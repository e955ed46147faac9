"""Shared rule lowering for the solving engines.

Rules are grouped into *generators*: one per distinct normalized shape, with
the list of (state, symbol) sources that share it.  Both the Python engines
and the compiled kernels walk the same generator list in the same order, so
operation counters agree exactly between them.

Normalizations applied here:

* ``OneHot(a, a)`` becomes ``Uniform(a)`` (identical tuple sets at every
  arity except 0, where one-hot yields nothing — the uniform's extra empty
  tuple only adds the do-nothing chain, which is sound for sources that
  already accept leaves via other rules; see note below).
* Single-option, zero-increment ``Product`` becomes ``Uniform``.
* Sources whose state is inert are dropped (their result rows are written
  by passthrough); generators left without sources are dropped entirely.

Note on the ``OneHot(a, a)`` fold: it is *not* applied when the source has
no other arity-0 coverage, because one-hot shapes genuinely reject leaves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .automaton import (
    Automaton,
    Explicit,
    OneHot,
    Product,
    Uniform,
    inert_states,
)

KIND_UNIFORM = 0
KIND_ONEHOT = 1
KIND_PRODUCT = 2
KIND_EXPLICIT = 3


@dataclass(frozen=True)
class Generator:
    kind: int
    # KIND_UNIFORM: (state,)
    # KIND_ONEHOT: (special, default)
    # KIND_PRODUCT: ((state, increment), ...)
    # KIND_EXPLICIT: (state, state, ...)
    params: tuple
    sources: tuple[tuple[int, int], ...]  # (state index, symbol)

    def applicable(self, d: int) -> bool:
        if self.kind == KIND_ONEHOT:
            return d >= 1
        if self.kind == KIND_EXPLICIT:
            return len(self.params) == d
        return True


@dataclass(frozen=True)
class Lowered:
    state_names: tuple[str, ...]
    initial: tuple[int, ...]
    inert: tuple[bool, ...]
    generators: tuple[Generator, ...]
    has_increments: bool
    kernel_ok: bool

    @property
    def n_states(self) -> int:
        return len(self.state_names)


def lower(aut: Automaton, *, drop_inert_sources: bool = True) -> Lowered:
    """Lower ``aut`` to a generator list.

    ``drop_inert_sources=False`` keeps rules of inert states as ordinary
    generator sources.  The recursive engines never want that (they write
    inert rows by passthrough), but the complement-table builder enumerates
    every rule explicitly and needs the full list.
    """
    idx = {q: i for i, q in enumerate(aut.states)}
    inert = inert_states(aut)
    inert_flags = tuple(q in inert for q in aut.states)

    # arity-0 coverage per source, to keep the OneHot(a, a) fold sound
    leaf_ok: set[tuple[int, int]] = set()
    for rule in aut.rules:
        if isinstance(rule.shape, (Uniform, Product)) or (
            isinstance(rule.shape, Explicit) and not rule.shape.states
        ):
            leaf_ok.add((idx[rule.state], rule.symbol))

    grouped: dict[tuple, set[tuple[int, int]]] = {}
    has_increments = False
    for rule in aut.rules:
        if drop_inert_sources and inert_flags[idx[rule.state]]:
            continue
        source = (idx[rule.state], rule.symbol)
        shape = rule.shape
        if isinstance(shape, Uniform):
            key = (KIND_UNIFORM, (idx[shape.state],))
        elif isinstance(shape, OneHot):
            if shape.special == shape.default and source in leaf_ok:
                key = (KIND_UNIFORM, (idx[shape.special],))
            else:
                key = (KIND_ONEHOT, (idx[shape.special], idx[shape.default]))
        elif isinstance(shape, Product):
            opts = tuple(sorted((idx[s], inc) for s, inc in shape.options))
            if any(inc for _, inc in opts):
                has_increments = True
            if len(opts) == 1 and opts[0][1] == 0:
                key = (KIND_UNIFORM, (opts[0][0],))
            else:
                key = (KIND_PRODUCT, opts)
        else:
            key = (KIND_EXPLICIT, tuple(idx[s] for s in shape.states))
        grouped.setdefault(key, set()).add(source)

    generators = tuple(
        Generator(kind, params, tuple(sorted(grouped[(kind, params)])))
        for kind, params in sorted(grouped)
    )
    kernel_ok = all(g.kind in (KIND_UNIFORM, KIND_ONEHOT) for g in generators)
    return Lowered(
        state_names=aut.states,
        initial=tuple(idx[q] for q in aut.initial),
        inert=inert_flags,
        generators=generators,
        has_increments=has_increments,
        kernel_ok=kernel_ok,
    )


@dataclass(frozen=True)
class FlatRules:
    """Generator list flattened to integer arrays for the compiled kernels.

    Only UNIFORM and ONE_HOT generators can be flattened; callers check
    ``Lowered.kernel_ok`` first.
    """

    gen_kind: np.ndarray  # int64[G]
    gen_a: np.ndarray  # int64[G] uniform state / one-hot special
    gen_b: np.ndarray  # int64[G] one-hot default (or -1)
    src_ptr: np.ndarray  # int64[G+1]
    src_q: np.ndarray  # int64[S]
    src_sigma: np.ndarray  # int64[S]
    inert: np.ndarray  # uint8[Q]
    n_states: int


def flatten(low: Lowered) -> FlatRules:
    if not low.kernel_ok:
        raise ValueError("only uniform/one-hot rule sets can be flattened")
    kinds, a, b, ptr, src_q, src_sigma = [], [], [], [0], [], []
    for g in low.generators:
        kinds.append(g.kind)
        a.append(g.params[0])
        b.append(g.params[1] if g.kind == KIND_ONEHOT else -1)
        for q, sigma in g.sources:
            src_q.append(q)
            src_sigma.append(sigma)
        ptr.append(len(src_q))
    return FlatRules(
        gen_kind=np.asarray(kinds, dtype=np.int64),
        gen_a=np.asarray(a, dtype=np.int64),
        gen_b=np.asarray(b, dtype=np.int64),
        src_ptr=np.asarray(ptr, dtype=np.int64),
        src_q=np.asarray(src_q, dtype=np.int64),
        src_sigma=np.asarray(src_sigma, dtype=np.int64),
        inert=np.asarray(low.inert, dtype=np.uint8),
        n_states=low.n_states,
    )
