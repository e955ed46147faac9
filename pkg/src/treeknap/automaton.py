"""Non-deterministic top-down tree automata over the label alphabet {0, 1}.

A rule maps a source (state, label) pair to child-state tuples via one of
four shape templates:

* ``Uniform(q)`` — at arity d the single tuple (q, ..., q); at arity 0 the
  empty tuple.
* ``OneHot(special, default)`` — at arity d >= 1 the d tuples with ``special``
  in one position and ``default`` elsewhere; nothing at arity 0.
* ``Product(options)`` — options are (state, count_increment) pairs with
  increment in {0, 1}; at arity d every combination of options, one per
  child.  Never materialized for d > 0; at arity 0 the empty tuple.
  Increments only matter to the k-subtree solver's count dimension.
* ``Explicit(states)`` — exactly that tuple, at its own arity only.

A run assigns an initial state to the root and extends top-down: at each
vertex some rule for (state, label) at the vertex's child count fires and
hands states to the children.  The automaton accepts a labeling if some run
covers the whole tree.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .errors import AutomatonError, FormatError
from .tree import Instance

_SATURATE = 2**63 - 1


@dataclass(frozen=True)
class Uniform:
    state: str


@dataclass(frozen=True)
class OneHot:
    special: str
    default: str


@dataclass(frozen=True)
class Product:
    options: tuple[tuple[str, int], ...]

    def __post_init__(self):
        # normalize: dedup and sort for stable equality across declarations
        opts = tuple(sorted(set(self.options)))
        object.__setattr__(self, "options", opts)

    @property
    def width(self) -> int:
        return len(self.options)


@dataclass(frozen=True)
class Explicit:
    states: tuple[str, ...]


Shape = Uniform | OneHot | Product | Explicit


@dataclass(frozen=True)
class Rule:
    state: str
    symbol: int
    shape: Shape


@dataclass(frozen=True)
class Automaton:
    states: tuple[str, ...]
    initial: tuple[str, ...]
    rules: tuple[Rule, ...]

    def __post_init__(self):
        seen = set()
        for s in self.states:
            if s in seen:
                raise AutomatonError(f"duplicate state name {s!r}")
            seen.add(s)
        for s in self.initial:
            if s not in seen:
                raise AutomatonError(f"initial state {s!r} not declared")
        if len(set(self.initial)) != len(self.initial):
            raise AutomatonError("duplicate initial state")
        rule_keys = set()
        for r in self.rules:
            if r.symbol not in (0, 1):
                raise AutomatonError(f"rule symbol must be 0 or 1, got {r.symbol}")
            for name in _shape_states(r.shape):
                if name not in seen:
                    raise AutomatonError(
                        f"rule for ({r.state}, {r.symbol}) uses undeclared state {name!r}"
                    )
            if r.state not in seen:
                raise AutomatonError(f"rule source state {r.state!r} not declared")
            if isinstance(r.shape, Product):
                for _, inc in r.shape.options:
                    if inc not in (0, 1):
                        raise AutomatonError("product count increment must be 0 or 1")
            key = (r.state, r.symbol, r.shape)
            if key in rule_keys:
                raise AutomatonError(
                    f"duplicate rule for ({r.state}, {r.symbol}): {r.shape!r}"
                )
            rule_keys.add(key)

    def rules_for(self, state: str, symbol: int) -> tuple[Rule, ...]:
        return tuple(r for r in self.rules if r.state == state and r.symbol == symbol)

    def state_index(self, name: str) -> int:
        return self.states.index(name)

    def has_count_increments(self) -> bool:
        return any(
            isinstance(r.shape, Product) and any(inc for _, inc in r.shape.options)
            for r in self.rules
        )


def _shape_states(shape: Shape) -> tuple[str, ...]:
    if isinstance(shape, Uniform):
        return (shape.state,)
    if isinstance(shape, OneHot):
        return (shape.special, shape.default)
    if isinstance(shape, Product):
        return tuple(s for s, _ in shape.options)
    return shape.states


# -- transitions ------------------------------------------------------------


def transitions(aut: Automaton, state: str, symbol: int, d: int):
    """Deduplicated child-state tuples for source (state, symbol) at arity d.

    Concrete tuples (from UNIFORM/ONE_HOT/EXPLICIT, and PRODUCT at arity 0)
    are yielded exactly once each.  PRODUCT shapes at d > 0 are reported
    structurally as their (normalized) :class:`Product` value, deduplicated
    by options set, never expanded.
    """
    seen_tuples: set[tuple[str, ...]] = set()
    seen_products: set[Product] = set()
    out: list[tuple[str, ...] | Product] = []
    for rule in aut.rules_for(state, symbol):
        shape = rule.shape
        if isinstance(shape, Uniform):
            candidates = [(shape.state,) * d]
        elif isinstance(shape, OneHot):
            if d == 0:
                continue
            candidates = [
                tuple(
                    shape.special if j == pos else shape.default for j in range(d)
                )
                for pos in range(d)
            ]
        elif isinstance(shape, Product):
            if d == 0:
                candidates = [()]
            else:
                if shape not in seen_products:
                    seen_products.add(shape)
                    out.append(shape)
                continue
        else:  # Explicit
            if len(shape.states) != d:
                continue
            candidates = [shape.states]
        for t in candidates:
            if t not in seen_tuples:
                seen_tuples.add(t)
                out.append(t)
    return out


# -- diversity --------------------------------------------------------------


def diversity(aut: Automaton, n: int) -> int:
    """Max over arities m <= n of the number of distinct arity-m tuples
    across *all* rules.  PRODUCT counts as width^m (saturating at 2^63-1);
    concrete tuples are deduplicated exactly, with no dedup against the
    never-expanded PRODUCT combinations."""
    return _diversity_impl(aut, n, product_power=True)


def chain_diversity(aut: Automaton, n: int) -> int:
    """Like :func:`diversity` but each PRODUCT options set counts once: one
    recursive chain serves every option combination."""
    return _diversity_impl(aut, n, product_power=False)


def _diversity_impl(aut: Automaton, n: int, *, product_power: bool) -> int:
    uniforms: set[str] = set()
    oh_pairs: set[tuple[str, str]] = set()  # special != default
    products: set[Product] = set()
    explicit_by_arity: dict[int, set[tuple[str, ...]]] = {}
    for rule in aut.rules:
        shape = rule.shape
        if isinstance(shape, Uniform):
            uniforms.add(shape.state)
        elif isinstance(shape, OneHot):
            oh_pairs.add((shape.special, shape.default))
        elif isinstance(shape, Product):
            products.add(shape)
        else:
            explicit_by_arity.setdefault(len(shape.states), set()).add(shape.states)

    def count_at(m: int) -> int:
        if m <= 2 or m in explicit_by_arity:
            concrete: set[tuple[str, ...]] = {(q,) * m for q in uniforms}
            if m >= 1:
                for a, b in oh_pairs:
                    for pos in range(m):
                        concrete.add(tuple(a if j == pos else b for j in range(m)))
            concrete |= explicit_by_arity.get(m, set())
            count = len(concrete)
        else:
            # m >= 3, no explicit rules at this arity: a tuple with exactly
            # one special among >= 2 defaults determines its (special,
            # default) pair, so counts just add up.
            all_equal = set(uniforms)
            distinct_pairs = 0
            for a, b in oh_pairs:
                if a == b:
                    all_equal.add(a)
                else:
                    distinct_pairs += 1
            count = len(all_equal) + m * distinct_pairs
        for prod in products:
            if product_power:
                count += min(prod.width**m, _SATURATE) if m > 0 else 1
            else:
                count += 1
            if count >= _SATURATE:
                return _SATURATE
        return count

    interesting = {0, 1, 2, n}
    interesting.update(m for m in explicit_by_arity if m <= n)
    # beyond arity 2 the count is nondecreasing in m except at explicit
    # arities, so checking n and each explicit arity suffices
    best = 0
    for m in sorted(interesting):
        if m > n:
            continue
        best = max(best, count_at(m))
        if best >= _SATURATE:
            return _SATURATE
    return best


# -- prefix closure ---------------------------------------------------------


def is_prefix_closed(aut: Automaton, n: int) -> bool:
    """True iff for every arity d in 1..n, every (d-1)-prefix of every
    generated tuple is itself generated for the same (state, symbol) source.

    UNIFORM and PRODUCT tuples are closed under prefixes on their own.  So
    exact tuple enumeration is only needed up to one past the largest
    EXPLICIT arity (and at least arity 2); past that point only ONE_HOT
    shapes create obligations, and those reduce to: the all-default prefix
    must be covered by a UNIFORM on the default state, a PRODUCT whose
    options include it, or the shape itself when special == default.
    """
    for state in aut.states:
        for symbol in (0, 1):
            rules = aut.rules_for(state, symbol)
            if not rules:
                continue
            explicit_max = max(
                (len(r.shape.states) for r in rules if isinstance(r.shape, Explicit)),
                default=0,
            )
            exact_limit = min(n, max(2, explicit_max + 1))
            for d in range(1, exact_limit + 1):
                for t in _concrete_tuples(rules, d):
                    if not _generates(rules, t[: d - 1]):
                        return False
            if n > exact_limit:
                for rule in rules:
                    shape = rule.shape
                    if isinstance(shape, OneHot) and not _covers_all_default(
                        rules, shape
                    ):
                        return False
    return True


def _covers_all_default(rules, shape: OneHot) -> bool:
    if shape.special == shape.default:
        return True
    for r in rules:
        other = r.shape
        if isinstance(other, Uniform) and other.state == shape.default:
            return True
        if isinstance(other, Product) and any(
            s == shape.default for s, _ in other.options
        ):
            return True
    return False


def _concrete_tuples(rules, d: int):
    seen = set()
    for rule in rules:
        shape = rule.shape
        if isinstance(shape, Uniform):
            cands = [(shape.state,) * d]
        elif isinstance(shape, OneHot):
            cands = [
                tuple(shape.special if j == pos else shape.default for j in range(d))
                for pos in range(d)
            ]
        elif isinstance(shape, Product):
            continue  # prefixes of option combinations are option combinations
        else:
            cands = [shape.states] if len(shape.states) == d else []
        for t in cands:
            if t not in seen:
                seen.add(t)
                yield t


def _generates(rules, t: tuple[str, ...]) -> bool:
    d = len(t)
    for rule in rules:
        shape = rule.shape
        if isinstance(shape, Uniform):
            if all(q == shape.state for q in t):
                return True
        elif isinstance(shape, OneHot):
            if d == 0:
                continue  # one-hot shapes generate nothing at arity 0
            specials = [j for j, q in enumerate(t) if q != shape.default]
            if len(specials) == 1 and t[specials[0]] == shape.special:
                return True
            if not specials and shape.special == shape.default:
                return True
        elif isinstance(shape, Product):
            opt_states = {s for s, _ in shape.options}
            if all(q in opt_states for q in t):
                return True
        else:
            if shape.states == t:
                return True
    return False


def prefix_closure(aut: Automaton) -> Automaton:
    """Minimal template-level superset of the rules that is prefix-closed.

    ONE_HOT(a, b) gains UNIFORM(b) for the same source (the all-default
    prefix, which also supplies the empty tuple at arity 0); EXPLICIT gains
    every proper prefix; UNIFORM and PRODUCT are already closed.  The state
    set never needs to grow for these shapes.  Idempotent.
    """
    new_rules = list(aut.rules)
    have = {(r.state, r.symbol, r.shape) for r in aut.rules}

    def add(state: str, symbol: int, shape: Shape):
        key = (state, symbol, shape)
        if key not in have:
            have.add(key)
            new_rules.append(Rule(state, symbol, shape))

    for rule in aut.rules:
        shape = rule.shape
        if isinstance(shape, OneHot):
            add(rule.state, rule.symbol, Uniform(shape.default))
        elif isinstance(shape, Explicit):
            for i in range(len(shape.states)):
                add(rule.state, rule.symbol, Explicit(shape.states[:i]))
    return Automaton(aut.states, aut.initial, tuple(new_rules))


# -- inert states -----------------------------------------------------------


def inert_states(aut: Automaton) -> frozenset[str]:
    """Greatest set I of states whose only accepted continuation, on any
    subtree shape, is the all-zero labeling.

    Membership requires: no (q, 1) rule; every (q, 0) rule stays inside I
    (PRODUCT options additionally carry increment 0, since a count increment
    is an observable contribution); and some (q, 0) rule covers every arity
    including 0 (a UNIFORM, or a PRODUCT with at least one option), so a run
    never gets stuck on any tree shape.  Solvers may then pass arrays through
    such states without recursing.
    """
    candidates = set()
    for q in aut.states:
        if aut.rules_for(q, 1):
            continue
        zero_rules = aut.rules_for(q, 0)
        if not any(
            isinstance(r.shape, Uniform)
            or (isinstance(r.shape, Product) and r.shape.width >= 1)
            for r in zero_rules
        ):
            continue
        candidates.add(q)
    changed = True
    while changed:
        changed = False
        for q in list(candidates):
            ok = True
            for r in aut.rules_for(q, 0):
                shape = r.shape
                if isinstance(shape, Product):
                    if any(inc != 0 or s not in candidates for s, inc in shape.options):
                        ok = False
                        break
                elif any(s not in candidates for s in _shape_states(shape)):
                    ok = False
                    break
            if not ok:
                candidates.discard(q)
                changed = True
    return frozenset(candidates)


# -- acceptance -------------------------------------------------------------


@lru_cache(maxsize=256)
def _acceptance_tables(aut: Automaton):
    """State index, per-symbol (state-bit, shapes) lists, initial bitmask."""
    idx = {q: i for i, q in enumerate(aut.states)}
    grouped: dict[tuple[int, int], list[Shape]] = {}
    for r in aut.rules:
        grouped.setdefault((idx[r.state], r.symbol), []).append(r.shape)
    per_symbol: tuple[list, list] = ([], [])
    for (qi, sym), shapes in grouped.items():
        per_symbol[sym].append((1 << qi, tuple(shapes)))
    initial_mask = 0
    for q in aut.initial:
        initial_mask |= 1 << idx[q]
    return idx, per_symbol, initial_mask


def accepts(aut: Automaton, instance: Instance, labels) -> bool:
    """Whether some run of the automaton matches the labeling.

    Computes bottom-up, per vertex, the set Good(u) of states from which the
    labeled subtree T_u admits a run.  Template shapes are checked without
    tuple expansion: UNIFORM wants membership for all children; ONE_HOT wants
    the default for all but one feasible special position; PRODUCT wants
    every child to intersect the option states; EXPLICIT checks positionally.
    """
    n = instance.n
    if len(labels) != n:
        raise ValueError(f"label vector length {len(labels)} != n = {n}")
    idx, per_symbol, initial_mask = _acceptance_tables(aut)
    children = instance.children
    good = [0] * n  # bitmask over states
    for u in range(n - 1, -1, -1):
        sigma = int(labels[u])
        if sigma not in (0, 1):
            raise ValueError(f"label of vertex {u} must be 0 or 1, got {labels[u]}")
        kids = children[u]
        d = len(kids)
        mask = 0
        for bit, shapes in per_symbol[sigma]:
            for s in shapes:
                if _shape_satisfiable(s, kids, good, idx, d):
                    mask |= bit
                    break
        good[u] = mask
    return bool(good[0] & initial_mask)


def _shape_satisfiable(shape: Shape, kids, good, idx, d: int) -> bool:
    if isinstance(shape, Uniform):
        bit = idx[shape.state]
        return all(good[v] >> bit & 1 for v in kids)
    if isinstance(shape, OneHot):
        if d == 0:
            return False
        a, b = idx[shape.special], idx[shape.default]
        missing = [v for v in kids if not good[v] >> b & 1]
        if len(missing) == 0:
            return any(good[v] >> a & 1 for v in kids)
        if len(missing) == 1:
            return bool(good[missing[0]] >> a & 1)
        return False
    if isinstance(shape, Product):
        opt_mask = 0
        for s, _ in shape.options:
            opt_mask |= 1 << idx[s]
        return all(good[v] & opt_mask for v in kids)
    if len(shape.states) != d:
        return False
    return all(good[v] >> idx[q] & 1 for v, q in zip(kids, shape.states))


def labels_from_set(n: int, selected) -> list[int]:
    """Convenience: characteristic 0/1 vector of a vertex set."""
    sel = set(selected)
    return [1 if u in sel else 0 for u in range(n)]


# -- built-ins --------------------------------------------------------------

BUILTIN_NAMES = ("independent-set", "precedence", "connectivity", "connectivity-closed")


@lru_cache(maxsize=None)
def builtin(name: str) -> Automaton:
    """Named constraint families used throughout the tests and the CLI.

    * ``independent-set`` — no two adjacent selected vertices.
    * ``precedence`` — a selected vertex requires its parent selected
      (selected sets are closed upward; downward-closed label regions).
    * ``connectivity`` — strict: the selection is one nonempty connected
      component (a single-vertex tree must select its vertex).
    * ``connectivity-closed`` — prefix closure of the above; also accepts
      the empty selection.
    """
    if name == "independent-set":
        return Automaton(
            states=("s", "x"),
            initial=("s", "x"),
            rules=(
                Rule("s", 0, Uniform("s")),
                Rule("s", 1, Uniform("x")),
                Rule("x", 0, Uniform("s")),
            ),
        )
    if name == "precedence":
        return Automaton(
            states=("s", "x"),
            initial=("s", "x"),
            rules=(
                Rule("s", 0, Uniform("x")),
                Rule("s", 1, Uniform("s")),
                Rule("x", 0, Uniform("x")),
            ),
        )
    if name == "connectivity":
        return Automaton(
            states=("s", "o", "x"),
            initial=("s",),
            rules=(
                Rule("s", 0, OneHot("s", "x")),
                Rule("s", 1, Uniform("o")),
                Rule("o", 0, Uniform("x")),
                Rule("o", 1, Uniform("o")),
                Rule("x", 0, Uniform("x")),
            ),
        )
    if name == "connectivity-closed":
        return prefix_closure(builtin("connectivity"))
    raise AutomatonError(f"unknown builtin {name!r} (choose from {', '.join(BUILTIN_NAMES)})")


# -- text format ------------------------------------------------------------
#
#   states s o x
#   init s
#   rule s 0 onehot s x
#   rule s 1 uniform o
#   rule out 0 product out s:1
#   rule q 0 explicit q q
#
# '#' starts a comment; blank lines are ignored.  Product entries are
# ``state`` (increment 0) or ``state:1``.


def parse_automaton(text: str) -> Automaton:
    states: tuple[str, ...] | None = None
    initial: tuple[str, ...] | None = None
    rules: list[Rule] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kw = parts[0]
        if kw == "states":
            if states is not None:
                raise FormatError("duplicate 'states' line", lineno)
            if len(parts) < 2:
                raise FormatError("'states' needs at least one name", lineno)
            states = tuple(parts[1:])
        elif kw == "init":
            if initial is not None:
                raise FormatError("duplicate 'init' line", lineno)
            if len(parts) < 2:
                raise FormatError("'init' needs at least one name", lineno)
            initial = tuple(parts[1:])
        elif kw == "rule":
            if len(parts) < 4:
                raise FormatError("'rule' needs: rule <state> <0|1> <shape...>", lineno)
            src, sym_tok, shape_kw = parts[1], parts[2], parts[3]
            if sym_tok not in ("0", "1"):
                raise FormatError(f"rule symbol must be 0 or 1, got {sym_tok!r}", lineno)
            args = parts[4:]
            if shape_kw == "uniform":
                if len(args) != 1:
                    raise FormatError("'uniform' takes exactly one state", lineno)
                shape: Shape = Uniform(args[0])
            elif shape_kw == "onehot":
                if len(args) != 2:
                    raise FormatError("'onehot' takes special and default states", lineno)
                shape = OneHot(args[0], args[1])
            elif shape_kw == "product":
                if not args:
                    raise FormatError("'product' needs at least one option", lineno)
                options = []
                for tok in args:
                    if ":" in tok:
                        name, inc_tok = tok.split(":", 1)
                        if inc_tok not in ("0", "1"):
                            raise FormatError(
                                f"product increment must be 0 or 1, got {inc_tok!r}", lineno
                            )
                        options.append((name, int(inc_tok)))
                    else:
                        options.append((tok, 0))
                shape = Product(tuple(options))
            elif shape_kw == "explicit":
                shape = Explicit(tuple(args))
            else:
                raise FormatError(f"unknown shape {shape_kw!r}", lineno)
            rules.append(Rule(src, int(sym_tok), shape))
        else:
            raise FormatError(f"unknown directive {kw!r}", lineno)
    if states is None:
        raise FormatError("missing 'states' line")
    if initial is None:
        raise FormatError("missing 'init' line")
    try:
        return Automaton(states, initial, tuple(rules))
    except AutomatonError as exc:
        raise FormatError(str(exc)) from exc


def serialize_automaton(aut: Automaton) -> str:
    lines = [
        "states " + " ".join(aut.states),
        "init " + " ".join(aut.initial),
    ]
    for r in aut.rules:
        shape = r.shape
        if isinstance(shape, Uniform):
            body = f"uniform {shape.state}"
        elif isinstance(shape, OneHot):
            body = f"onehot {shape.special} {shape.default}"
        elif isinstance(shape, Product):
            body = "product " + " ".join(
                name if inc == 0 else f"{name}:{inc}" for name, inc in shape.options
            )
        else:
            body = ("explicit " + " ".join(shape.states)).rstrip()
        lines.append(f"rule {r.state} {r.symbol} {body}")
    return "\n".join(lines) + "\n"
