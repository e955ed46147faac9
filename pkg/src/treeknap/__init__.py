"""Automaton-constrained tree knapsack solvers.

Maximize profit of a vertex selection in a rooted tree subject to a weight
capacity, where admissible selections are the runs of a nondeterministic
top-down tree automaton over the selection labels.
"""

from .automaton import (
    BUILTIN_NAMES,
    Automaton,
    Explicit,
    OneHot,
    Product,
    Rule,
    Uniform,
    accepts,
    builtin,
    chain_diversity,
    diversity,
    is_prefix_closed,
    parse_automaton,
    prefix_closure,
    serialize_automaton,
    transitions,
)
from .errors import (
    AutomatonError,
    ClosureError,
    FormatError,
    InstanceError,
    InternalError,
    SolverError,
    TreeknapError,
)
from .profit_array import INFEASIBLE, KTable, ProfitArray, convolve, pointwise_max
from .solvers import CallStats, SolveResult, baseline_dp, hlrecdp, recdp, solve
from .subtree import (
    ComplementTable,
    KSubtreeResult,
    SubtreeValues,
    conn_k,
    for_all_subtree,
    for_all_subtree_complement,
    lift_k,
)
from .tree import (
    HldDecoration,
    Instance,
    build_tree,
    decorate_hld,
    parse_instance,
    serialize_instance,
)

__version__ = "0.1.0"

__all__ = [
    "Automaton",
    "AutomatonError",
    "BUILTIN_NAMES",
    "CallStats",
    "ClosureError",
    "ComplementTable",
    "Explicit",
    "FormatError",
    "HldDecoration",
    "INFEASIBLE",
    "Instance",
    "InstanceError",
    "InternalError",
    "KSubtreeResult",
    "KTable",
    "OneHot",
    "Product",
    "ProfitArray",
    "Rule",
    "SolveResult",
    "SolverError",
    "SubtreeValues",
    "TreeknapError",
    "Uniform",
    "accepts",
    "baseline_dp",
    "build_tree",
    "builtin",
    "chain_diversity",
    "conn_k",
    "convolve",
    "decorate_hld",
    "diversity",
    "for_all_subtree",
    "for_all_subtree_complement",
    "hlrecdp",
    "is_prefix_closed",
    "lift_k",
    "parse_automaton",
    "parse_instance",
    "pointwise_max",
    "prefix_closure",
    "recdp",
    "serialize_automaton",
    "serialize_instance",
    "solve",
    "transitions",
]
