"""Command-line surface: solving, differential testing, generation,
diversity reporting, and the empirical-complexity benchmark harness.

Exit codes: 0 solved, 1 infeasible, 2 parse/validation error, 3 internal
contract violation (solver disagreement, failed witness validation).
Diagnostics go to stderr only; stdout carries values and CSV.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .automaton import (
    BUILTIN_NAMES,
    builtin,
    diversity,
    is_prefix_closed,
    parse_automaton,
    serialize_automaton,
)
from .errors import InternalError, TreeknapError
from .oracle import SHAPES, brute_force, random_instance, shape_parents
from .profit_array import INFEASIBLE, ProfitArray, dump_array, pointwise_max
from .solvers import ALGORITHMS, CallStats, baseline_dp, hlrecdp, recdp
from .subtree import conn_k, for_all_subtree, for_all_subtree_complement
from .tree import build_tree, parse_instance, serialize_instance

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_INVALID = 2
EXIT_INTERNAL = 3

# brute force joins `compare` only while it is cheap; the guard in
# oracle.brute_force is far above what differential loops can afford
_COMPARE_ORACLE_N = 12
# solvers with super-quadratic worst cases are capped inside bench sweeps
_BASELINE_C_CAP = 1 << 10
_BASELINE_N_CAP = (1 << 11) - 1
_RECDP_N_CAP = (1 << 11) - 1

_SCALING_C_POINTS = tuple(1 << e for e in range(7, 14))
_SCALING_C_N = (1 << 9) - 1
_SCALING_N_POINTS = tuple((1 << e) - 1 for e in range(7, 14))
_SCALING_N_C = 256


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("TREEKNAP_THREADS", "1")))
    except ValueError:
        return 1


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _automaton_from(args):
    if getattr(args, "constraint", None):
        return builtin(args.constraint)
    return parse_automaton(_read(args.automaton))


def _add_automaton_flags(sub, *, required: bool = True):
    grp = sub.add_mutually_exclusive_group(required=required)
    grp.add_argument("--constraint", choices=BUILTIN_NAMES, help="built-in constraint")
    grp.add_argument("--automaton", metavar="FILE", help="automaton definition file")


def _merged_initial_array(arrays: dict, initial) -> ProfitArray:
    acc = None
    for q in initial:
        acc = arrays[q] if acc is None else pointwise_max(acc, arrays[q])
    if acc is None:
        cap = len(next(iter(arrays.values()))) - 1 if arrays else 0
        return ProfitArray.bottom(cap)
    return acc


def _print_stats(stats: CallStats) -> None:
    print(f"invocations {stats.total_invocations}")
    print(f"chains {stats.chains}")
    print(f"convolutions {stats.convolutions}")
    print(f"shift_adds {stats.shift_adds}")
    print(f"maxima {stats.maxima}")


# -- solve ------------------------------------------------------------------


def _cmd_solve(args) -> int:
    instance = parse_instance(_read(args.instance))
    aut = _automaton_from(args)
    witness = None
    if args.witness and args.algo in ("hlrecdp", "recdp"):
        raise TreeknapError(
            f"{args.algo} does not reconstruct witnesses: its recursion shares "
            "intermediate arrays across subproblems and keeps no per-cell "
            "provenance; use --algo baseline or --algo oracle"
        )
    if args.algo == "baseline":
        res = baseline_dp(instance, aut, witness=args.witness)
        arrays, stats, witness = res.arrays, res.stats, res.witness
        merged = _merged_initial_array(arrays, aut.initial)
    elif args.algo == "hlrecdp":
        res = hlrecdp(instance, aut)
        arrays, stats = res.arrays, res.stats
        merged = _merged_initial_array(arrays, aut.initial)
    elif args.algo == "recdp":
        stats = CallStats.for_instance(instance.n)
        arrays = recdp(instance, aut, ProfitArray.identity(instance.capacity), stats=stats)
        merged = _merged_initial_array(arrays, aut.initial)
    else:  # oracle
        res = brute_force(instance, aut)
        stats = CallStats.for_instance(instance.n)
        merged = res.array
        bv = merged.best_value()
        if args.witness and bv is not INFEASIBLE:
            witness = res.witness_per_weight[bv[1]]
    best = merged.best_value()
    if best is INFEASIBLE:
        print("INFEASIBLE")
        if args.stats:
            _print_stats(stats)
        return EXIT_INFEASIBLE
    print(f"value {best[0]}")
    if args.witness and witness is not None:
        print("witness" + "".join(f" {u}" for u in witness))
    if args.array:
        print(dump_array(merged), end="")
    if args.stats:
        _print_stats(stats)
    return EXIT_OK


# -- compare ----------------------------------------------------------------


def _compare_one(instance, name, aut) -> str | None:
    """Run all solvers on one instance; returns a mismatch description."""
    ref = hlrecdp(instance, aut, engine="python")
    candidates = {
        "hlrecdp-compiled": hlrecdp(instance, aut, engine="auto").arrays,
        "baseline": baseline_dp(instance, aut, witness=False).arrays,
    }
    if instance.n <= _RECDP_N_CAP:
        candidates["recdp"] = recdp(
            instance, aut, ProfitArray.identity(instance.capacity)
        )
    for solver, arrays in candidates.items():
        for q in aut.states:
            if arrays[q] != ref.arrays[q]:
                return f"{solver} disagrees with hlrecdp on state {q!r} ({name})"
    if instance.n <= _COMPARE_ORACLE_N:
        want = brute_force(instance, aut).array
        got = _merged_initial_array(ref.arrays, aut.initial)
        if want != got:
            return f"hlrecdp disagrees with brute force ({name})"
    return None


def _report_mismatch(instance, aut, message: str) -> None:
    print(message, file=sys.stderr)
    print("reproducer instance:", file=sys.stderr)
    print(serialize_instance(instance), file=sys.stderr, end="")
    print("reproducer automaton:", file=sys.stderr)
    print(serialize_automaton(aut), file=sys.stderr, end="")


def _cmd_compare(args) -> int:
    names = list(BUILTIN_NAMES) if args.constraint in (None, "all") else [args.constraint]
    auts = [(name, builtin(name)) for name in names]
    rng = np.random.default_rng(args.seed)
    checked = 0
    if args.exhaustive_n:
        from .oracle import enumerate_trees

        for n in range(1, args.exhaustive_n + 1):
            for parents in enumerate_trees(n):
                weights = [int(rng.integers(0, 4)) for _ in range(n)]
                profits = [int(rng.integers(0, 8)) for _ in range(n)]
                cap = int(rng.integers(0, 10))
                instance = build_tree(parents, weights, profits, cap)
                for name, aut in auts:
                    bad = _compare_one(instance, name, aut)
                    if bad:
                        _report_mismatch(instance, aut, bad)
                        return EXIT_INTERNAL
                    checked += 1
    for _ in range(args.trials):
        n = int(rng.integers(1, args.n_max + 1))
        instance = random_instance(n, max_capacity=args.c_max, rng=rng)
        for name, aut in auts:
            bad = _compare_one(instance, name, aut)
            if bad:
                _report_mismatch(instance, aut, bad)
                return EXIT_INTERNAL
            checked += 1
    print(f"compared {checked} instance/constraint pairs, all agree")
    return EXIT_OK


# -- bench ------------------------------------------------------------------


def _bench_points(suite: str, algo: str):
    if suite == "scaling-c":
        cap = _BASELINE_C_CAP if algo == "baseline" else _SCALING_C_POINTS[-1]
        return [(_SCALING_C_N, c) for c in _SCALING_C_POINTS if c <= cap]
    cap = _BASELINE_N_CAP if algo == "baseline" else _RECDP_N_CAP if algo == "recdp" else _SCALING_N_POINTS[-1]
    return [(n, _SCALING_N_C) for n in _SCALING_N_POINTS if n <= cap]


def _bench_instance(shape: str, n: int, capacity: int, seed: int):
    rng = np.random.default_rng(seed)
    parents = shape_parents(shape, n, rng)
    weights = [int(rng.integers(0, 4)) for _ in range(n)]
    profits = [int(rng.integers(0, 8)) for _ in range(n)]
    return build_tree(parents, weights, profits, capacity)


def _bench_solve(algo: str, instance, aut):
    t0 = time.perf_counter_ns()
    if algo == "baseline":
        stats = baseline_dp(instance, aut, witness=False).stats
    elif algo == "hlrecdp":
        stats = hlrecdp(instance, aut).stats
    else:
        stats = CallStats.for_instance(instance.n)
        recdp(instance, aut, ProfitArray.identity(instance.capacity), stats=stats)
    return stats, time.perf_counter_ns() - t0


def fit_slope(xs, ys) -> float:
    """Least-squares slope of log ys against log xs, using the largest
    half of the sweep to suppress small-size noise."""
    pts = sorted(zip(xs, ys))
    half = pts[len(pts) // 2 :] if len(pts) > 2 else pts
    lx = np.log([p[0] for p in half])
    ly = np.log([max(p[1], 1) for p in half])
    return float(np.polyfit(lx, ly, 1)[0])


def _cmd_bench(args) -> int:
    aut = _automaton_from(args)
    constraint = args.constraint or "custom"
    configs = []
    for algo in args.algo:
        for n, c in _bench_points(args.suite, algo):
            for rep in range(args.reps):
                configs.append((algo, n, c, rep))
    # warm the compiled kernels outside the timed region
    tiny = _bench_instance(args.shape, 3, 4, args.seed)
    for algo in set(args.algo):
        _bench_solve(algo, tiny, aut)

    def run(cfg):
        algo, n, c, rep = cfg
        instance = _bench_instance(args.shape, n, c, args.seed)
        stats, ns = _bench_solve(algo, instance, aut)
        return (
            f"{algo},{constraint},{args.shape},{n},{c},{args.seed},{rep},"
            f"{stats.total_invocations},{stats.convolutions},{stats.shift_adds},{ns}"
        ), (algo, n, c, ns)

    workers = _threads()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, configs))
    else:
        results = [run(cfg) for cfg in configs]

    lines = ["algo,constraint,shape,n,C,seed,rep,invocations,convolutions,shift_adds,ns"]
    lines += [row for row, _ in results]
    csv_text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
    else:
        print(csv_text, end="")
    xkey = 2 if args.suite == "scaling-c" else 1
    for algo in args.algo:
        per_point: dict[int, list[int]] = {}
        for _, (a, n, c, ns) in results:
            if a == algo:
                per_point.setdefault((n, c)[xkey - 1], []).append(ns)
        xs = sorted(per_point)
        ys = [min(per_point[x]) for x in xs]
        label = "C" if args.suite == "scaling-c" else "n"
        print(f"slope {algo} time-vs-{label}: {fit_slope(xs, ys):.3f}")
    return EXIT_OK


# -- the small commands -----------------------------------------------------


def _cmd_gen(args) -> int:
    rng = np.random.default_rng(args.seed)
    parents = shape_parents(args.shape, args.n, rng)
    weights = [int(rng.integers(0, args.max_weight + 1)) for _ in range(args.n)]
    profits = [int(rng.integers(0, args.max_profit + 1)) for _ in range(args.n)]
    cap = args.capacity if args.capacity is not None else int(rng.integers(0, 10))
    text = serialize_instance(build_tree(parents, weights, profits, cap))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        print(text, end="")
    return EXIT_OK


def _cmd_diversity(args) -> int:
    aut = _automaton_from(args)
    closed = "yes" if is_prefix_closed(aut, args.n) else "no"
    print(f"{diversity(aut, args.n)}, prefix-closed: {closed}")
    return EXIT_OK


def _fmt_value(v) -> str:
    return "INFEASIBLE" if v is INFEASIBLE else str(v)


def _cmd_ksubtree(args) -> int:
    instance = parse_instance(_read(args.instance))
    aut = _automaton_from(args)
    result = conn_k(instance, aut, args.k)
    print(" ".join(_fmt_value(v) for v in result.best))
    return EXIT_OK


def _cmd_all_subtrees(args) -> int:
    instance = parse_instance(_read(args.instance))
    aut = _automaton_from(args)
    values = for_all_subtree(instance, aut)
    for u in range(instance.n):
        print(f"{u} {_fmt_value(values.value(u))}")
    return EXIT_OK


def _cmd_complements(args) -> int:
    instance = parse_instance(_read(args.instance))
    aut = _automaton_from(args)
    table = for_all_subtree_complement(instance, aut)
    for u in range(instance.n):
        print(f"{u} {_fmt_value(table.value(u))}")
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treeknap",
        description="Automaton-constrained tree knapsack solvers",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sp = subs.add_parser("solve", help="solve one instance")
    sp.add_argument("--instance", required=True, metavar="FILE")
    _add_automaton_flags(sp)
    sp.add_argument("--algo", choices=ALGORITHMS, default="hlrecdp")
    sp.add_argument("--array", action="store_true", help="dump the exact-weight array")
    sp.add_argument("--witness", action="store_true", help="print an optimal vertex set (baseline/oracle)")
    sp.add_argument("--stats", action="store_true", help="print operation counters")
    sp.set_defaults(fn=_cmd_solve)

    sp = subs.add_parser("compare", help="differential-test all solvers")
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--n-max", type=int, default=12)
    sp.add_argument("--c-max", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--constraint", choices=list(BUILTIN_NAMES) + ["all"], default="all")
    sp.add_argument("--exhaustive-n", type=int, default=0, metavar="N",
                    help="also run every tree shape up to this n")
    sp.set_defaults(fn=_cmd_compare)

    sp = subs.add_parser("bench", help="empirical-complexity sweeps")
    sp.add_argument("--suite", choices=("scaling-n", "scaling-c"), required=True)
    _add_automaton_flags(sp)
    sp.add_argument("--algo", nargs="+", choices=("baseline", "recdp", "hlrecdp"),
                    default=["hlrecdp"])
    sp.add_argument("--shape", choices=SHAPES, default="binary")
    sp.add_argument("--reps", type=int, default=3)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", metavar="FILE", help="write CSV here instead of stdout")
    sp.set_defaults(fn=_cmd_bench)

    sp = subs.add_parser("gen", help="generate a seeded instance")
    sp.add_argument("--shape", choices=SHAPES, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--max-weight", type=int, default=3)
    sp.add_argument("--max-profit", type=int, default=7)
    sp.add_argument("--capacity", type=int, default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", metavar="FILE")
    sp.set_defaults(fn=_cmd_gen)

    sp = subs.add_parser("diversity", help="transition diversity and prefix-closedness")
    _add_automaton_flags(sp)
    sp.add_argument("--n", type=int, required=True)
    sp.set_defaults(fn=_cmd_diversity)

    sp = subs.add_parser("ksubtree", help="best k pairwise non-ancestral subtrees")
    sp.add_argument("--instance", required=True, metavar="FILE")
    _add_automaton_flags(sp)
    sp.add_argument("--k", type=int, required=True)
    sp.set_defaults(fn=_cmd_ksubtree)

    sp = subs.add_parser("all-subtrees", help="optimum of every rooted subtree")
    sp.add_argument("--instance", required=True, metavar="FILE")
    _add_automaton_flags(sp)
    sp.set_defaults(fn=_cmd_all_subtrees)

    sp = subs.add_parser("complements", help="complement value of every vertex")
    sp.add_argument("--instance", required=True, metavar="FILE")
    _add_automaton_flags(sp)
    sp.set_defaults(fn=_cmd_complements)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except InternalError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except TreeknapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
