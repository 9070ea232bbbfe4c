"""Command-line interface.

Exit codes: 0 success, 1 a verification check failed, 2 parse or validation
error, 3 infeasible instance, 4 oracle budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import logging
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from .analysis import locality_gap_report
from .engine import NEIGHBORHOODS, SearchConfig, run
from .errors import (
    BudgetExceeded,
    DisconnectedPair,
    Infeasible,
    InfeasibleInput,
    ParseError,
    SteinerForestError,
    ValidationError,
)
from .forest import Forest
from .io import (
    RunRecord,
    error_json,
    figure1_chain,
    forests_to_dot,
    gen_figure1,
    gen_random,
    parse_instance_file,
    records_to_csv,
    serialize_instance,
)
from .oracle import OracleBudget, optimal_forest, optimal_forest_on_cycle
from .verify import verify_instance

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_BUDGET = 0, 1, 2, 3, 4


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, (ParseError, ValidationError)):
        return EXIT_INPUT
    if isinstance(exc, (DisconnectedPair, InfeasibleInput, Infeasible)):
        return EXIT_INFEASIBLE
    if isinstance(exc, BudgetExceeded):
        return EXIT_BUDGET
    return EXIT_CHECK


def _read(path: str | None) -> str:
    if path is None or path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _config(args) -> SearchConfig:
    return SearchConfig(
        epsilon=Fraction(args.epsilon),
        pivot=args.pivot,
        kmst_solver=args.kmst,
        rng_seed=args.seed,
        neighborhood_order=tuple(args.neighborhoods.split(",")) if args.neighborhoods else NEIGHBORHOODS,
        max_iterations=args.max_iterations,
    )


def _budget(args) -> OracleBudget:
    return OracleBudget(args.max_terminals, args.max_contracted)


def _opt_cost(file, inst, budget):
    """Oracle optimum as (forest or None, cost); cycle graphs of any size use
    the dedicated exact routine."""
    if inst.terminal_count <= budget.max_terminals:
        opt, cost = optimal_forest(inst, budget)
        return opt, cost
    try:
        return None, optimal_forest_on_cycle(file.graph, file.pairs)
    except ValueError:
        raise BudgetExceeded(f"{inst.terminal_count} terminals exceed the oracle budget") from None


def _solve_one(text: str, name: str, cfg: SearchConfig, with_oracle: bool, budget: OracleBudget, start_chain: bool = False):
    file = parse_instance_file(text)
    inst = file.to_instance()
    initial = None
    if start_chain:
        # the figure-1 chain, when the file is a figure-1 instance
        l = file.graph.vertex_count // 2
        initial = Forest.from_labels(inst, figure1_chain(l))
    t0 = time.perf_counter()
    final, trace = run(inst, cfg, initial)
    wall = time.perf_counter() - t0
    rec = RunRecord(
        instance=name,
        digest=file.digest(),
        config={
            "epsilon": str(cfg.epsilon),
            "pivot": cfg.pivot,
            "kmst": cfg.kmst_solver,
            "seed": cfg.rng_seed,
            "neighborhoods": list(cfg.neighborhood_order),
        },
        final_cost=final.length,
        iterations=trace.n_iterations,
        iteration_bound=float(trace.iteration_bound) if trace.iteration_bound is not None else None,
        move_counts=trace.move_counts(),
        wall_time=wall,
        final_edges=[list(e) for e in final.label_edges()],
    )
    opt = None
    if with_oracle:
        opt, cost = _opt_cost(file, inst, budget)
        gap = locality_gap_report(final, inst, opt if opt is not None else cost, eps=cfg.epsilon)
        rec.oracle_cost = cost
        rec.ratio = float(gap.ratio)
        rec.bound = float(gap.bound_factor)
    return rec, final, opt


def cmd_solve(args) -> int:
    cfg = _config(args)
    rec, final, opt = _solve_one(
        _read(args.input), args.input or "-", cfg, args.oracle, _budget(args), start_chain=args.start_chain
    )
    _write(args.json_out, rec.to_json() + "\n")
    if args.dot_out:
        _write(args.dot_out, forests_to_dot(final, opt))
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _config(args)
    budget = _budget(args)
    rows = []
    failed = 0
    if args.input:
        sources = [(args.input, parse_instance_file(_read(args.input)))]
    else:
        rng = random.Random(args.seed)
        sources = []
        for i in range(args.random):
            n = rng.randint(4, args.terminals)
            p = rng.randint(1, n // 2)
            sources.append((f"random-{args.seed}-{i}", gen_random(n, p, (1, args.max_weight), rng.randrange(2**31))))
    for name, file in sources:
        res = verify_instance(file.to_instance(), cfg, budget, seed=args.seed)
        row = {
            "instance": name,
            "digest": file.digest(),
            "final_cost": res.final.length,
            "oracle_cost": res.opt.length,
            "ratio": float(res.gap.ratio),
            "bound": float(res.gap.bound_factor),
            "iterations": res.trace.n_iterations,
            "wall_time": round(res.wall_time, 4),
            "failed": ";".join(res.failed()),
        }
        rows.append(row)
        if not res.ok:
            failed += 1
            print(f"FAIL {name}: {', '.join(res.failed())}", file=sys.stderr)
    csv_text = records_to_csv(rows, extra_fields=("failed",))
    _write(args.csv, csv_text)
    ratios = [r["ratio"] for r in rows]
    print(f"{len(rows) - failed}/{len(rows)} instances passed all checks; max ratio {max(ratios):.4f}", file=sys.stderr)
    return EXIT_OK if failed == 0 else EXIT_CHECK


def cmd_gen(args) -> int:
    if args.family == "figure1":
        f = gen_figure1(args.l, args.k)
    else:
        f = gen_random(args.terminals, args.pairs, (args.wmin, args.wmax), args.seed, args.shared)
    _write(args.output, serialize_instance(f))
    return EXIT_OK


def _bench_one(job):
    path, cfg, oracle, budget = job
    try:
        rec, _, _ = _solve_one(Path(path).read_text(), path, cfg, oracle, budget)
        return json.loads(rec.to_json())
    except SteinerForestError as exc:
        return {"instance": path, "error": f"{type(exc).__name__}: {exc}"}


def cmd_bench(args) -> int:
    cfg = _config(args)
    files = sorted(str(p) for p in Path(args.dir).iterdir() if p.suffix in (".stp", ".txt", ".sf"))
    jobs = [(p, cfg, args.oracle, _budget(args)) for p in files]
    if args.workers > 1:
        with ProcessPoolExecutor(args.workers) as ex:
            rows = list(ex.map(_bench_one, jobs))
    else:
        rows = [_bench_one(j) for j in jobs]
    _write(args.csv, records_to_csv(rows, extra_fields=("error",)))
    return EXIT_OK if all("error" not in r for r in rows) else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="steinerls", description="Local search for Steiner forest.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def search_flags(p):
        p.add_argument("--epsilon", default="1/4", help="rounding and approximation slack, e.g. 1/4")
        p.add_argument("--pivot", choices=("first_improving", "best_improving"), default="first_improving")
        p.add_argument("--kmst", choices=("exact", "greedy"), default="exact")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--neighborhoods", help="comma-separated neighborhood order")
        p.add_argument("--max-iterations", type=int)

    def budget_flags(p):
        p.add_argument("--max-terminals", type=int, default=10, help="oracle budget on terminals")
        p.add_argument("--max-contracted", type=int, default=8, help="oracle budget on contracted nodes")

    p = sub.add_parser("solve", help="solve one instance")
    p.add_argument("--input", "-i", help="instance file (default: stdin)")
    search_flags(p)
    budget_flags(p)
    p.add_argument("--oracle", action="store_true", help="also compute the optimum and the ratio")
    p.add_argument("--start-chain", action="store_true", help="start a figure-1 instance from its chain")
    p.add_argument("--json-out")
    p.add_argument("--dot-out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="oracle comparison plus structural checks")
    p.add_argument("--input", "-i")
    p.add_argument("--random", type=int, default=20, help="number of random instances")
    p.add_argument("--terminals", type=int, default=8, help="largest random instance")
    p.add_argument("--max-weight", type=int, default=100)
    p.add_argument("--csv", help="CSV output (default: stdout)")
    search_flags(p)
    budget_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", help="generate an instance")
    p.add_argument("family", choices=("figure1", "random"))
    p.add_argument("--l", type=int, default=12)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--terminals", type=int, default=8)
    p.add_argument("--pairs", type=int, default=3)
    p.add_argument("--wmin", type=int, default=1)
    p.add_argument("--wmax", type=int, default=100)
    p.add_argument("--shared", action="store_true", help="allow pairs to share endpoints")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="solve every instance in a directory")
    p.add_argument("--dir", required=True)
    p.add_argument("--csv")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--oracle", action="store_true")
    search_flags(p)
    budget_flags(p)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (SteinerForestError, ValueError, OSError) as exc:
        code = _exit_code(exc) if isinstance(exc, SteinerForestError) else EXIT_INPUT
        msg = f"{type(exc).__name__}: {exc}"
        print(msg, file=sys.stderr)
        out = getattr(args, "json_out", None)
        if out and out != "-":
            Path(out).write_text(error_json(type(exc).__name__, str(exc)) + "\n")
        return code


if __name__ == "__main__":
    sys.exit(main())
