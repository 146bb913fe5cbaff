"""Command-line interface.

Structured results are printed as JSON. Without ``--json`` floats are
rounded to 6 decimals; with it they keep full precision. Failures print
``{"error": code, "message": ...}`` and exit with status 1.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any, Sequence

from . import allocation, circulant, design, sim, table
from .errors import CapConsensusError, InvalidInput
from .graph import CapacitatedGraph, hstar
from .solution import DesignSolution


def _load(path: str) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path} is not valid JSON: {exc}") from None


def _round(obj: Any, digits: int = 6) -> Any:
    if isinstance(obj, float):
        return round(obj, digits) if math.isfinite(obj) else obj
    if isinstance(obj, dict):
        return {k: _round(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v, digits) for v in obj]
    return obj


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _emit(obj: Any, args) -> None:
    if not args.json:
        obj = _round(obj)
    print(json.dumps(_jsonable(obj), indent=None if args.json else 2))


def _overrides(text: str | None) -> list[int] | None:
    if text is None:
        return None
    try:
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise InvalidInput("--capacity-override expects comma-separated integers, one per class") from None


def cmd_hstar(args) -> None:
    value = hstar(CapacitatedGraph.from_json(_load(args.graph)))
    if args.json:
        _emit({"hstar": value}, args)
    else:
        print("inf" if math.isinf(value) else f"{value:.6f}")


def cmd_feasibility(args) -> None:
    g = CapacitatedGraph.from_json(_load(args.graph))
    _emit(design.check_feasibility(g, args.k).to_json(), args)


def _solve(data: dict, args) -> tuple[DesignSolution, dict | None]:
    kind = data.get("type")
    if kind is None:
        if "generators" in data:
            kind = "circulant"
        elif "edges" in data or "graph" in data:
            kind = "brute-force"
        else:
            kind = "complete"
    if kind == "complete":
        sol = design.solve_complete(int(data["n"]), int(data.get("alpha", 1)))
        return sol, None
    if kind == "circulant":
        spec = circulant.CirculantSpec.from_json(data)
        sol = circulant.algorithm1(
            spec,
            _overrides(args.capacity_override),
            exact_threshold=args.exact_threshold,
            restarts=args.restarts,
            seed=args.seed,
        )
        gap = design.gap_report(spec, sol, exact_threshold=args.exact_threshold, restarts=args.restarts, seed=args.seed)
        return sol, gap.to_json()
    if kind == "brute-force":
        g = CapacitatedGraph.from_json(data.get("graph", data))
        if "k" not in data:
            raise InvalidInput("brute-force input needs k")
        return design.brute_force(g, int(data["k"])), None
    raise InvalidInput(f"unknown problem type {kind!r}")


def cmd_solve(args) -> None:
    data = _load(args.spec)
    if not isinstance(data, dict):
        raise InvalidInput("problem file must hold a JSON object")
    try:
        sol, gap = _solve(data, args)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, CapConsensusError):
            raise
        raise InvalidInput(f"malformed problem file: {exc}") from None
    out = sol.to_json()
    out["per_subgraph_cost"] = sol.cost / sol.k
    if gap is not None:
        out["gap"] = gap
    _emit(out, args)


def cmd_allocate(args) -> None:
    g = CapacitatedGraph.from_json(_load(args.graph))
    init = DesignSolution.from_json(_load(args.initial), graph=g)
    state = allocation.greedy_allocate(g, init.k, init.subgraphs, method=args.method)
    _emit(state.to_report(), args)


def cmd_simulate(args) -> None:
    sol = DesignSolution.from_json(_load(args.solution))
    cfg = sim.SimConfig(dt=args.dt, t_total=args.t_total, burn_in=args.burn_in, trials=args.trials, seed=args.seed)
    est = sim.simulate(sol, cfg)
    out = est.to_json()
    out["analytic"] = sim.analytic_variance(sol)
    out["lyapunov_discrete"] = sim.lyapunov_total(sol, cfg.dt)
    _emit(out, args)


def cmd_reproduce_table(args) -> None:
    results = table.reproduce(exact_threshold=args.exact_threshold, restarts=args.restarts, seed=args.seed)
    text = table.to_csv(results)
    Path(args.output).write_text(text, encoding="utf-8", newline="\n")
    if args.json:
        rows = [
            {
                "n": r.row.n,
                "classes": list(r.row.generators),
                "h": list(r.row.h),
                "hstar_mad": r.hstar_mad,
                "hstar_cmad": None if r.cmad is None else r.hstar_cmad,
                "delta": None if r.cmad is None else r.delta,
                "heuristic": r.heuristic,
                "note": r.note,
            }
            for r in results
        ]
        _emit({"output": args.output, "rows": rows}, args)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="full-precision JSON output")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--exact-threshold", type=int, default=circulant.DEFAULT_EXACT_THRESHOLD)
    common.add_argument("--restarts", type=int, default=circulant.DEFAULT_RESTARTS)
    common.add_argument("--capacity-override", default=None, help="per-class capacities, e.g. 5,8")

    p = argparse.ArgumentParser(prog="capconsensus", description="Capacity-constrained robust consensus design.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("hstar", parents=[common], help="robustness measure H* of a graph")
    s.add_argument("graph")
    s.set_defaults(func=cmd_hstar)

    s = sub.add_parser("feasibility", parents=[common], help="necessary feasibility conditions")
    s.add_argument("graph")
    s.add_argument("k", type=int)
    s.set_defaults(func=cmd_feasibility)

    s = sub.add_parser("solve", parents=[common], help="complete-graph, circulant or brute-force design")
    s.add_argument("spec")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("allocate", parents=[common], help="greedy allocation of spare capacity")
    s.add_argument("graph")
    s.add_argument("initial")
    s.add_argument("--method", choices=("eig", "pinv"), default="eig")
    s.set_defaults(func=cmd_allocate)

    s = sub.add_parser("simulate", parents=[common], help="Monte-Carlo steady-state variance")
    s.add_argument("solution")
    s.add_argument("--dt", type=float, default=0.01)
    s.add_argument("--t-total", type=float, default=2000.0)
    s.add_argument("--burn-in", type=float, default=200.0)
    s.add_argument("--trials", type=int, default=8)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("reproduce-table", parents=[common], help="recompute the MAD/cMAD comparison table as CSV")
    s.add_argument("output")
    s.set_defaults(func=cmd_reproduce_table)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except CapConsensusError as exc:
        print(json.dumps({"error": exc.code, "message": str(exc)}))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
