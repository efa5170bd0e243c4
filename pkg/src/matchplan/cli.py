"""Command-line entry point exposing solvers, constructors, simulations,
reports, and the service launcher.

Exit codes: 0 success, 1 operational error (bad input, malformed file),
2 mathematically negative answer (infeasible, losing, violations found),
3 search budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Optional

from .bipartite import (
    ListTooShortError,
    NotBipartiteError,
    PaintingEngine,
    bipartite_edge_coloring,
    detect_bipartition,
)
from .bounds import VacuousBoundError, bound_report, ub_shannon
from .complete import (
    DiagonalSpec,
    classify_chi_c_kn,
    classify_chi_c_kn_literal,
    construct_kn_t1,
    round_robin,
    symmetric_latin_construct,
    symmetric_latin_decision,
    symmetric_partial_latin,
)
from .engine import (
    GreedyEngine,
    LowerBoundAdversary,
    RandomAdversary,
    ScriptedAdversary,
    SimulationError,
    make_engine,
    simulate,
)
from .game import GameStateLosing, chi_ol_exact
from .model import (
    AbsenceAssignment,
    BudgetMap,
    ModelError,
    Multigraph,
    Schedule,
    complete_graph,
    verify_schedule,
)
from .solvers import (
    SearchBudgetExceeded,
    chi_prime,
    chi_prime_c,
    chi_t_exact,
    chi_total,
    chi_prime_value,
)

DEFAULT_SEED = 2024


def _read_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except FileNotFoundError:
        raise ModelError(f"{path}: file not found")
    except json.JSONDecodeError as exc:
        raise ModelError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}")


def _load_graph(args) -> tuple[Multigraph, Optional[BudgetMap]]:
    return Multigraph.from_json_dict(_read_json(args.graph))


def _load_budgets(args, g: Multigraph) -> BudgetMap:
    if getattr(args, "t", None) is not None:
        return BudgetMap.constant(g, args.t)
    if getattr(args, "budgets", None):
        return BudgetMap.from_json_dict(g, _read_json(args.budgets))
    _, budgets = Multigraph.from_json_dict(_read_json(args.graph))
    return budgets if budgets is not None else BudgetMap.constant(g, 0)


def _load_absences(path: str) -> AbsenceAssignment:
    return AbsenceAssignment.from_json_dict(_read_json(path))


def _emit(args, payload, text: str) -> None:
    out = json.dumps(payload, indent=2) if args.format == "json" else text
    print(out)


# ---------- solver commands ----------

def cmd_chi_prime(args) -> int:
    g, _ = _load_graph(args)
    res = chi_prime(g, node_budget=args.budget)
    _emit(args, res.to_json_dict(), str(res.value))
    return 0


def cmd_chi_c(args) -> int:
    g, _ = _load_graph(args)
    c = _load_absences(args.absences)
    res = chi_prime_c(g, c, node_budget=args.budget)
    _emit(args, res.to_json_dict(), str(res.value))
    return 0


def cmd_chi_t(args) -> int:
    g, _ = _load_graph(args)
    t = _load_budgets(args, g)
    res, worst = chi_t_exact(g, t, node_budget=args.budget)
    payload = res.to_json_dict()
    payload["worst_absences"] = worst.to_json_dict()
    _emit(args, payload, str(res.value))
    return 0


def cmd_chi_total(args) -> int:
    g, _ = _load_graph(args)
    res = chi_total(g, node_budget=args.budget)
    _emit(args, res.to_json_dict(), str(res.value))
    return 0


def cmd_chi_ol(args) -> int:
    g, _ = _load_graph(args)
    t = _load_budgets(args, g)
    res = chi_ol_exact(g, t, node_budget=args.budget, use_canonical=args.canonical,
                       restrict_maximal=not args.no_maximal_restriction)
    payload = res.to_json_dict()
    _emit(args, payload, str(res.value))
    if args.emit_strategy:
        data = res.oracle.to_json_dict()
        Path(args.emit_strategy).write_text(json.dumps(data, indent=2), encoding="utf-8")
    return 0


def cmd_bounds(args) -> int:
    g, _ = _load_graph(args)
    t = _load_budgets(args, g)
    blocks = None
    try:
        blocks = detect_bipartition(g).as_tuple()
    except NotBipartiteError:
        pass
    report = bound_report(g, t, chi_prime_value=chi_prime_value(g), blocks=blocks)
    _emit(args, report.to_json_dict(), report.to_text())
    return 0


# ---------- constructions ----------

def _schedule_output(args, g: Multigraph, schedule: Schedule) -> None:
    if args.format == "csv":
        print(schedule.timetable_csv(g), end="")
    else:
        print(json.dumps(schedule.to_json_dict(), indent=2))


def cmd_construct_kn(args) -> int:
    data = _read_json(args.labels)
    if isinstance(data, list):
        labels = {i + 1: int(v) for i, v in enumerate(data)}
    else:
        labels = {int(k): int(v) for k, v in data.items()}
    schedule = construct_kn_t1(args.n, labels)
    _schedule_output(args, complete_graph(args.n), schedule)
    return 0


def cmd_latin(args) -> int:
    diagonal = tuple(int(x) for x in args.diag.split(","))
    spec = DiagonalSpec(len(diagonal), diagonal)
    if args.action == "decide":
        ok = symmetric_latin_decision(spec)
        print(json.dumps({"exists": ok}) if args.format == "json" else ("yes" if ok else "no"))
        return 0 if ok else 2
    square = symmetric_latin_construct(spec, node_budget=args.budget)
    if square is None:
        print(json.dumps({"exists": False}) if args.format == "json" else "infeasible")
        return 2
    payload = {"exists": True, "square": square.to_lists()}
    text = "\n".join(" ".join(map(str, row)) for row in square.to_lists())
    _emit(args, payload, text)
    return 0


def cmd_latin_partial(args) -> int:
    diagonal = tuple(int(x) for x in args.diag.split(","))
    square = symmetric_partial_latin(len(diagonal), diagonal)
    payload = {"square": square.to_lists(), "partial": True}
    text = "\n".join(" ".join(map(str, row)) for row in square.to_lists())
    _emit(args, payload, text)
    return 0


def cmd_round_robin(args) -> int:
    schedule = round_robin(args.n)
    _schedule_output(args, complete_graph(args.n), schedule)
    return 0


def cmd_classify_kn(args) -> int:
    labels = tuple(int(x) for x in args.labels.split(","))
    value = classify_chi_c_kn(len(labels), labels)
    literal = classify_chi_c_kn_literal(len(labels), labels)
    payload = {"rounds": value}
    if literal != value:
        payload["note"] = f"attained-values reading would give {literal}"
    _emit(args, payload, str(value) if literal == value
          else f"{value} (attained-values reading would give {literal})")
    return 0


# ---------- bipartite ----------

def cmd_bipartite(args) -> int:
    g, _ = _load_graph(args)
    blocks = detect_bipartition(g)
    if args.action == "color":
        colors = bipartite_edge_coloring(g, blocks)
        payload = {"colors": {f"{u}-{v}": colors[e] for e, (u, v) in enumerate(g.edges)},
                   "palette": g.max_degree()}
        _emit(args, payload, "\n".join(f"{u}-{v}: {colors[e]}"
                                       for e, (u, v) in enumerate(g.edges)))
        return 0
    t = _load_budgets(args, g)
    engine = PaintingEngine(g)
    limit = engine.declared_bound(t)
    if args.action == "schedule":
        adversary = (ScriptedAdversary(_load_absences(args.absences))
                     if args.absences else RandomAdversary(args.seed, 0.0))
    else:
        adversary = RandomAdversary(args.seed, args.density)
    from .engine import PaintingEngineAdapter
    adapter = PaintingEngineAdapter(g)
    adapter.inner = engine
    result = simulate(g, t, adapter, adversary, limit=limit)
    if args.format == "csv":
        print(result.schedule.timetable_csv(g), end="")
    else:
        payload = result.to_json_dict()
        payload["declared_limit"] = limit
        print(json.dumps(payload, indent=2))
    return 0 if result.completed else 2


# ---------- simulation ----------

def cmd_simulate(args) -> int:
    g, _ = _load_graph(args)
    t = _load_budgets(args, g)
    plan = make_engine(args.engine, g, t)
    limit = args.limit if args.limit is not None else plan.limit
    if args.adversary == "lower-bound":
        adversary = LowerBoundAdversary(g, t)
    elif args.adversary == "random":
        adversary = RandomAdversary(args.seed, args.density)
    elif args.adversary == "scripted":
        if not args.absences:
            raise ModelError("--absences is required for the scripted adversary")
        adversary = ScriptedAdversary(_load_absences(args.absences))
    else:
        raise ModelError(f"unknown adversary {args.adversary!r}")
    result = simulate(g, t, plan.engine, adversary, limit=limit)
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["engine", "adversary", "rounds", "completed"])
        writer.writerow([plan.name, adversary.name, result.rounds_used, result.completed])
        print(buf.getvalue(), end="")
    else:
        payload = result.to_json_dict()
        payload.update({"engine": plan.name, "adversary": adversary.name,
                        "declared_limit": limit})
        print(json.dumps(payload, indent=2))
    return 0 if result.completed else 2


def cmd_verify(args) -> int:
    g, _ = _load_graph(args)
    schedule = Schedule.from_json_dict(_read_json(args.schedule), graph=g)
    c = _load_absences(args.absences) if args.absences else AbsenceAssignment({})
    problems = verify_schedule(g, c, schedule)
    if args.format == "json":
        print(json.dumps({"ok": not problems,
                          "violations": [str(p) for p in problems]}, indent=2))
    else:
        print("ok" if not problems else "\n".join(str(p) for p in problems))
    return 0 if not problems else 2


# ---------- reports ----------

def figure2_rows(max_n: int, node_budget: Optional[int] = None) -> list[dict]:
    rows = []
    for n in range(2, max_n + 1):
        g = complete_graph(n)
        t = BudgetMap.constant(g, 1)
        online = chi_ol_exact(g, t, use_canonical=n >= 5, node_budget=node_budget).value
        prefixed, _ = chi_t_exact(g, t, node_budget=node_budget)
        total = chi_total(g, node_budget=node_budget).value
        rows.append({
            "n": n,
            "online_single_absence": online,
            "prefixed_single_absence": prefixed.value,
            "total_coloring": total,
            "chromatic_index_plus_one": chi_prime_value(g) + 1,
        })
    return rows


def cmd_report_figure2(args) -> int:
    rows = figure2_rows(args.max_n, node_budget=args.budget)
    if args.format == "json":
        print(json.dumps(rows, indent=2))
    elif args.format == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        print(buf.getvalue(), end="")
    else:
        header = f"{'n':>3} {'online':>7} {'prefixed':>9} {'total':>6} {'chi+1':>6}"
        lines = [header]
        for r in rows:
            lines.append(f"{r['n']:>3} {r['online_single_absence']:>7} "
                         f"{r['prefixed_single_absence']:>9} {r['total_coloring']:>6} "
                         f"{r['chromatic_index_plus_one']:>6}")
        print("\n".join(lines))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(data_dir=args.data_dir, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


# ---------- parser ----------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matchplan",
        description="Tournament scheduling with allowed absences: exact indices, "
                    "constructive schedulers, adversary simulations, live service.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, graph=True, budget=True):
        if graph:
            p.add_argument("--graph", required=True, help="graph JSON file")
        if budget:
            p.add_argument("--budget", type=int, default=None, help="search node budget")
        p.add_argument("--format", choices=["json", "text", "csv"], default="text")

    p = sub.add_parser("chi-prime", help="rounds needed with no absences")
    common(p)
    p.set_defaults(func=cmd_chi_prime)

    p = sub.add_parser("chi-c", help="rounds needed under pre-fixed absences")
    common(p)
    p.add_argument("--absences", required=True, help="absences JSON file")
    p.set_defaults(func=cmd_chi_c)

    p = sub.add_parser("chi-t", help="worst case over budgeted pre-fixed absences")
    common(p)
    p.add_argument("--t", type=int, default=None, help="constant absence budget")
    p.add_argument("--budgets", help="budgets JSON file")
    p.set_defaults(func=cmd_chi_t)

    p = sub.add_parser("chi-total", help="total coloring value")
    common(p)
    p.set_defaults(func=cmd_chi_total)

    p = sub.add_parser("chi-ol", help="worst case under unannounced absences")
    common(p)
    p.add_argument("--t", type=int, default=None)
    p.add_argument("--budgets", help="budgets JSON file")
    p.add_argument("--canonical", action="store_true",
                   help="memoize game states up to relabeling")
    p.add_argument("--no-maximal-restriction", action="store_true",
                   help="search all matchings, not just maximal ones "
                        "(cross-validation on tiny instances)")
    p.add_argument("--emit-strategy", help="write the winning strategy as JSON")
    p.set_defaults(func=cmd_chi_ol)

    p = sub.add_parser("bounds", help="closed-form lower/upper bounds")
    common(p)
    p.add_argument("--t", type=int, default=None)
    p.add_argument("--budgets", help="budgets JSON file")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("construct", help="constructive schedulers")
    construct_sub = p.add_subparsers(dest="what", required=True)
    pk = construct_sub.add_parser("kn", help="complete tournament, one absence each")
    pk.add_argument("--n", type=int, required=True)
    pk.add_argument("--labels", required=True, help="JSON list or map of forbidden rounds")
    pk.add_argument("--format", choices=["json", "csv"], default="json")
    pk.set_defaults(func=cmd_construct_kn)

    p = sub.add_parser("classify-kn", help="exact round count for single absences on K_n")
    p.add_argument("--labels", required=True, help="comma-separated forbidden rounds")
    p.add_argument("--format", choices=["json", "text"], default="text")
    p.set_defaults(func=cmd_classify_kn)

    p = sub.add_parser("latin", help="symmetric Latin squares with prescribed diagonal")
    latin_sub = p.add_subparsers(dest="action", required=True)
    for action in ("decide", "build"):
        pl = latin_sub.add_parser(action)
        pl.add_argument("--diag", required=True, help="comma-separated diagonal")
        pl.add_argument("--budget", type=int, default=None)
        pl.add_argument("--format", choices=["json", "text"], default="text")
        pl.set_defaults(func=cmd_latin, action=action)
    pp = latin_sub.add_parser("partial", help="diagonal may use n+1 symbols")
    pp.add_argument("--diag", required=True)
    pp.add_argument("--format", choices=["json", "text"], default="text")
    pp.set_defaults(func=cmd_latin_partial)

    p = sub.add_parser("round-robin", help="plain circle-method schedule")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_round_robin)

    p = sub.add_parser("bipartite", help="bipartite coloring and painting engine")
    bip_sub = p.add_subparsers(dest="action", required=True)
    for action in ("color", "schedule", "simulate"):
        pb = bip_sub.add_parser(action)
        pb.add_argument("--graph", required=True)
        pb.add_argument("--format", choices=["json", "text", "csv"], default="json")
        pb.add_argument("--t", type=int, default=None)
        pb.add_argument("--budgets")
        pb.add_argument("--absences")
        pb.add_argument("--seed", type=int, default=DEFAULT_SEED)
        pb.add_argument("--density", type=float, default=0.3)
        pb.set_defaults(func=cmd_bipartite, action=action)

    p = sub.add_parser("simulate", help="engine versus adversary")
    common(p)
    p.add_argument("--engine", default="auto",
                   choices=["auto", "greedy", "optimal", "painting"])
    p.add_argument("--adversary", default="random",
                   choices=["random", "lower-bound", "scripted"])
    p.add_argument("--t", type=int, default=None)
    p.add_argument("--budgets")
    p.add_argument("--absences")
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--density", type=float, default=0.3)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="check a schedule against graph and absences")
    p.add_argument("--graph", required=True)
    p.add_argument("--schedule", required=True)
    p.add_argument("--absences")
    p.add_argument("--format", choices=["json", "text"], default="text")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="comparison reports")
    report_sub = p.add_subparsers(dest="which", required=True)
    pf = report_sub.add_parser("figure2", help="single-absence indices for small n")
    pf.add_argument("--max-n", type=int, default=5)
    pf.add_argument("--budget", type=int, default=None)
    pf.add_argument("--format", choices=["json", "text", "csv"], default="text")
    pf.set_defaults(func=cmd_report_figure2)

    p = sub.add_parser("serve", help="run the live scheduling service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--data-dir", default="./matchplan-data")
    p.add_argument("--ui-dir", default=None,
                   help="serve a built web UI bundle at /ui")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SearchBudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except GameStateLosing as exc:
        print(f"losing: {exc}", file=sys.stderr)
        return 2
    except (ModelError, VacuousBoundError, NotBipartiteError, ListTooShortError,
            SimulationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
