"""``pmm`` command line: solve, verify, gen, bench, oracle.

Exit codes: 0 ok, 1 verification mismatch, 2 parse or validation error,
3 infeasible, 4 internal assertion (a ledger row or structural check failed).
"""
import argparse
import csv
import io
import json
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import filtering, generate, lp, oracle, pipeline, stage_three, stage_two
from .matroid import MatroidError
from .model import (INF, InstanceError, IntegralSolution, dilations, dump_json,
                    load_instance, num_str, rat, validate_instance)
from .model import cost as solution_cost

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_INTERNAL = 0, 1, 2, 3, 4


class InputError(Exception):
    pass


def _load(path):
    try:
        inst = load_instance(path)
    except (OSError, InstanceError, MatroidError) as exc:
        raise InputError(str(exc)) from exc
    bad = validate_instance(inst)
    if bad:
        kind, detail = bad[0]
        raise InputError(f"{path}: invalid instance ({len(bad)} problems; first: {kind} {detail})")
    return inst


def _write(text, dest):
    if dest in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(dest).write_text(text, encoding="utf-8")


def _dump(text, dest):
    if dest == "-":
        sys.stderr.write(text)
    else:
        Path(dest).write_text(text, encoding="utf-8")


def cmd_solve(args):
    inst = _load(args.instance)
    t0 = time.perf_counter()
    try:
        pipeline.check_mode(inst, args.mode)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if args.dump_lp:
        _dump(lp.lp_to_text(lp.build_main_lp(inst)[0]), args.dump_lp)
    try:
        main = pipeline.solve_main(inst)
    except pipeline.Infeasible:
        print("infeasible: the LP relaxation has no feasible point, "
              "so no feasible integral solution exists", file=sys.stderr)
        return EXIT_INFEASIBLE
    report = pipeline.solve_instance(inst, args.mode, main, strict=False)
    elapsed = time.perf_counter() - t0
    if args.dump_stage2:
        _dump(stage_two.dump_text(report.sets, report.half), args.dump_stage2)
    if args.dump_stage3:
        _dump(stage_three.dump_text(report.inst_r, report.half, report.clustering),
              args.dump_stage3)
    sol = report.solution.to_json(inst)
    if args.decimal:
        sol["decimal"] = {"cost": float(report.solution.cost),
                          "max_dilation": float(report.solution.max_dilation())}
    _write(dump_json(sol), args.out)
    if args.report:
        rep = report.to_json(inst, decimal=args.decimal)
        if args.timing:
            rep["timing_s"] = round(elapsed, 6)
        _write(dump_json(rep), args.report)
    bad = report.failures()
    if bad:
        row = bad[0]
        print(f"ledger failure ({len(bad)} rows); first: {row.name}: "
              f"{num_str(row.lhs)} vs {num_str(row.rhs)}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


def _read_rat(value, field):
    if value == "inf":
        return INF
    try:
        return rat(value)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise InputError(f"solution field {field!r} is not a rational: {value!r}") from exc


def verify_solution(inst, sol):
    """List of mismatch messages for a solution JSON dict (empty when valid)."""
    out = []
    for key in ("open", "assign", "cost", "max_dilation"):
        if key not in sol:
            raise InputError(f"solution lacks field {key!r}")
    opened = list(sol["open"])
    unknown = [i for i in opened if i not in inst.cost]
    if unknown:
        return [f"open: unknown facilities {unknown}"]
    if len(set(opened)) != len(opened):
        out.append("open: duplicate facilities")
    hit = inst.matroid.separate({i: Fraction(1 if i in opened else 0) for i in inst.facilities})
    if hit is not None:
        T, r = hit
        out.append(f"open: not independent; rank row {sorted(T)} <= {r} "
                   f"has {len(set(T) & set(opened))}")
    assign = sol["assign"]
    missing = [j for j in inst.clients if j not in assign]
    extra = [j for j in assign if j not in inst.radius]
    if missing or extra:
        out.append(f"assign: missing {missing} extra {extra}")
        return out
    closed = [j for j in inst.clients if assign[j] not in opened]
    if closed:
        out.append(f"assign: clients sent to facilities not open: {closed}")
        return out
    real = solution_cost(inst, IntegralSolution(frozenset(opened), dict(assign)))
    claimed = _read_rat(sol["cost"], "cost")
    if real != claimed:
        out.append(f"cost: claimed {sol['cost']} but recomputed {real}")
    dil = dilations(inst, assign)
    md = max(dil.values()) if dil else 0
    claimed_md = _read_rat(sol["max_dilation"], "max_dilation")
    same = (md == claimed_md) if not (isinstance(md, float) and math.isinf(md)) else \
        (isinstance(claimed_md, float) and math.isinf(claimed_md))
    if not same:
        out.append(f"max_dilation: claimed {sol['max_dilation']} but recomputed {num_str(md)}")
    return out


def cmd_verify(args):
    inst = _load(args.instance)
    try:
        sol = json.loads(Path(args.solution).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"{args.solution}: {exc}") from exc
    problems = verify_solution(inst, sol)
    for p in problems:
        print(f"mismatch: {p}")
    if problems:
        return EXIT_MISMATCH
    print("ok")
    return EXIT_OK


def cmd_gen(args):
    data = generate.generate(args.seed, n_fac=args.facilities, n_cli=args.clients,
                             matroid=args.matroid, q=args.q, slack=args.slack,
                             radius_rule=args.radius_rule, grid=args.grid,
                             plant_infeasible=args.plant_infeasible, check=not args.no_check)
    _write(dump_json(data), args.out)
    return EXIT_OK


BENCH_FIELDS = ["instance", "mode", "status", "lp_value", "cost", "ratio", "max_dilation",
                "ledger_failures"]


def bench_rows(directory, modes):
    rows = []
    for path in sorted(Path(directory).glob("*.json")):
        base = {"instance": path.name}
        try:
            inst = _load(path)
        except InputError as exc:
            rows.append({**base, "mode": "-", "status": f"input-error: {exc}"})
            continue
        try:
            main = pipeline.solve_main(inst)
        except pipeline.Infeasible:
            rows += [{**base, "mode": m, "status": "infeasible"} for m in modes]
            continue
        for mode in modes:
            row = {**base, "mode": mode, "lp_value": str(main.value)}
            if mode == "uniform" and not inst.is_uniform_radius():
                rows.append({**row, "status": "skipped"})
                continue
            try:
                rep = pipeline.solve_instance(inst, mode, main, strict=False)
            except AssertionError as exc:
                rows.append({**row, "status": f"error: {exc}"})
                continue
            sol = rep.solution
            bad = rep.failures()
            ratio = sol.cost / main.value if main.value else None
            rows.append({**row, "status": "ok" if not bad else "ledger-fail",
                         "cost": str(sol.cost), "ratio": "" if ratio is None else str(ratio),
                         "max_dilation": num_str(sol.max_dilation()),
                         "ledger_failures": str(len(bad))})
    return rows


def _as_float(v):
    if v in (None, ""):
        return None
    return math.inf if v == "inf" else float(Fraction(v))


def bench_table(rows):
    lines = [f"{'instance':<28} {'mode':<10} {'status':<12} {'ratio':>8} {'dilation':>9}"]
    for r in rows:
        ratio = _as_float(r.get("ratio"))
        dil = _as_float(r.get("max_dilation"))
        lines.append(f"{r['instance']:<28} {r['mode']:<10} {r['status'][:12]:<12} "
                     f"{'' if ratio is None else f'{ratio:.4f}':>8} "
                     f"{'' if dil is None else f'{dil:.4f}':>9}")
    by_mode = {}
    for r in rows:
        by_mode.setdefault(r["mode"], []).append(r)
    for mode, rs in by_mode.items():
        ratios = [x for x in (_as_float(r.get("ratio")) for r in rs) if x is not None]
        dils = [x for x in (_as_float(r.get("max_dilation")) for r in rs) if x is not None]
        fails = sum(1 for r in rs if r["status"] not in ("ok", "infeasible", "skipped"))
        lines.append(f"[{mode}] runs={len(rs)} max_ratio={max(ratios, default=0):.4f} "
                     f"max_dilation={max(dils, default=0):.4f} failures={fails}")
    return "\n".join(lines) + "\n"


def cmd_bench(args):
    for m in args.modes:
        if m not in filtering.MODES:
            raise InputError(f"unknown mode {m!r}")
    if not Path(args.directory).is_dir():
        raise InputError(f"{args.directory}: not a directory")
    rows = bench_rows(args.directory, args.modes)
    sys.stdout.write(bench_table(rows))
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=BENCH_FIELDS, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: r.get(k, "") for k in BENCH_FIELDS})
    if args.csv:
        _write(buf.getvalue(), args.csv)
    failed = any(r["status"] not in ("ok", "infeasible", "skipped") for r in rows)
    return EXIT_INTERNAL if failed else EXIT_OK


def cmd_oracle(args):
    inst = _load(args.instance)
    try:
        rep = oracle.oracle_report(inst, modes=args.modes, cap=args.cap)
    except oracle.CapExceeded as exc:
        raise InputError(str(exc)) from exc
    sys.stdout.write(dump_json(rep.to_json(inst)))
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="pmm", description="Priority matroid median by LP rounding.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="round the LP and write a solution")
    p.add_argument("instance")
    p.add_argument("--mode", choices=filtering.MODES, default="general21")
    p.add_argument("--out", default=None, help="solution JSON path (default: stdout)")
    p.add_argument("--report", default=None, help="write the run report JSON here")
    p.add_argument("--dump-lp", nargs="?", const="-", default=None, metavar="FILE",
                   help="write the main LP (stderr when FILE is omitted)")
    p.add_argument("--dump-stage2", nargs="?", const="-", default=None, metavar="FILE")
    p.add_argument("--dump-stage3", nargs="?", const="-", default=None, metavar="FILE")
    p.add_argument("--decimal", action="store_true", help="add approximate floats")
    p.add_argument("--timing", action="store_true", help="add wall time to the report")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="recheck a solution against its instance")
    p.add_argument("instance")
    p.add_argument("solution")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", help="generate a random instance")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--facilities", type=int, default=8)
    p.add_argument("--clients", type=int, default=8)
    p.add_argument("--matroid", choices=generate.MATROID_KINDS, default="uniform")
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--slack", default="3/2")
    p.add_argument("--radius-rule", choices=("qth", "uniform"), default="qth")
    p.add_argument("--grid", type=int, default=20)
    p.add_argument("--plant-infeasible", action="store_true")
    p.add_argument("--no-check", action="store_true", help="skip the feasibility retries")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="run every instance in a directory")
    p.add_argument("directory")
    p.add_argument("--modes", nargs="+", default=["general21", "general36", "uniform"])
    p.add_argument("--csv", default=None, help="CSV output path")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("oracle", help="brute-force optimum and per-mode ratios")
    p.add_argument("instance")
    p.add_argument("--cap", type=int, default=oracle.DEFAULT_CAP)
    p.add_argument("--modes", nargs="+", default=None, choices=filtering.MODES)
    p.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except AssertionError as exc:
        print(f"internal assertion: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
