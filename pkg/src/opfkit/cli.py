"""Command-line entry point.

Every subcommand that writes artifacts also writes a ``manifest.json``
recording the arguments, seed, package version, and timings, so runs are
reproducible from the manifest alone.  Exit codes: 0 success, 1 solver
failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict

import numpy as np

from . import __version__, casegen, fspace, localopt, netmodel, pflow, pipeline, sdprelax

SIX = "{:.6g}".format


def _out_dir(args):
    out = args.out or os.environ.get("OPFKIT_OUT", ".")
    os.makedirs(out, exist_ok=True)
    return out


def _write(path, text):
    with open(path, "w") as f:
        f.write(text)
    return path


def _manifest(args, outputs, t0, extra=None):
    doc = {
        "argv": sys.argv[1:],
        "subcommand": args.cmd,
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "python": sys.version.split()[0],
        "elapsed_s": round(time.time() - t0, 3),
        "outputs": outputs,
    }
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=1)


def _load(path):
    return netmodel.load_case(path)


def _params_from_args(args):
    if args.family:
        return casegen.FAMILIES[args.family]
    with open(args.params) as f:
        doc = json.load(f)
    gauss = {k: casegen.GaussSpec(*v) for k, v in doc.pop("gauss").items()}
    return casegen.GenerationParams(**doc, **gauss)


def cmd_generate(args):
    t0 = time.time()
    out = _out_dir(args)
    params = _params_from_args(args)
    cases, attempts = casegen.generate_batch(params, args.count, args.seed)
    outputs = []
    for i, case in enumerate(cases):
        path = os.path.join(out, f"case_{i:04d}.json")
        _write(path, netmodel.emit_case(case))
        outputs.append(path)
    _write(os.path.join(out, "manifest.json"),
           _manifest(args, outputs, t0, {"attempts": attempts, "family": params.name}))
    print(f"wrote {len(cases)} cases ({attempts} attempts) to {out}")
    return 0


def cmd_screen(args):
    t0 = time.time()
    out = _out_dir(args)
    params = _params_from_args(args)
    results = pipeline.screen_batch(params, args.count, args.threshold, args.seed,
                                    n_starts=args.starts)
    js = os.path.join(out, "screening.json")
    cs = os.path.join(out, "screening.csv")
    _write(js, pipeline.screening_report_json(results))
    _write(cs, pipeline.screening_report_csv(results))
    selected = [r for r in results if r.selected]
    for r in selected:
        if r.case is not None:
            path = os.path.join(out, f"selected_{r.case_id}.json")
            _write(path, netmodel.emit_case(r.case))
    _write(os.path.join(out, "manifest.json"),
           _manifest(args, [js, cs], t0, {"selected": len(selected)}))
    print(f"screened {len(results)} cases; {len(selected)} selected (threshold {SIX(args.threshold)}%)")
    return 0


def cmd_fspace(args):
    t0 = time.time()
    out = _out_dir(args)
    case = _load(args.case)
    grid = fspace.default_grid(case, points=args.grid)
    result = fspace.map_feasible_space(case, grid, seed=args.seed)
    axes = args.axes.split(",") if args.axes else None
    if axes:
        ds = fspace.project(case, result.points, axes)
        fspace.label_components(ds, result.points, radius=args.radius)
    csv_path = _write(os.path.join(out, "fspace.csv"), fspace.to_csv(case, result.points))
    json_path = _write(os.path.join(out, "fspace.json"), fspace.to_json(case, result))
    _write(os.path.join(out, "manifest.json"),
           _manifest(args, [csv_path, json_path], t0,
                     {"n_feasible": len(result.points), "certified": result.certified}))
    print(f"{len(result.points)} feasible points from {result.n_grid} grid points "
          f"({result.n_solutions} power-flow solutions); certified={result.certified}")
    return 0


def cmd_solve_local(args):
    t0 = time.time()
    case = _load(args.case)
    pt = localopt.solve_local(case)
    print(f"status: {pt.status}")
    print(f"objective: {SIX(pt.objective)} $/hr")
    for g, p, q in zip(case.gens, pt.p_gen, pt.q_gen):
        print(f"  gen@{g.bus}: P {SIX(p)} MW, Q {SIX(q)} MVAr")
    if args.out:
        out = _out_dir(args)
        path = os.path.join(out, "solution.json")
        _write(path, json.dumps({
            "status": pt.status,
            "objective": pt.objective,
            "vm": np.abs(pt.v).tolist(),
            "va_deg": np.degrees(np.angle(pt.v)).tolist(),
            "p_gen": pt.p_gen.tolist(),
            "q_gen": pt.q_gen.tolist(),
            "binding": pt.binding.binding_labels(),
        }, indent=1))
        _write(os.path.join(out, "manifest.json"), _manifest(args, [path], t0))
    return 0 if pt.status != localopt.FAILED else 1


def cmd_multistart(args):
    t0 = time.time()
    case = _load(args.case)
    optima = localopt.multistart(case, n_starts=args.starts, seed=args.seed)
    print(f"{len(optima.points)} distinct local optima from {optima.n_starts} starts "
          f"({optima.n_failed} failed, {optima.n_stationary} stationary-only)")
    for pt, count in zip(optima.points, optima.basin_counts):
        print(f"  {SIX(pt.objective)} $/hr  (basin {count})")
    if args.out:
        out = _out_dir(args)
        path = os.path.join(out, "optima.json")
        _write(path, json.dumps([
            {"objective": p.objective, "basin": c,
             "vm": np.abs(p.v).tolist(), "va_deg": np.degrees(np.angle(p.v)).tolist()}
            for p, c in zip(optima.points, optima.basin_counts)
        ], indent=1))
        _write(os.path.join(out, "manifest.json"), _manifest(args, [path], t0))
    return 0 if optima.points else 1


def cmd_solve_sdp(args):
    t0 = time.time()
    case = _load(args.case)
    prob = sdprelax.build_sdp(case)
    if args.emit_sdpa:
        _write(args.emit_sdpa, sdprelax.to_sdpa(prob))
    sol = sdprelax.solve_sdp(prob)
    print(f"status: {sol.status}")
    if sol.status != "infeasible":
        print(f"lower bound: {SIX(sol.bound)} $/hr")
        print(f"rank: {sol.rank} (leading eigenvalues: "
              + ", ".join(SIX(e) for e in sol.eigenvalues[:4]) + ")")
    if args.out:
        out = _out_dir(args)
        path = os.path.join(out, "sdp.json")
        _write(path, json.dumps({
            "status": sol.status,
            "bound": None if not np.isfinite(sol.bound) else sol.bound,
            "rank": sol.rank,
            "eigenvalues": sol.eigenvalues.tolist(),
            "gap": sol.gap,
            "iterations": sol.iterations,
            "recovered_vm": None if sol.recovered_v is None else np.abs(sol.recovered_v).tolist(),
        }, indent=1))
        _write(os.path.join(out, "manifest.json"), _manifest(args, [path], t0))
    return 0 if sol.status == "optimal" else 1


def cmd_gap(args):
    report = sdprelax.optimality_gap(args.local, args.bound)
    print(SIX(report.gap_percent))
    return 0


def cmd_modify(args):
    t0 = time.time()
    case = _load(args.case)
    recipe = pipeline.ModificationRecipe(args.dPd, args.dQd, args.dVu, args.dVl, args.dQg)
    mod = pipeline.apply_recipe(case, recipe)
    out = _out_dir(args)
    path = os.path.join(out, args.name or "modified_case.json")
    _write(path, netmodel.emit_case(mod))
    _write(os.path.join(out, "manifest.json"),
           _manifest(args, [path], t0, {"recipe": asdict(recipe)}))
    print(f"wrote {path}")
    return 0


def cmd_pf_enumerate(args):
    t0 = time.time()
    case = _load(args.case)
    model = netmodel.build_admittance(case)

    def parse_pairs(text):
        out = {}
        if text:
            for part in text.split(","):
                bus, val = part.split("=")
                out[int(bus)] = float(val)
        return out

    spec = pflow.spec_from_setpoints(case, parse_pairs(args.vset), parse_pairs(args.pset))
    sys_ = pflow.build_system(case, model, spec)
    sols = pflow.enumerate_solutions(sys_, gamma_seed=args.seed)
    print(f"{len(sols)} solutions ({sols.n_paths} paths, {sols.n_diverged} diverged, "
          f"{sols.n_nonreal} non-real, {sols.n_failed} failed); certified={sols.certified}")
    for v in sols.solutions:
        print("  " + "  ".join(f"{abs(x):.6g}∠{np.degrees(np.angle(x)):.4g}°" for x in v))
    if args.out:
        out = _out_dir(args)
        path = os.path.join(out, "solutions.json")
        _write(path, json.dumps({
            "certified": sols.certified,
            "solutions": [{"vm": np.abs(v).tolist(), "va_deg": np.degrees(np.angle(v)).tolist()}
                          for v in sols.solutions],
        }, indent=1))
        _write(os.path.join(out, "manifest.json"), _manifest(args, [path], t0))
    return 0


def cmd_gap_table(args):
    cases = [(os.path.basename(p), _load(p)) for p in args.cases]
    rows = pipeline.gap_table(cases, n_starts=args.starts, seed=args.seed)
    print(pipeline.format_gap_table(rows))
    if args.out:
        out = _out_dir(args)
        _write(os.path.join(out, "gap_table.json"),
               json.dumps([asdict(r) for r in rows], indent=1))
    return 0 if not any(r.failed for r in rows) else 1


def build_parser():
    p = argparse.ArgumentParser(prog="opfkit", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(sp, seed=True, out=True):
        if seed:
            sp.add_argument("--seed", type=int, default=0)
        if out:
            sp.add_argument("--out", default=None, help="output directory (default $OPFKIT_OUT or .)")
        sp.add_argument("--threads", type=int, default=1, help="worker bound (results are thread-count independent)")

    sp = sub.add_parser("generate", help="write random cases and a manifest")
    sp.add_argument("--family", choices=sorted(casegen.FAMILIES), default=None)
    sp.add_argument("--params", default=None, help="JSON file of GenerationParams")
    sp.add_argument("--count", type=int, default=10)
    common(sp)
    sp.set_defaults(fn=cmd_generate)

    sp = sub.add_parser("screen", help="screen random cases for optimality gaps")
    sp.add_argument("--family", choices=sorted(casegen.FAMILIES), default=None)
    sp.add_argument("--params", default=None)
    sp.add_argument("--count", type=int, default=100)
    sp.add_argument("--threshold", type=float, default=1.0, help="percent gap")
    sp.add_argument("--starts", type=int, default=10)
    common(sp)
    sp.set_defaults(fn=cmd_screen)

    sp = sub.add_parser("fspace", help="map the discretized feasible space to CSV/JSON")
    sp.add_argument("--case", required=True)
    sp.add_argument("--axes", default=None, help="projection axes, e.g. pg2,qg2")
    sp.add_argument("--grid", type=int, default=25, help="points per degree of freedom")
    sp.add_argument("--radius", type=float, default=None, help="connectivity radius")
    common(sp)
    sp.set_defaults(fn=cmd_fspace)

    sp = sub.add_parser("solve-local", help="one local OPF solve from flat start")
    sp.add_argument("--case", required=True)
    common(sp, seed=False)
    sp.set_defaults(fn=cmd_solve_local)

    sp = sub.add_parser("multistart", help="multistart local-optima search")
    sp.add_argument("--case", required=True)
    sp.add_argument("--starts", type=int, default=200)
    common(sp)
    sp.set_defaults(fn=cmd_multistart)

    sp = sub.add_parser("solve-sdp", help="semidefinite lower bound")
    sp.add_argument("--case", required=True)
    sp.add_argument("--emit-sdpa", default=None, help="also write the sparse SDPA form here")
    common(sp, seed=False)
    sp.set_defaults(fn=cmd_solve_sdp)

    sp = sub.add_parser("gap", help="optimality gap from a local value and a bound")
    sp.add_argument("--local", type=float, required=True)
    sp.add_argument("--bound", type=float, required=True)
    sp.set_defaults(fn=cmd_gap)

    sp = sub.add_parser("modify", help="apply a load/limit tightening recipe")
    sp.add_argument("--case", required=True)
    sp.add_argument("--dPd", type=float, default=0.0)
    sp.add_argument("--dQd", type=float, default=0.0)
    sp.add_argument("--dVu", type=float, default=0.0)
    sp.add_argument("--dVl", type=float, default=0.0)
    sp.add_argument("--dQg", type=float, default=0.0)
    sp.add_argument("--name", default=None)
    common(sp, seed=False)
    sp.set_defaults(fn=cmd_modify)

    sp = sub.add_parser("pf-enumerate", help="all power-flow solutions at fixed setpoints")
    sp.add_argument("--case", required=True)
    sp.add_argument("--vset", default="", help="bus=V pairs, comma separated")
    sp.add_argument("--pset", default="", help="bus=P(MW) pairs, comma separated")
    common(sp)
    sp.set_defaults(fn=cmd_pf_enumerate)

    sp = sub.add_parser("gap-table", help="worst/best optima, bound, and gap per case")
    sp.add_argument("cases", nargs="+")
    sp.add_argument("--starts", type=int, default=200)
    common(sp)
    sp.set_defaults(fn=cmd_gap_table)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (netmodel.CaseError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
