"""Command-line entry point.

Subcommands: gen-target, bounds, optimize, search, refine, closure, analyze.
Search stores live in directories holding a manifest, the target, a JSONL
record log and a checkpoint; QSYNTH_CACHE names the default parent for
stores. All floating-point output uses 17 significant digits, so identical
seeds give byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from .analysis import (
    depth_distribution,
    histogram,
    orbit_report,
    pair_usage,
    perfect_set,
    target_self_inverse,
    write_bounds_csv,
    write_depth_csv,
    write_histogram_csv,
    write_orbit_csv,
    write_series_csv,
)
from .bounds import circuit_params, lower_bound, target_params
from .circuits import parse_config
from .grape import OptimizerSettings, multi_restart
from .search import (
    ResultStore,
    SearchJob,
    append_manifest_event,
    fidelity_vs_N,
    load_job,
    permutation_closure,
    refine,
    run_search,
    standard_target,
)
from .targets import random_target, save_target, toffoli_target


def _f17(x):
    return f"{x:.17g}"


def _store_dir(arg, job=None):
    cache = os.environ.get("QSYNTH_CACHE")
    if arg is not None:
        path = Path(arg)
        if not path.is_absolute() and cache:
            path = Path(cache) / path
        return path
    if cache is None:
        raise SystemExit("give --out or set QSYNTH_CACHE")
    name = (
        f"{job.target.source.replace(':', '_').replace('=', '')}"
        f"-n{job.n}m{job.m}N{job.N}-{job.entangler}-seed{job.settings.seed}"
    )
    return Path(cache) / name


def _settings_from_args(args):
    return OptimizerSettings(
        max_iterations=args.iterations,
        step_size=args.step_size,
        adaptive=not args.fixed_step,
        stop_infidelity=args.stop_infidelity,
        seed=args.seed,
        engine=args.engine,
    )


def _add_optimizer_flags(p):
    p.add_argument("--iterations", type=int, default=1000)
    p.add_argument("--step-size", type=float, default=0.05)
    p.add_argument("--fixed-step", action="store_true")
    p.add_argument("--stop-infidelity", type=float, default=1e-13)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--engine", choices=["auto", "fast", "reference"], default="auto")
    p.add_argument("--restarts", type=int, default=1)


def _add_target_flags(p):
    p.add_argument(
        "--target",
        required=True,
        help="toffoliK, random-state, random-unitary, or a target JSON file",
    )
    p.add_argument("--target-seed", type=int, default=0)


def _resolve_target(args, n=None):
    return standard_target(args.target, n=n, seed=args.target_seed)


# --- subcommands --------------------------------------------------------


def cmd_gen_target(args):
    if args.kind == "toffoli":
        spec = toffoli_target(args.n)
    else:
        spec = random_target(args.kind, args.n, args.seed)
    save_target(spec, args.out)
    print(f"wrote {spec.kind} target for n={spec.n} to {args.out}")
    return 0


def cmd_bounds(args):
    ms = [int(m) for m in args.m.split(",")]
    bounds_line = []
    rows = []
    for m in ms:
        lb = lower_bound(args.task, args.n, m)
        bounds_line.append(lb)
        n_max = args.N_max if args.N_max is not None else lb + 2
        for N in range(n_max + 1):
            rows.append(
                (
                    args.task,
                    args.n,
                    m,
                    N,
                    circuit_params(args.task, args.n, m, N),
                    target_params(args.task, args.n),
                )
            )
    print(",".join(str(b) for b in bounds_line))
    if args.table:
        print("task,n,m,N,circuit_params,target_params")
        for r in rows:
            print(",".join(str(v) for v in r))
    if args.out:
        write_bounds_csv(rows, args.out)
    return 0


def cmd_optimize(args):
    config = parse_config(args.config)
    target = _resolve_target(args, n=config.n)
    settings = _settings_from_args(args)
    res = multi_restart(config, target, settings, restarts=args.restarts)
    pc = res.circuit
    out = {
        "config": config.text(),
        "config_id": res.config_id,
        "final_fidelity": _f17(res.final_fidelity),
        "infidelity": _f17(1.0 - res.final_fidelity),
        "iterations_used": res.iterations_used,
        "restarts_used": res.restarts_used,
        "seed": settings.seed,
        "rotations": {
            "init": _mat_list(pc.init_rot),
            "post": _mat_list(pc.post_rot.reshape(-1, 2, 2)),
            "cu": _mat_list(pc.cu_rot) if pc.cu_rot is not None else None,
        },
    }
    blob = json.dumps(out, indent=2)
    if args.out:
        Path(args.out).write_text(blob + "\n")
    else:
        print(blob)
    return 0 if 1.0 - res.final_fidelity < args.tol else 1


def _mat_list(mats):
    return [
        [[_f17(v.real), _f17(v.imag)] for v in mat.reshape(-1)] for mat in mats
    ]


def cmd_search(args):
    target = _resolve_target(args, n=args.n)
    settings = _settings_from_args(args)
    job = SearchJob(
        target,
        args.n,
        args.m,
        args.N,
        entangler="cu" if args.cu else "cz",
        settings=settings,
        restarts=args.restarts,
        instance_id=args.instance,
    )
    out_dir = _store_dir(args.out, job)
    store = run_search(job, out_dir=out_dir, workers=args.workers, resume=not args.no_resume)
    fids = store.fidelities()
    print(f"store: {out_dir}")
    print(f"records: {len(store)}  max fidelity: {_f17(fids.max())}")
    return 0


def cmd_refine(args):
    store_dir = _store_dir(args.store)
    job = load_job(store_dir)
    store = ResultStore.open(store_dir)
    settings = replace(
        job.settings, max_iterations=args.iterations, seed=args.seed
    )
    refine(
        job,
        store,
        fidelity_floor=args.floor,
        settings=settings,
        restarts=args.restarts,
        workers=args.workers,
        pass_index=args.pass_index,
    )
    append_manifest_event(
        store_dir,
        {
            "command": "refine",
            "floor": args.floor,
            "iterations": args.iterations,
            "restarts": args.restarts,
            "pass_index": args.pass_index,
            "seed": args.seed,
        },
    )
    fids = store.fidelities()
    print(f"records: {len(store)}  max fidelity: {_f17(fids.max())}")
    store.close()
    return 0


def cmd_closure(args):
    store_dir = _store_dir(args.store)
    job = load_job(store_dir)
    store = ResultStore.open(store_dir)
    permutation_closure(job, store, tol=args.tol)
    append_manifest_event(store_dir, {"command": "closure", "tol": args.tol})
    n_assigned = len(store.stage_records("closure-assigned"))
    print(f"closure-assigned records: {n_assigned}")
    store.close()
    return 0


def cmd_analyze(args):
    store_dir = _store_dir(args.store)
    job = load_job(store_dir)
    store = ResultStore.open(store_dir)
    fids = store.fidelities()
    print(f"records: {len(store)}  max fidelity: {_f17(fids.max())}")
    ps = perfect_set(store, job, tol=args.tol)
    print(f"perfect (1-F < {args.tol:g}): {ps.count} of {ps.total} ({ps.fraction:.2%})")
    if args.hist:
        spec = histogram(store)
        write_histogram_csv(spec, args.hist)
        print(f"histogram -> {args.hist}")
    if args.depth:
        dist = depth_distribution(ps)
        print("depth distribution:", dist)
        if args.depth != "-":
            write_depth_csv(dist, args.depth)
            print(f"depth table -> {args.depth}")
    if args.orbit:
        merge = target_self_inverse(job.target)
        rep = orbit_report(ps, merge_reversal=merge)
        print(
            f"permutation classes: {rep.permutation_classes}"
            + (f", after time reversal: {rep.reversal_classes}" if merge else "")
        )
        if args.orbit != "-":
            write_orbit_csv(rep, args.orbit)
            print(f"orbit table -> {args.orbit}")
    if args.pairs:
        if ps.count:
            usage_sets = [pair_usage(c) for c in ps.configs()]
            balanced = sum(
                1
                for counts, _ in usage_sets
                if len(set(counts.values())) == 1
            )
            print(f"perfect configs with balanced pair usage: {balanced}/{ps.count}")
    return 0


def cmd_series(args):
    target = _resolve_target(args, n=args.n)
    settings = _settings_from_args(args)
    n_values = [int(v) for v in args.N.split(",")]
    series = fidelity_vs_N(
        target,
        args.n,
        args.m,
        n_values,
        settings,
        restarts=args.restarts,
        workers=args.workers,
        entangler="cu" if args.cu else "cz",
    )
    for point in series:
        print(f"N={point['N']}  max fidelity {_f17(point['fidelity'])}")
    if args.out:
        write_series_csv(series, args.out)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qcsynth",
        description="Minimum entangling-gate search for few-qubit circuits",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-target", help="write a target JSON file")
    p.add_argument("--kind", choices=["state", "unitary", "toffoli"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_target)

    p = sub.add_parser("bounds", help="parameter-counting lower bounds")
    p.add_argument("--task", choices=["state", "unitary"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", default="2", help="comma-separated entangler arities")
    p.add_argument("--N-max", type=int, default=None)
    p.add_argument("--table", action="store_true")
    p.add_argument("--out", default=None, help="CSV path for the series")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("optimize", help="optimize one configuration")
    p.add_argument("--config", required=True, help='e.g. "6@2: (0,1)(0,1)(0,2)(1,2)(0,2)(1,2)"')
    _add_target_flags(p)
    _add_optimizer_flags(p)
    p.add_argument("--tol", type=float, default=1e-8, help="exit 0 iff 1-F < tol")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("search", help="sweep every configuration of a space")
    _add_target_flags(p)
    _add_optimizer_flags(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--cu", action="store_true", help="controlled-U entanglers")
    p.add_argument("--instance", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None)
    p.add_argument("--no-resume", action="store_true")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("refine", help="re-optimize configurations above a floor")
    p.add_argument("--store", required=True)
    p.add_argument("--floor", type=float, default=0.999)
    p.add_argument("--iterations", type=int, default=10_000)
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--pass-index", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("closure", help="assign orbit maxima across permutations")
    p.add_argument("--store", required=True)
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_closure)

    p = sub.add_parser("analyze", help="statistics and CSV export for a store")
    p.add_argument("--store", required=True)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--hist", default=None, help="histogram CSV path")
    p.add_argument("--depth", default=None, help="depth CSV path, or - to print only")
    p.add_argument("--orbit", default=None, help="orbit CSV path, or - to print only")
    p.add_argument("--pairs", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("series", help="max fidelity as a function of circuit size")
    _add_target_flags(p)
    _add_optimizer_flags(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--N", required=True, help="comma-separated circuit sizes")
    p.add_argument("--cu", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None, help="series CSV path")
    p.set_defaults(func=cmd_series)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
