"""Command-line interface.

Subcommands cover the whole workflow: enumerate conformations, fold a
sequence, run a designability census, export the binary encoding, run the
solvers, run the full design loop, score a ranking, and benchmark the two
annealers at equal wall time.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import energy, lattice, metrics, pipeline, qubo, seqspace, solvers
from .folding import designability_census, fold as fold_sequence


def _parse_composition(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(","))
    except ValueError:
        raise SystemExit(f"bad composition {text!r}; expected e.g. 5,5,6")


def _load_matrix(path: str | None, n_types: int) -> np.ndarray:
    if path is None:
        return energy.ground_truth_matrix(n_types)
    return energy.load_energy_matrix(path)


def _read_sequence(path: str) -> np.ndarray:
    toks = Path(path).read_text().split()
    return np.array([int(t) for t in toks], dtype=np.int64)


def _single_conformation(path: str) -> lattice.Conformation:
    confs = lattice.read_conformations(path)
    if len(confs) != 1:
        raise SystemExit(f"{path}: expected exactly one conformation, found {len(confs)}")
    return confs[0]


def _database_arg(path: str | None):
    return lattice.read_conformations(path) if path else None


def cmd_enumerate(args) -> int:
    confs = lattice.enumerate_compact_conformations(args.L, allow_large=args.allow_large)
    lattice.write_conformations(confs, args.out)
    print(f"L={args.L}: {len(confs)} conformations -> {args.out}")
    return 0


def cmd_fold(args) -> int:
    seq = _read_sequence(args.sequence)
    ensemble = lattice.Ensemble(lattice.read_conformations(args.ensemble))
    e = energy.load_energy_matrix(args.matrix)
    fr = fold_sequence(seq, ensemble, e, args.beta, args.p_fold)
    out = {
        "ground_states": list(fr.ground_states),
        "p_native": fr.p_native,
        "foldable": fr.foldable,
        "spectrum": [[k, e_k] for k, e_k in fr.ranked_spectrum],
    }
    text = json.dumps(out, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0


def cmd_census(args) -> int:
    comp = _parse_composition(args.composition)
    e = _load_matrix(args.matrix, len(comp))
    ensemble = lattice.Ensemble.from_side(args.L, allow_large=args.allow_large)
    census = designability_census(ensemble, comp, e, args.beta, args.p_fold)
    lines = ["structure,unique_gs_count,designing_count"]
    for r in census.records:
        lines.append(f"{r.structure},{r.unique_count},{r.designing_count}")
    Path(args.out).write_text("\n".join(lines) + "\n")
    best = census.best_structure()
    print(f"{census.total_sequences} sequences over {len(ensemble)} structures; "
          f"most designable: structure {best} "
          f"({census.records[best].designing_count} designing) -> {args.out}")
    return 0


def _contrast_map(target: lattice.Conformation, database) -> np.ndarray:
    cm = lattice.contact_map(target)
    if database is None:
        side = target.side
        if side > lattice.ENUMERATION_CAP:
            print(f"note: no database and L={side} too large to enumerate; "
                  "using the bare target contact map", file=sys.stderr)
            return cm.astype(np.float64)
        database = lattice.enumerate_compact_conformations(side)
    return energy.delta_contact_map(cm, lattice.average_contact_map(database))


def cmd_export_qubo(args) -> int:
    comp = _parse_composition(args.composition)
    e = _load_matrix(args.matrix, len(comp))
    target = _single_conformation(args.target)
    dc = _contrast_map(target, _database_arg(args.database))
    problem = qubo.encode(dc, e, comp, qubo.QuboWeights(args.A1, args.A2, args.B))
    qubo.write_qubo(problem, args.out)
    print(f"{problem.num_vars} variables, {len(problem.terms)} terms -> {args.out}")
    return 0


def cmd_solve(args) -> int:
    comp = _parse_composition(args.composition)
    e = _load_matrix(args.matrix, len(comp))
    target = _single_conformation(args.target)
    dc = _contrast_map(target, _database_arg(args.database))
    objective = solvers.GObjective(dc, e)
    sched = solvers.AnnealSchedule(args.t_max, args.t_min, args.n_steps, args.seed)
    runs: list[solvers.SolverRun] = []

    if args.solver == "exhaustive":
        ranking = solvers.exhaustive_sequence_search(comp, objective)
        for k in range(min(args.top_k, len(ranking))):
            seq, value = ranking[k]
            runs.append(solvers.SolverRun(value, seq, None, 0.0, args.seed))
    else:
        import time
        problem = (qubo.encode(dc, e, comp, qubo.QuboWeights(args.A1, args.A2, args.B))
                   if args.solver == "qubo-sa" else None)
        budget = args.time_budget_ms / 1000.0 if args.time_budget_ms else None
        t0 = time.perf_counter()
        r = 0
        while True:
            seed = (args.seed, r)
            if args.solver == "seq-sa":
                runs.append(solvers.anneal_pool(objective, comp, sched, [seed])[0])
            else:
                runs.append(solvers.qubo_sa(problem, comp, sched, restarts=1,
                                            seeds=[seed]))
            r += 1
            if budget is None:
                if r >= args.restarts:
                    break
            elif time.perf_counter() - t0 >= budget:
                break

    best = solvers.select_candidates(runs, args.top_k)
    payload = []
    for run in runs:
        payload.append({
            "best_value": run.best_value,
            "sequence": None if run.best_sequence is None
            else [int(v) for v in run.best_sequence],
            "wall_time": run.wall_time,
            "seed": list(run.seed) if isinstance(run.seed, tuple) else run.seed,
        })
    if args.out_json:
        Path(args.out_json).write_text(json.dumps(payload, indent=2) + "\n")
    if args.out_csv:
        lines = ["best_value"] + [f"{r['best_value']:.17g}" for r in payload]
        Path(args.out_csv).write_text("\n".join(lines) + "\n")
    g_best = min(r["best_value"] for r in payload)
    print(f"{len(runs)} runs, best value {g_best:.6f}, "
          f"{len(best)} distinct top sequences")
    for s in best[:3]:
        print("  " + " ".join(str(int(v)) for v in s))
    return 0


def cmd_design(args) -> int:
    cfg = pipeline.DesignConfig.from_json(Path(args.config).read_text())
    report = pipeline.run_design(cfg, run_dir=args.run_dir,
                                 dump_dir=args.dump_refinement, progress=not args.quiet)
    last = report.cycles[-1] if report.cycles else None
    fc = last.f_c if last else float("nan")
    print(f"status={report.status} target={report.target_index} "
          f"cycles={len(report.cycles)} final_fc={fc:.3f}")
    if args.run_dir:
        print(f"checkpoints in {Path(args.run_dir) / cfg.hash()}")
    if args.out:
        Path(args.out).write_text(report.to_json() + "\n")
    return 0


def cmd_roc(args) -> int:
    comp = _parse_composition(args.composition)
    truth = _load_matrix(args.truth_matrix, len(comp))
    ensemble = lattice.Ensemble.from_side(args.L, allow_large=args.allow_large)
    seqs = seqspace.all_sequences(comp)
    if args.target_id is not None:
        target, census = pipeline.select_target(ensemble, comp, truth, args.beta,
                                                args.p_fold, strategy="explicit",
                                                explicit=args.target_id, sequences=seqs)
    else:
        target, census = pipeline.select_target(ensemble, comp, truth, args.beta,
                                                args.p_fold, sequences=seqs)
    if args.mode == "learned":
        if not args.matrix:
            raise SystemExit("--matrix is required with --mode learned")
        e_rank = energy.load_energy_matrix(args.matrix)
    else:
        e_rank = truth
    dc = energy.delta_contact_map(ensemble.contact_map(target),
                                  ensemble.average_contact_map())
    ranking = solvers.exhaustive_sequence_search(comp, solvers.GObjective(dc, e_rank),
                                                 sequences=seqs)
    mask = np.zeros(len(ranking), dtype=bool)
    mask[census.designing.get(target, np.empty(0, dtype=np.int64))] = True
    curve = metrics.roc(ranking, mask)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    metrics.write_roc_csv(curve, out / "roc.csv", max_points=args.max_points)
    metrics.write_summary_json({
        "mode": args.mode, "target": target, "q": curve.q,
        "n_designing": int(mask.sum()), "n_sequences": len(ranking),
    }, out / "summary.json")
    print(f"target={target} q={curve.q:.4f} "
          f"designing={int(mask.sum())}/{len(ranking)} -> {out}")
    return 0


def cmd_benchmark(args) -> int:
    comp = _parse_composition(args.composition)
    e = _load_matrix(args.truth_matrix, len(comp))
    target = _single_conformation(args.target)
    sched = solvers.AnnealSchedule(args.t_max, args.t_min, args.n_steps, 0)
    summary = pipeline.benchmark_solvers(
        target, comp, e, sched, args.budget_ms, args.samples, args.seed,
        args.out_dir, database=_database_arg(args.database), bins=args.bins)
    for tag in ("seq-sa", "qubo-sa"):
        s = summary[tag]
        print(f"{tag}: min={s['min']:.6f} median={s['median']:.6f} "
              f"samples={s['samples']}")
    print(f"histograms and summary.json in {args.out_dir}")
    return 0


def _add_schedule_args(p: argparse.ArgumentParser):
    p.add_argument("--t-max", type=float, default=100.0)
    p.add_argument("--t-min", type=float, default=1e-4)
    p.add_argument("--n-steps", type=int, default=10_000)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="latticedesign",
                                 description="compact-lattice sequence design toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="enumerate compact conformations")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--allow-large", action="store_true")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("fold", help="rank an ensemble for one sequence")
    p.add_argument("--sequence", required=True, help="file with space-separated type labels")
    p.add_argument("--ensemble", required=True, help="conformation file")
    p.add_argument("--matrix", required=True)
    p.add_argument("--beta", type=float, default=3.0)
    p.add_argument("--p-fold", type=float, default=0.8)
    p.add_argument("--out")
    p.set_defaults(func=cmd_fold)

    p = sub.add_parser("census", help="designability census over a full lattice")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--composition", required=True)
    p.add_argument("--matrix", help="defaults to the bundled matrix for this alphabet")
    p.add_argument("--beta", type=float, default=3.0)
    p.add_argument("--p-fold", type=float, default=0.8)
    p.add_argument("--out", required=True)
    p.add_argument("--allow-large", action="store_true")
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("export-qubo", help="write the binary encoding to a text file")
    p.add_argument("--target", required=True, help="conformation file (single line)")
    p.add_argument("--matrix")
    p.add_argument("--composition", required=True)
    p.add_argument("--database", help="conformations for the average contact map")
    p.add_argument("--A1", type=float, default=2.1)
    p.add_argument("--A2", type=float, default=2.1)
    p.add_argument("--B", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_qubo)

    p = sub.add_parser("solve", help="minimise the design score")
    p.add_argument("--solver", choices=("seq-sa", "qubo-sa", "exhaustive"),
                   required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--matrix")
    p.add_argument("--composition", required=True)
    p.add_argument("--database")
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--time-budget-ms", type=float, default=0.0,
                   help="if set, restart until the budget is spent")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--top-k", type=int, default=10)
    p.add_argument("--A1", type=float, default=2.1)
    p.add_argument("--A2", type=float, default=2.1)
    p.add_argument("--B", type=float, default=1.0)
    p.add_argument("--out-json")
    p.add_argument("--out-csv")
    _add_schedule_args(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("design", help="run the full design loop from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--run-dir", help="checkpoint directory (resumable)")
    p.add_argument("--dump-refinement", help="write per-cycle constraint sets here")
    p.add_argument("--out", help="also write the report JSON to this path")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("roc", help="rank the whole sequence space and score it")
    p.add_argument("--mode", choices=("ground-truth", "learned"), required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--composition", required=True)
    p.add_argument("--truth-matrix", help="oracle matrix (default: bundled)")
    p.add_argument("--matrix", help="learned matrix (learned mode)")
    p.add_argument("--target-id", type=int)
    p.add_argument("--beta", type=float, default=3.0)
    p.add_argument("--p-fold", type=float, default=0.8)
    p.add_argument("--max-points", type=int, default=2001,
                   help="downsample roc.csv to this many rows (0 = all)")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--allow-large", action="store_true")
    p.set_defaults(func=cmd_roc)

    p = sub.add_parser("benchmark", help="equal-wall-time solver comparison")
    p.add_argument("--target", required=True, help="conformation file")
    p.add_argument("--composition", required=True)
    p.add_argument("--truth-matrix")
    p.add_argument("--database")
    p.add_argument("--budget-ms", type=float, default=3000.0)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bins", type=int, default=60)
    p.add_argument("--out-dir", required=True)
    _add_schedule_args(p)
    p.set_defaults(func=cmd_benchmark)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
