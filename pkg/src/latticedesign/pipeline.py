"""End-to-end design loop: solve, fold, constrain, refine, repeat.

Each cycle minimises the design score under the current interaction matrix,
folds the best candidates with the ground-truth oracle, converts the
outcomes into linear constraints over all candidates tried so far, and
perceptron-projects the matrix onto them.  Checkpoints land in a run
directory named by the configuration hash, one JSON per cycle, so an
interrupted run resumes into a byte-identical report.

Random streams: a master seed plus the documented splitting rule
``cycle * 10**6 + restart`` give every walker of every cycle its own
generator, so reruns and resumed runs agree exactly.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import metrics, qubo, refine, seqspace, solvers
from .energy import delta_contact_map, ground_truth_matrix
from .errors import NoDesignableTargetError
from .folding import CensusResult, designability_census, fold
from .lattice import Conformation, Ensemble, contact_map, read_conformations
from .validation import check_composition, check_energy_matrix, check_probability

_SOLVERS = ("seq-sa", "qubo-sa", "exhaustive")
_EPS_INIT_KEY = 1 << 40  # stream salt for the random initial matrix


def stream_seed(master: int, cycle: int, restart: int) -> tuple[int, int]:
    """Entropy pair for one walker: (master, cycle * 10**6 + restart)."""
    return (int(master), cycle * 10**6 + restart)


@dataclass
class DesignConfig:
    """Everything a design run depends on; serialises to/from JSON."""

    side: int = 4
    n_types: int = 3
    composition: tuple = (5, 5, 6)
    target: object = "census"      # ensemble index, "census", or a conformation file
    beta: float = 3.0
    p_fold: float = 0.8
    a1: float = 2.1
    a2: float = 2.1
    b: float = 1.0
    eta0: float = 0.325
    solver: str = "seq-sa"
    t_max: float = 100.0
    t_min: float = 1e-4
    n_steps: int = 10_000
    restarts: int = 200
    n_candidates: int = 30
    max_cycles: int = 5
    n_competitors: int = 10
    seed: int = 0
    stop_fc: float = 0.5
    early_stop: bool = True
    pool_rounds: int = 3
    eps_init: object = "random"    # "random", "truth", or a nested list
    truth_matrix: object = None    # nested list; None means the bundled matrix
    allow_large: bool = False

    def __post_init__(self):
        if self.side < 2:
            raise ValueError(f"side must be >= 2, got {self.side}")
        self.composition = check_composition(self.composition, n_sites=self.side ** 2)
        if len(self.composition) != self.n_types:
            raise ValueError(f"composition has {len(self.composition)} types, "
                             f"n_types is {self.n_types}")
        self.p_fold = check_probability(self.p_fold, "p_fold", open_low=0.5)
        if self.solver not in _SOLVERS:
            raise ValueError(f"unknown solver {self.solver!r}, expected one of {_SOLVERS}")
        for name in ("restarts", "n_candidates", "pool_rounds"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.max_cycles < 0:
            raise ValueError("max_cycles must be >= 0")
        if self.n_competitors < 0:
            raise ValueError("n_competitors must be >= 0")
        if not isinstance(self.target, (int, str)):
            raise ValueError("target must be an ensemble index, 'census', or a file path")
        if isinstance(self.eps_init, str) and self.eps_init not in ("random", "truth"):
            raise ValueError("eps_init must be 'random', 'truth', or a matrix")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["composition"] = list(self.composition)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "DesignConfig":
        d = dict(d)
        if "composition" in d:
            d["composition"] = tuple(d["composition"])
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "DesignConfig":
        return cls.from_dict(json.loads(text))

    def hash(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]

    def schedule(self, seed=0) -> solvers.AnnealSchedule:
        return solvers.AnnealSchedule(self.t_max, self.t_min, self.n_steps, seed)

    def resolve_truth(self) -> np.ndarray:
        if self.truth_matrix is None:
            return ground_truth_matrix(self.n_types)
        return check_energy_matrix(np.array(self.truth_matrix, dtype=np.float64),
                                   n_types=self.n_types)


def stop_rule(designing_flags, threshold: float = 0.5) -> bool:
    """Stop once the success fraction clears the threshold or any hit appears."""
    flags = [bool(f) for f in designing_flags]
    if not flags:
        return False
    fc = sum(flags) / len(flags)
    return fc >= threshold or any(flags)


def select_target(ensemble: Ensemble, composition, e_truth, beta: float,
                  p_fold: float = 0.8, strategy: str = "max-designing",
                  explicit: int | None = None, *,
                  sequences: np.ndarray | None = None) -> tuple[int, CensusResult]:
    """Pick a design target from a full designability census.

    ``max-designing`` takes the structure with the most designing sequences;
    ``explicit`` validates a caller-chosen index.  Either way a structure
    with zero designing sequences is refused.
    """
    census = designability_census(ensemble, composition, e_truth, beta, p_fold,
                                  sequences=sequences)
    if strategy == "explicit":
        if explicit is None:
            raise ValueError("explicit strategy needs an index")
        if not 0 <= explicit < len(ensemble):
            raise ValueError(f"structure {explicit} outside the ensemble")
        if census.records[explicit].designing_count == 0:
            raise NoDesignableTargetError(
                f"structure {explicit} has no designing sequence at this composition")
        return explicit, census
    if strategy != "max-designing":
        raise ValueError(f"unknown strategy {strategy!r}")
    best = census.best_structure()
    if census.records[best].designing_count == 0:
        raise NoDesignableTargetError("no structure has a designing sequence "
                                      "at this composition")
    return best, census


@dataclass
class CycleRecord:
    cycle: int
    eps_in: list
    candidates: list
    g_values: list
    fold: list
    f_c: float
    stop: bool
    n_constraints: int
    perceptron: dict | None
    eps_out: list

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "CycleRecord":
        return cls(**d)


@dataclass
class DesignReport:
    config: dict
    target_index: int
    status: str           # "solved" or "max-cycles"
    cycles: list = field(default_factory=list)
    final_eps: list = field(default_factory=list)

    def to_json(self) -> str:
        d = {"config": self.config, "target_index": self.target_index,
             "status": self.status, "final_eps": self.final_eps,
             "cycles": [c.to_dict() for c in self.cycles]}
        return json.dumps(d, sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "DesignReport":
        d = json.loads(text)
        return cls(d["config"], d["target_index"], d["status"],
                   [CycleRecord.from_dict(c) for c in d["cycles"]], d["final_eps"])


def _resolve_target(cfg: DesignConfig, ensemble: Ensemble, e_truth) -> int:
    if isinstance(cfg.target, int):
        if not 0 <= cfg.target < len(ensemble):
            raise ValueError(f"target index {cfg.target} outside the ensemble")
        return cfg.target
    if cfg.target == "census":
        idx, _ = select_target(ensemble, cfg.composition, e_truth, cfg.beta, cfg.p_fold)
        return idx
    confs = read_conformations(cfg.target)
    if len(confs) != 1:
        raise ValueError(f"{cfg.target}: expected exactly one conformation, "
                         f"found {len(confs)}")
    return ensemble.index_of(confs[0])


def _initial_matrix(cfg: DesignConfig, e_truth: np.ndarray) -> np.ndarray:
    if isinstance(cfg.eps_init, str):
        if cfg.eps_init == "truth":
            return e_truth.copy()
        rng = np.random.default_rng((cfg.seed, _EPS_INIT_KEY))
        return refine.random_energy_matrix(cfg.n_types, rng)
    return check_energy_matrix(np.array(cfg.eps_init, dtype=np.float64),
                               n_types=cfg.n_types)


def _solve_cycle(cfg: DesignConfig, objective: solvers.GObjective, cycle: int,
                 dc: np.ndarray, eps: np.ndarray) -> list[np.ndarray]:
    """Produce up to K distinct candidates, growing the restart pool if thin."""
    k = cfg.n_candidates
    if cfg.solver == "exhaustive":
        ranking = solvers.exhaustive_sequence_search(cfg.composition, objective)
        return [ranking.sequence_at(i) for i in range(min(k, len(ranking)))]
    runs: list[solvers.SolverRun] = []
    candidates: list[np.ndarray] = []
    for round_no in range(cfg.pool_rounds):
        base = round_no * cfg.restarts
        seeds = [stream_seed(cfg.seed, cycle, base + r) for r in range(cfg.restarts)]
        if cfg.solver == "seq-sa":
            runs.extend(solvers.anneal_pool(objective, cfg.composition,
                                            cfg.schedule(), seeds))
        else:
            problem = qubo.encode(dc, eps, cfg.composition,
                                  qubo.QuboWeights(cfg.a1, cfg.a2, cfg.b))
            for seed in seeds:
                runs.append(solvers.qubo_sa(problem, cfg.composition, cfg.schedule(),
                                            restarts=1, seeds=[seed]))
        candidates = solvers.select_candidates(runs, k)
        if len(candidates) >= k:
            break
    return candidates


def run_design(cfg: DesignConfig, run_dir=None, dump_dir=None,
               e_truth: np.ndarray | None = None, progress: bool = False) -> DesignReport:
    """Run (or resume) the full design loop and return the report.

    ``run_dir`` enables per-cycle JSON checkpoints; a directory already
    holding checkpoints for this exact configuration is resumed, and the
    final report matches an uninterrupted run byte for byte.
    """
    if e_truth is None:
        e_truth = cfg.resolve_truth()
    else:
        e_truth = check_energy_matrix(e_truth, n_types=cfg.n_types)
    ensemble = Ensemble.from_side(cfg.side, allow_large=cfg.allow_large)
    target = _resolve_target(cfg, ensemble, e_truth)
    dc = delta_contact_map(ensemble.contact_map(target), ensemble.average_contact_map())

    base = None
    if run_dir is not None:
        base = Path(run_dir) / cfg.hash()
        base.mkdir(parents=True, exist_ok=True)
        cfg_path = base / "config.json"
        if cfg_path.exists():
            if json.loads(cfg_path.read_text()) != cfg.to_dict():
                raise ValueError(f"{base} holds checkpoints for a different configuration")
        else:
            cfg_path.write_text(cfg.to_json() + "\n")
    dump = Path(dump_dir) if dump_dir is not None else None
    if dump is not None:
        dump.mkdir(parents=True, exist_ok=True)

    cycles: list[CycleRecord] = []
    eps = _initial_matrix(cfg, e_truth)
    history: dict[bytes, tuple[np.ndarray, object]] = {}
    fold_cache: dict[bytes, object] = {}

    def refold(seq: np.ndarray):
        key = seq.tobytes()
        if key not in fold_cache:
            fold_cache[key] = fold(seq, ensemble, e_truth, cfg.beta, cfg.p_fold)
        return fold_cache[key]

    start_cycle = 0
    if base is not None:
        while True:
            p = base / f"cycle_{start_cycle:03d}.json"
            if not p.exists():
                break
            rec = CycleRecord.from_dict(json.loads(p.read_text()))
            cycles.append(rec)
            for cand in rec.candidates:
                s = np.array(cand, dtype=np.int64)
                history[s.tobytes()] = (s, refold(s))
            eps = np.array(rec.eps_out, dtype=np.float64)
            start_cycle += 1

    status = "max-cycles"
    stopped = any(c.stop for c in cycles)
    if stopped and cfg.early_stop:
        status = "solved"

    # cycle 0 is always evaluated; max_cycles caps how many cycles may refine
    for cycle in range(start_cycle, max(cfg.max_cycles, 1)):
        if stopped and cfg.early_stop:
            break
        if progress:
            print(f"cycle {cycle}: solving with {cfg.solver}", flush=True)
        objective = solvers.GObjective(dc, eps)
        candidates = _solve_cycle(cfg, objective, cycle, dc, eps)
        g_vals = [float(objective(s)) for s in candidates]
        folds = [refold(s) for s in candidates]
        for s, fr in zip(candidates, folds):
            history[s.tobytes()] = (s, fr)
        flags = [fr.foldable and fr.ground_states[0] == target for fr in folds]
        f_c = sum(flags) / len(flags) if flags else 0.0
        stop = stop_rule(flags, cfg.stop_fc)
        fold_summaries = [{
            "ground_states": list(fr.ground_states),
            "p_native": fr.p_native,
            "designing": bool(flag),
            "target_energy": fr.energy_of(target),
        } for fr, flag in zip(folds, flags)]

        if stop and cfg.early_stop:
            rec = CycleRecord(cycle, eps.tolist(), [s.tolist() for s in candidates],
                              g_vals, fold_summaries, f_c, True, 0, None, eps.tolist())
            stopped = True
            status = "solved"
        elif cycle >= cfg.max_cycles:
            # evaluation-only pass: the refinement budget is zero
            rec = CycleRecord(cycle, eps.tolist(), [s.tolist() for s in candidates],
                              g_vals, fold_summaries, f_c, stop, 0, None, eps.tolist())
            stopped = stopped or stop
        else:
            constraints = refine.build_constraints(history.values(), target, ensemble,
                                                   cfg.p_fold, cfg.beta, cfg.n_competitors)
            eta = refine.eta_schedule(cycle, cfg.eta0)
            rr = refine.perceptron_refine(refine.flatten_energy(eps), constraints, eta)
            eps_next = refine.unflatten_energy(rr.eps, cfg.n_types)
            rec = CycleRecord(cycle, eps.tolist(), [s.tolist() for s in candidates],
                              g_vals, fold_summaries, f_c, stop, len(constraints),
                              {"iterations": rr.iterations, "satisfied": rr.satisfied},
                              eps_next.tolist())
            if dump is not None:
                payload = {"cycle": cycle, "eta": eta,
                           "constraints": [{"x": lc.x.tolist(), "c": lc.c}
                                           for lc in constraints],
                           "eps_in": eps.tolist(), "eps_out": eps_next.tolist()}
                (dump / f"constraints_{cycle:03d}.json").write_text(
                    json.dumps(payload, sort_keys=True, indent=2) + "\n")
            eps = eps_next
            if stop:
                stopped = True
                status = "solved" if cfg.early_stop else status

        cycles.append(rec)
        if base is not None:
            (base / f"cycle_{cycle:03d}.json").write_text(
                json.dumps(rec.to_dict(), sort_keys=True, indent=2) + "\n")

    report = DesignReport(cfg.to_dict(), target, status, cycles, eps.tolist())
    if base is not None:
        (base / "report.json").write_text(report.to_json() + "\n")
        records = [metrics.SuccessRecord(c.cycle, len(c.fold),
                                         sum(1 for f in c.fold if f["designing"]))
                   for c in cycles]
        metrics.write_fc_csv(records, base / "fc.csv")
    return report


def benchmark_solvers(target: Conformation, composition, e_truth, schedule,
                      budget_ms: float, samples: int, seed: int, out_dir,
                      database=None, weights: qubo.QuboWeights | None = None,
                      bins: int = 60) -> dict:
    """Equal-wall-time comparison of the two annealers on one target.

    Every sample gets ``budget_ms`` of restarts and contributes its best
    score.  Large targets are supplied as conformations, never enumerated;
    without a ``database`` of reference conformations the contrast map falls
    back to the bare target contact map.
    """
    comp = check_composition(composition, n_sites=target.n_sites)
    e_truth = check_energy_matrix(e_truth, n_types=len(comp))
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if budget_ms <= 0:
        raise ValueError("budget_ms must be positive")
    cm = contact_map(target)
    if database is not None:
        from .lattice import average_contact_map
        dc = delta_contact_map(cm, average_contact_map(database))
    else:
        dc = cm.astype(np.float64)
    objective = solvers.GObjective(dc, e_truth)
    weights = weights or qubo.QuboWeights()
    problem = qubo.encode(dc, e_truth, comp, weights)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    budget = budget_ms / 1000.0
    summary: dict = {"budget_ms": budget_ms, "samples": samples, "seed": seed}
    for tag_idx, tag in enumerate(("seq-sa", "qubo-sa")):
        best_values = np.empty(samples, dtype=np.float64)
        invalid = 0
        for s in range(samples):
            t0 = time.perf_counter()
            best = np.inf
            r = 0
            while True:
                walker_seed = (seed, tag_idx, s, r)
                if tag == "seq-sa":
                    run = solvers.anneal_pool(objective, comp, schedule, [walker_seed])[0]
                    value = run.best_value
                else:
                    run = solvers.qubo_sa(problem, comp, schedule, restarts=1,
                                          seeds=[walker_seed])
                    if run.best_sequence is not None:
                        value = float(objective(run.best_sequence))
                    else:
                        invalid += 1
                        value = run.best_value / weights.b
                best = min(best, value)
                r += 1
                if time.perf_counter() - t0 >= budget:
                    break
            best_values[s] = best
        hist = metrics.g_histogram(best_values, bins)
        metrics.write_histogram_csv(hist, out / f"hist_{tag}.csv")
        summary[tag] = {
            "min": float(best_values.min()),
            "median": float(np.median(best_values)),
            "samples": samples,
            "invalid_runs": invalid,
        }
    metrics.write_summary_json(summary, out / "summary.json")
    return summary
