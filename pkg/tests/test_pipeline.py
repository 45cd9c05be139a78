"""Design-loop plumbing: config round trips, seeding, checkpoint resume."""

import json

import numpy as np
import pytest

from latticedesign import lattice, metrics, pipeline, solvers
from latticedesign.errors import NoDesignableTargetError
from latticedesign.pipeline import CycleRecord, DesignConfig, DesignReport


def small_config(**overrides) -> DesignConfig:
    """3x3 instance small enough that a full run takes well under a second."""
    base = dict(side=3, n_types=3, composition=(3, 3, 3), target=0,
                t_max=2.0, t_min=0.1, n_steps=400, restarts=8,
                n_candidates=5, max_cycles=2, early_stop=False, seed=1)
    base.update(overrides)
    return DesignConfig(**base)


class TestStreamSeed:
    def test_splitting_rule(self):
        assert pipeline.stream_seed(7, 0, 0) == (7, 0)
        assert pipeline.stream_seed(7, 2, 13) == (7, 2_000_013)

    def test_no_collisions_across_cycles(self):
        # restart indices stay below the 10**6 block size in practice
        seen = {pipeline.stream_seed(0, c, r)
                for c in range(4) for r in range(1000)}
        assert len(seen) == 4 * 1000


class TestDesignConfig:
    def test_json_round_trip(self):
        cfg = small_config()
        again = DesignConfig.from_json(cfg.to_json())
        assert again == cfg
        assert again.hash() == cfg.hash()

    def test_hash_tracks_content(self):
        assert small_config().hash() != small_config(seed=2).hash()

    def test_composition_survives_as_tuple(self):
        cfg = DesignConfig.from_json(small_config().to_json())
        assert cfg.composition == (3, 3, 3)
        assert isinstance(cfg.composition, tuple)

    @pytest.mark.parametrize("kwargs", [
        dict(side=1),
        dict(composition=(4, 4)),                   # does not sum to 9
        dict(composition=(3, 3, 3), n_types=2),
        dict(solver="gradient"),
        dict(target=[0, 1]),
        dict(eps_init="zeros"),
        dict(max_cycles=-1),
        dict(restarts=0),
        dict(p_fold=0.5),
    ])
    def test_rejects_bad_fields(self, kwargs):
        with pytest.raises(ValueError):
            small_config(**kwargs)


class TestStopRule:
    def test_empty_never_stops(self):
        assert pipeline.stop_rule([]) is False

    def test_any_hit_stops(self):
        assert pipeline.stop_rule([False] * 9 + [True]) is True

    def test_all_misses_continue(self):
        assert pipeline.stop_rule([False] * 10) is False


class TestSelectTarget:
    def test_max_designing_matches_census(self, ens3, eps3, census333):
        idx, census = pipeline.select_target(ens3, (3, 3, 3), eps3, 3.0)
        assert idx == census333.best_structure()
        assert census.records[idx].designing_count == \
            census333.records[idx].designing_count

    def test_explicit_validates_range(self, ens3, eps3):
        with pytest.raises(ValueError):
            pipeline.select_target(ens3, (3, 3, 3), eps3, 3.0,
                                   strategy="explicit", explicit=99)
        with pytest.raises(ValueError):
            pipeline.select_target(ens3, (3, 3, 3), eps3, 3.0, strategy="explicit")

    def test_unknown_strategy(self, ens3, eps3):
        with pytest.raises(ValueError):
            pipeline.select_target(ens3, (3, 3, 3), eps3, 3.0, strategy="best")

    def test_undesignable_composition_refused(self, ens3):
        # a homopolymer ties every structure, so nothing designs
        e = np.array([[0.0]])
        with pytest.raises(NoDesignableTargetError):
            pipeline.select_target(ens3, (9,), e, 3.0)


class TestRunDesign:
    def test_deterministic_report(self):
        a = pipeline.run_design(small_config())
        b = pipeline.run_design(small_config())
        assert a.to_json() == b.to_json()

    def test_report_json_round_trip(self):
        rep = pipeline.run_design(small_config())
        again = DesignReport.from_json(rep.to_json())
        assert again.to_json() == rep.to_json()

    def test_cycle_records_are_complete(self):
        rep = pipeline.run_design(small_config())
        assert len(rep.cycles) == 2
        for k, rec in enumerate(rep.cycles):
            assert rec.cycle == k
            assert len(rec.candidates) == len(rec.g_values) == len(rec.fold)
            assert rec.n_constraints > 0
            assert rec.perceptron is not None
        # the chain of matrices links up
        assert rep.cycles[1].eps_in == rep.cycles[0].eps_out
        assert rep.final_eps == rep.cycles[-1].eps_out

    def test_candidate_scores_match_objective(self, ens3, eps3):
        from latticedesign.energy import delta_contact_map
        rep = pipeline.run_design(small_config(max_cycles=1))
        rec = rep.cycles[0]
        dc = delta_contact_map(ens3.contact_map(rep.target_index),
                               ens3.average_contact_map())
        obj = solvers.GObjective(dc, np.array(rec.eps_in))
        for seq, g in zip(rec.candidates, rec.g_values):
            assert obj(np.array(seq, dtype=np.int64)) == pytest.approx(g, abs=1e-12)

    def test_max_cycles_zero_evaluates_only(self):
        rep = pipeline.run_design(small_config(max_cycles=0))
        assert rep.status == "max-cycles"
        assert len(rep.cycles) == 1
        rec = rep.cycles[0]
        assert rec.n_constraints == 0
        assert rec.perceptron is None
        assert rec.eps_out == rec.eps_in

    def test_early_stop_truncates_at_first_hit(self):
        # run the same seeds without early stopping to learn where the first
        # hit lands, then check the early-stopping run cuts there
        full = pipeline.run_design(small_config(max_cycles=3, early_stop=False))
        short = pipeline.run_design(small_config(max_cycles=3, early_stop=True))
        stops = [rec.stop for rec in full.cycles]
        if any(stops):
            first = stops.index(True)
            assert short.status == "solved"
            assert len(short.cycles) == first + 1
            assert short.cycles[-1].perceptron is None
        else:
            assert short.status == "max-cycles"
            assert len(short.cycles) == len(full.cycles)

    def test_census_target_resolution(self, census333):
        rep = pipeline.run_design(small_config(target="census", max_cycles=0))
        assert rep.target_index == census333.best_structure()

    def test_file_target_resolution(self, ens3, tmp_path):
        confs = lattice.enumerate_compact_conformations(3)
        path = tmp_path / "target.txt"
        lattice.write_conformations([confs[1]], path)
        rep = pipeline.run_design(small_config(target=str(path), max_cycles=0))
        assert rep.target_index == ens3.index_of(confs[1])

    def test_target_out_of_range(self):
        with pytest.raises(ValueError):
            pipeline.run_design(small_config(target=3))

    def test_explicit_truth_matrix_override(self, eps3):
        # passing e_truth directly must beat the bundled default
        scaled = 2.0 * eps3
        rep = pipeline.run_design(small_config(max_cycles=0), e_truth=scaled)
        seq = np.array(rep.cycles[0].candidates[0], dtype=np.int64)
        from latticedesign.folding import fold
        ens = lattice.Ensemble.from_side(3)
        fr = fold(seq, ens, scaled, 3.0, 0.8)
        assert rep.cycles[0].fold[0]["target_energy"] == \
            pytest.approx(fr.energy_of(rep.target_index), abs=1e-12)


class TestCheckpoints:
    def test_run_dir_layout(self, tmp_path):
        cfg = small_config()
        rep = pipeline.run_design(cfg, run_dir=tmp_path)
        base = tmp_path / cfg.hash()
        assert json.loads((base / "config.json").read_text()) == cfg.to_dict()
        assert (base / "cycle_000.json").exists()
        assert (base / "cycle_001.json").exists()
        assert DesignReport.from_json(
            (base / "report.json").read_text()).to_json() == rep.to_json()
        fc_lines = (base / "fc.csv").read_text().strip().splitlines()
        assert fc_lines[0] == "cycle,f_c,n_designing,n_candidates"
        assert len(fc_lines) == 1 + len(rep.cycles)

    def test_resume_matches_uninterrupted(self, tmp_path):
        cfg = small_config(max_cycles=3)
        full = pipeline.run_design(cfg, run_dir=tmp_path / "full")
        # fake an interruption: keep the config and the first cycle only
        part = tmp_path / "part" / cfg.hash()
        part.mkdir(parents=True)
        src = tmp_path / "full" / cfg.hash()
        for name in ("config.json", "cycle_000.json"):
            (part / name).write_text((src / name).read_text())
        resumed = pipeline.run_design(cfg, run_dir=tmp_path / "part")
        assert resumed.to_json() == full.to_json()

    def test_finished_run_reloads_without_solving(self, tmp_path):
        cfg = small_config()
        first = pipeline.run_design(cfg, run_dir=tmp_path)
        again = pipeline.run_design(cfg, run_dir=tmp_path)
        assert again.to_json() == first.to_json()

    def test_foreign_config_refused(self, tmp_path):
        cfg = small_config()
        pipeline.run_design(cfg, run_dir=tmp_path)
        cfg_path = tmp_path / cfg.hash() / "config.json"
        d = json.loads(cfg_path.read_text())
        d["beta"] = 9.0
        cfg_path.write_text(json.dumps(d))
        with pytest.raises(ValueError, match="different configuration"):
            pipeline.run_design(cfg, run_dir=tmp_path)

    def test_refinement_dump(self, tmp_path):
        pipeline.run_design(small_config(), dump_dir=tmp_path)
        files = sorted(tmp_path.glob("constraints_*.json"))
        assert len(files) == 2
        payload = json.loads(files[0].read_text())
        assert set(payload) == {"cycle", "eta", "constraints", "eps_in", "eps_out"}
        assert payload["cycle"] == 0
        assert payload["constraints"], "cycle 0 produced no constraints"
        first = payload["constraints"][0]
        assert set(first) == {"x", "c"}


class TestBenchmark:
    def test_outputs_and_summary(self, tmp_path, ens3, eps3):
        confs = lattice.enumerate_compact_conformations(3)
        sched = solvers.AnnealSchedule(2.0, 0.1, 200)
        summary = pipeline.benchmark_solvers(
            confs[0], (3, 3, 3), eps3, sched, budget_ms=25.0, samples=3,
            seed=0, out_dir=tmp_path, database=confs)
        for tag in ("seq-sa", "qubo-sa"):
            assert (tmp_path / f"hist_{tag}.csv").exists()
            s = summary[tag]
            assert s["samples"] == 3
            assert s["min"] <= s["median"]
        on_disk = json.loads((tmp_path / "summary.json").read_text())
        assert on_disk["budget_ms"] == 25.0
        assert on_disk["seq-sa"]["min"] == summary["seq-sa"]["min"]

    def test_bad_arguments(self, tmp_path, eps3):
        confs = lattice.enumerate_compact_conformations(3)
        sched = solvers.AnnealSchedule(2.0, 0.1, 200)
        with pytest.raises(ValueError):
            pipeline.benchmark_solvers(confs[0], (3, 3, 3), eps3, sched,
                                       budget_ms=25.0, samples=0, seed=0,
                                       out_dir=tmp_path)
        with pytest.raises(ValueError):
            pipeline.benchmark_solvers(confs[0], (3, 3, 3), eps3, sched,
                                       budget_ms=0.0, samples=1, seed=0,
                                       out_dir=tmp_path)
