"""Inverse folding on compact square-lattice chains.

Enumerate compact conformations, fold sequences exhaustively under a
reference interaction matrix, select low-scoring sequences by simulated
annealing or a quadratic binary encoding, and learn the matrix itself from
fold outcomes with a perceptron.
"""

from .designer import SequenceDesigner
from .energy import (DEGENERACY_TOL, boltzmann_probability, contact_energy, delta_contact_map,
                     fold_probability, g_values, ground_truth_matrix, is_designing,
                     load_energy_matrix, save_energy_matrix, scoring_g)
from .errors import NoDesignableTargetError, ResourceLimitError, UndefinedMetricError
from .folding import (CensusResult, DesignabilityRecord, FoldResult, competitors,
                   designability_census, fold)
from .lattice import (ENUMERATION_CAP, Conformation, Ensemble, average_contact_map,
                      canonical_form, contact_map, enumerate_compact_conformations,
                      read_conformations, write_conformations)
from .metrics import (Histogram, RocCurve, SuccessRecord, g_histogram, roc,
                      success_fraction)
from .pipeline import (DesignConfig, DesignReport, benchmark_solvers, run_design,
                       select_target, stop_rule, stream_seed)
from .qubo import (DecodeReport, QuboProblem, QuboWeights, decode, encode,
                   encode_assignment, qubo_energy, read_qubo, write_qubo)
from .refine import (LinearConstraint, RefineResult, build_constraints,
                     contact_type_vector, eta_schedule, flatten_energy, min_gap,
                     perceptron_refine, random_energy_matrix, unflatten_energy)
from .solvers import (AnnealSchedule, ExhaustiveRanking, GObjective, SolverRun,
                      anneal_pool, exhaustive_sequence_search, qubo_sa,
                      select_candidates, sequence_sa)

__version__ = "0.1.0"

__all__ = [
    "AnnealSchedule", "boltzmann_probability", "CensusResult", "Conformation",
    "DecodeReport",
    "DEGENERACY_TOL", "DesignabilityRecord", "DesignConfig", "DesignReport",
    "Ensemble", "ENUMERATION_CAP", "ExhaustiveRanking", "FoldResult",
    "GObjective", "Histogram", "LinearConstraint", "NoDesignableTargetError",
    "QuboProblem", "QuboWeights", "RefineResult", "ResourceLimitError",
    "RocCurve", "SequenceDesigner", "SolverRun", "SuccessRecord",
    "UndefinedMetricError", "anneal_pool", "average_contact_map",
    "benchmark_solvers", "build_constraints", "canonical_form",
    "competitors", "contact_energy", "contact_map", "contact_type_vector",
    "decode", "delta_contact_map", "designability_census",
    "encode", "encode_assignment", "enumerate_compact_conformations",
    "eta_schedule", "exhaustive_sequence_search", "flatten_energy", "fold",
    "fold_probability", "g_histogram", "g_values", "ground_truth_matrix",
    "is_designing", "load_energy_matrix", "min_gap", "perceptron_refine",
    "qubo_energy", "qubo_sa", "random_energy_matrix", "read_conformations",
    "read_qubo", "roc", "run_design", "save_energy_matrix", "scoring_g",
    "select_candidates", "select_target", "sequence_sa", "stop_rule",
    "stream_seed", "success_fraction", "unflatten_energy",
    "write_conformations", "write_qubo",
]
