"""Ground-truth folding over an exhaustive structure database.

Folding a sequence means ranking every structure in the ensemble by contact
energy under the reference interaction matrix.  A sequence "designs" a
structure when that structure is the strict unique ground state and carries
at least ``p_fold`` of the Boltzmann weight.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import seqspace
from .energy import DEGENERACY_TOL
from .lattice import Ensemble
from .validation import (check_composition, check_energy_matrix, check_probability,
                         check_sequence)

THREADS_ENV = "LATTICE_DESIGN_THREADS"


def worker_count() -> int:
    """Parallelism cap from the environment (default 1, i.e. serial)."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}")
    return max(1, n)


@dataclass(frozen=True)
class FoldResult:
    """Outcome of ranking one sequence over the full ensemble."""

    ranked_spectrum: tuple  # ((structure_index, energy), ...) ascending
    ground_states: tuple    # indices tied at the minimum, ascending
    p_native: float         # Boltzmann weight of the top-ranked structure
    foldable: bool          # unique ground state and p_native >= p_fold

    def energy_of(self, structure_index: int) -> float:
        for k, e in self.ranked_spectrum:
            if k == structure_index:
                return e
        raise KeyError(structure_index)


def fold(seq, ensemble: Ensemble, e_truth: np.ndarray, beta: float,
         p_fold: float = 0.8) -> FoldResult:
    """Rank every structure for ``seq``; ties broken by structure index."""
    e_truth = check_energy_matrix(e_truth)
    s = check_sequence(seq, n_sites=ensemble.n_sites, n_types=e_truth.shape[0])
    p_fold = check_probability(p_fold)
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    energies = ensemble.energies(s, e_truth)
    order = np.argsort(energies, kind="stable")
    spectrum = tuple((int(k), float(energies[k])) for k in order)
    gs = tuple(int(k) for k in np.nonzero(energies <= energies.min() + DEGENERACY_TOL)[0])
    shifted = np.exp(-beta * (energies - energies.min()))
    p_native = float(shifted[order[0]] / shifted.sum())
    foldable = len(gs) == 1 and p_native >= p_fold
    return FoldResult(spectrum, gs, p_native, foldable)


def competitors(fr: FoldResult, target_index: int, n_max: int = 10) -> list[int]:
    """Structures faring at least as well as the target, best first.

    All entries with energy <= energy(target) (within the degeneracy
    tolerance), the target itself excluded, truncated to ``n_max``.
    """
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    if n_max == 0:
        return []
    e_target = fr.energy_of(target_index)
    out = []
    for k, e in fr.ranked_spectrum:
        if e > e_target + DEGENERACY_TOL:
            break
        if k != target_index:
            out.append(k)
        if len(out) == n_max:
            break
    return out


@dataclass(frozen=True)
class DesignabilityRecord:
    structure: int
    unique_count: int     # sequences whose strict unique ground state this is
    designing_count: int  # of those, how many also clear p_fold


@dataclass
class CensusResult:
    records: list[DesignabilityRecord]
    designing: dict[int, np.ndarray] = field(repr=False)  # structure -> sequence ranks
    total_sequences: int = 0
    composition: tuple = ()

    def best_structure(self) -> int:
        """Structure with the most designing sequences; ties to the lowest index."""
        best = max(self.records, key=lambda r: (r.designing_count, -r.structure))
        return best.structure


def _census_chunk(ensemble: Ensemble, e_truth: np.ndarray, beta: float, p_fold: float,
                  start: int, block: np.ndarray):
    energies = ensemble.energies_batch(block, e_truth)
    e_min = energies.min(axis=1)
    ties = (energies <= e_min[:, None] + DEGENERACY_TOL).sum(axis=1)
    gs = energies.argmin(axis=1)
    p_native = 1.0 / np.exp(-beta * (energies - e_min[:, None])).sum(axis=1)
    unique = ties == 1
    designing = unique & (p_native >= p_fold)
    n = len(ensemble)
    unique_counts = np.bincount(gs[unique], minlength=n)
    designing_counts = np.bincount(gs[designing], minlength=n)
    ranks = start + np.nonzero(designing)[0]
    return unique_counts, designing_counts, gs[designing], ranks


def designability_census(ensemble: Ensemble, composition, e_truth: np.ndarray,
                         beta: float, p_fold: float = 0.8, *,
                         cap: int = seqspace.EXHAUSTIVE_CAP,
                         chunk_size: int = 1 << 16,
                         sequences: np.ndarray | None = None) -> CensusResult:
    """Fold every arrangement of the composition and tally per-structure results.

    The sequence space is guarded by ``cap``; pass a prebuilt ``sequences``
    array (lexicographic order) to skip regeneration when calling repeatedly.
    """
    comp = check_composition(composition, n_sites=ensemble.n_sites)
    e_truth = check_energy_matrix(e_truth, n_types=len(comp))
    p_fold = check_probability(p_fold)
    total = seqspace.guard_exhaustive(comp, cap)

    if sequences is not None:
        if sequences.shape != (total, ensemble.n_sites):
            raise ValueError("prebuilt sequence array has the wrong shape")
        chunks = [(s, sequences[s:min(s + chunk_size, total)])
                  for s in range(0, total, chunk_size)]
    else:
        chunks = list(seqspace.iter_chunks(comp, chunk_size, cap))

    workers = worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(
                lambda sb: _census_chunk(ensemble, e_truth, beta, p_fold, *sb), chunks))
    else:
        parts = [_census_chunk(ensemble, e_truth, beta, p_fold, s, b) for s, b in chunks]

    n = len(ensemble)
    unique_counts = np.zeros(n, dtype=np.int64)
    designing_counts = np.zeros(n, dtype=np.int64)
    all_gs, all_ranks = [], []
    for uc, dc, gs, ranks in parts:
        unique_counts += uc
        designing_counts += dc
        all_gs.append(gs)
        all_ranks.append(ranks)
    gs = np.concatenate(all_gs) if all_gs else np.empty(0, dtype=np.int64)
    ranks = np.concatenate(all_ranks) if all_ranks else np.empty(0, dtype=np.int64)
    designing: dict[int, np.ndarray] = {}
    for k in np.unique(gs):
        designing[int(k)] = np.sort(ranks[gs == k])
    records = [DesignabilityRecord(k, int(unique_counts[k]), int(designing_counts[k]))
               for k in range(n)]
    return CensusResult(records, designing, total, comp)
