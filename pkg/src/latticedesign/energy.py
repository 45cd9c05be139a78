"""Contact energies, the approximate design score, and fold probabilities.

The chain energy of sequence S on conformation C is the sum of pairwise
couplings over the contacts of C:

    E(C, S) = sum_{i<j} C_ij * eps[s_i, s_j]

The design score replaces the full competition over alternative structures by
a contrast against the database-average contact map:

    G(S) = sum_{i<j} (C_ij(target) - <C_ij>) * eps[s_i, s_j]

Minimising G at fixed composition favours sequences whose attractive pairs
sit on contacts specific to the target rather than generic compact contacts.
"""

from __future__ import annotations

import warnings
from importlib import resources
from pathlib import Path

import numpy as np

from .lattice import Ensemble
from .validation import check_energy_matrix, check_probability, check_sequence

# Two fold energies within this absolute distance count as degenerate.
DEGENERACY_TOL = 1e-9

SYMMETRY_WARN_TOL = 1e-9


def contact_energy(cm: np.ndarray, seq, e: np.ndarray) -> float:
    """E(C, S): couplings summed over the contacts of one conformation."""
    cm = np.asarray(cm)
    s = check_sequence(seq, n_sites=cm.shape[0], n_types=e.shape[0])
    ii, jj = np.nonzero(np.triu(cm, k=2))
    return float(np.sum(cm[ii, jj] * e[s[ii] - 1, s[jj] - 1]))


def delta_contact_map(target_map: np.ndarray, average_map: np.ndarray) -> np.ndarray:
    """Contrast map C(target) - <C> feeding the design score."""
    t = np.asarray(target_map, dtype=np.float64)
    a = np.asarray(average_map, dtype=np.float64)
    if t.shape != a.shape:
        raise ValueError(f"map shapes differ: {t.shape} vs {a.shape}")
    return t - a


def scoring_g(dc: np.ndarray, seq, e: np.ndarray) -> float:
    """G(S) for a fixed contrast map ``dc``."""
    dc = np.asarray(dc, dtype=np.float64)
    s = check_sequence(seq, n_sites=dc.shape[0], n_types=e.shape[0])
    ii, jj = np.triu_indices(dc.shape[0], k=1)
    w = dc[ii, jj]
    return float(np.sum(w * e[s[ii] - 1, s[jj] - 1]))


def g_values(seqs: np.ndarray, dc: np.ndarray, e: np.ndarray) -> np.ndarray:
    """Vectorised G over a (n_sequences, n_sites) batch."""
    dc = np.asarray(dc, dtype=np.float64)
    n = dc.shape[0]
    ii, jj = np.triu_indices(n, k=1)
    w = dc[ii, jj]
    keep = np.abs(w) > 0
    ii, jj, w = ii[keep], jj[keep], w[keep]
    out = np.zeros(seqs.shape[0], dtype=np.float64)
    for a, b, wk in zip(ii, jj, w):
        out += wk * e[seqs[:, a] - 1, seqs[:, b] - 1]
    return out


def _ensemble_energies(seq: np.ndarray, structures, e: np.ndarray) -> np.ndarray:
    if isinstance(structures, Ensemble):
        return structures.energies(seq, e)
    return np.array([contact_energy(cm, seq, e) for cm in structures])


def boltzmann_probability(energies: np.ndarray, index: int, beta: float) -> float:
    """Weight of one level in the normalized Boltzmann distribution.

    The spectrum is shifted by its minimum before exponentiation so large
    beta never overflows.
    """
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    energies = np.asarray(energies, dtype=np.float64)
    if not 0 <= index < energies.size:
        raise ValueError(f"index {index} outside spectrum of {energies.size}")
    weights = np.exp(-beta * (energies - energies.min()))
    return float(weights[index] / weights.sum())


def fold_probability(seq, target_index: int, structures, e: np.ndarray, beta: float) -> float:
    """Boltzmann weight of the target among all structures, overflow-safe."""
    e = check_energy_matrix(e)
    s = check_sequence(seq, n_types=e.shape[0])
    energies = _ensemble_energies(s, structures, e)
    return boltzmann_probability(energies, target_index, beta)


def ground_states(energies: np.ndarray, tol: float = DEGENERACY_TOL) -> np.ndarray:
    """Indices whose energy lies within ``tol`` of the minimum."""
    energies = np.asarray(energies)
    return np.nonzero(energies <= energies.min() + tol)[0]


def is_designing(seq, target_index: int, structures, e_truth: np.ndarray,
                 beta: float, p_fold: float) -> bool:
    """True iff the target is the strict unique ground state and folds reliably.

    Degeneracy is decided with the absolute tolerance ``DEGENERACY_TOL``; any
    tie disqualifies the sequence regardless of fold probability.
    """
    p_fold = check_probability(p_fold, "p_fold", open_low=0.0)
    e_truth = check_energy_matrix(e_truth)
    s = check_sequence(seq, n_types=e_truth.shape[0])
    energies = _ensemble_energies(s, structures, e_truth)
    gs = ground_states(energies)
    if gs.size != 1 or gs[0] != target_index:
        return False
    return boltzmann_probability(energies, target_index, beta) >= p_fold


def save_energy_matrix(e: np.ndarray, path) -> None:
    """Write one row per line, entries space-separated with full precision."""
    e = check_energy_matrix(e)
    lines = [" ".join(f"{v:.17g}" for v in row) for row in e]
    Path(path).write_text("\n".join(lines) + "\n")


def load_energy_matrix(path) -> np.ndarray:
    """Read a D x D matrix; symmetrise by averaging, warning on real asymmetry."""
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        rows.append([float(tok) for tok in line.split()])
    if not rows:
        raise ValueError(f"{path}: empty matrix file")
    d = len(rows)
    if any(len(r) != d for r in rows):
        raise ValueError(f"{path}: expected a square {d}x{d} matrix")
    m = np.array(rows, dtype=np.float64)
    asym = np.abs(m - m.T).max()
    if asym > SYMMETRY_WARN_TOL:
        warnings.warn(f"{path}: matrix asymmetry {asym:.3g} exceeds {SYMMETRY_WARN_TOL}; "
                      "symmetrising by averaging", stacklevel=2)
    return (m + m.T) / 2.0


def ground_truth_matrix(n_types: int) -> np.ndarray:
    """Bundled reference interaction matrix for alphabets of 3, 4 or 5 types."""
    if n_types not in (3, 4, 5):
        raise ValueError(f"no bundled matrix for {n_types} types (have 3, 4, 5)")
    ref = resources.files("latticedesign.data") / f"contact_matrix_d{n_types}.txt"
    with resources.as_file(ref) as p:
        return load_energy_matrix(p)
