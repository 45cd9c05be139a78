"""Learning the interaction matrix from fold outcomes.

Each fold outcome is turned into linear constraints on the flattened
interaction vector (convention: a constraint (x, c) demands eps . x + c >= 0):

* ordering constraints: every structure the oracle ranks at or below the
  target for some tried sequence must also score no worse than the target
  under the learned matrix;
* gap constraints: for sequences the oracle calls foldable, the learned
  ground state must sit at least ``min_gap`` below the following states.

A most-violated-first perceptron then projects the matrix onto the feasible
set, with a step size that shrinks cycle over cycle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .folding import FoldResult, competitors
from .lattice import Ensemble
from .validation import check_energy_matrix, check_probability, check_sequence


def min_gap(p_fold: float, beta: float) -> float:
    """Energy gap above which the ground state holds weight >= p_fold.

    From p/(1-p) >= e^(beta*gap) against a single competitor:
    gap = ln(p/(1-p)) / beta, positive for p > 1/2.
    """
    p = float(p_fold)
    if not 0.5 < p < 1.0:
        raise ValueError(f"p_fold must lie in (0.5, 1), got {p}")
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    return math.log(p / (1.0 - p)) / beta


def eta_schedule(cycle: int, eta0: float) -> float:
    """Perceptron step size for a refinement cycle: eta0 / (1 + 3*cycle)."""
    if cycle < 0:
        raise ValueError(f"cycle must be >= 0, got {cycle}")
    if not eta0 > 0:
        raise ValueError(f"eta0 must be positive, got {eta0}")
    return eta0 / (1.0 + 3.0 * cycle)


def pair_count(n_types: int) -> int:
    return n_types * (n_types + 1) // 2


def pair_index(m: int, n: int, n_types: int) -> int:
    """Position of unordered type pair (m, n), 1-based labels, (1,1) first."""
    if not 1 <= m <= n_types and 1 <= n <= n_types:
        raise ValueError(f"type labels ({m}, {n}) outside 1..{n_types}")
    if m > n:
        m, n = n, m
    return (m - 1) * n_types - (m - 1) * (m - 2) // 2 + (n - m)


def flatten_energy(e: np.ndarray) -> np.ndarray:
    """Upper-triangle (including diagonal) of a symmetric matrix, no doubling."""
    e = check_energy_matrix(e)
    d = e.shape[0]
    v = np.empty(pair_count(d), dtype=np.float64)
    for m in range(1, d + 1):
        for n in range(m, d + 1):
            v[pair_index(m, n, d)] = e[m - 1, n - 1]
    return v


def unflatten_energy(v: np.ndarray, n_types: int) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.size != pair_count(n_types):
        raise ValueError(f"vector has {v.size} entries, expected {pair_count(n_types)}")
    e = np.empty((n_types, n_types), dtype=np.float64)
    for m in range(1, n_types + 1):
        for n in range(m, n_types + 1):
            e[m - 1, n - 1] = e[n - 1, m - 1] = v[pair_index(m, n, n_types)]
    return e


def contact_type_vector(cm: np.ndarray, seq, n_types: int) -> np.ndarray:
    """Count contacts per unordered type pair; eps_vec . counts = contact energy."""
    cm = np.asarray(cm)
    s = check_sequence(seq, n_sites=cm.shape[0], n_types=n_types)
    v = np.zeros(pair_count(n_types), dtype=np.float64)
    ii, jj = np.nonzero(np.triu(cm, k=2))
    for i, j in zip(ii, jj):
        v[pair_index(int(s[i]), int(s[j]), n_types)] += cm[i, j]
    return v


@dataclass(frozen=True)
class LinearConstraint:
    """Demand eps . x + c >= 0 on the flattened interaction vector."""

    x: np.ndarray
    c: float

    def key(self):
        return self.x.tobytes(), self.c


def build_constraints(history, target_index: int, ensemble: Ensemble,
                      p_fold: float, beta: float, n_max: int = 10) -> list[LinearConstraint]:
    """Constraints from all (sequence, FoldResult) pairs tried so far.

    Ordering constraints come from the oracle's competitors of the target
    (capped at ``n_max`` per sequence); gap constraints, for foldable
    sequences, separate the ground state from the next ``n_max`` states of
    the ranked spectrum.  Duplicates across sequences and cycles collapse.
    """
    p_fold = check_probability(p_fold)
    gap = min_gap(p_fold, beta)
    d = None
    out: list[LinearConstraint] = []
    seen = set()

    def emit(x: np.ndarray, c: float):
        lc = LinearConstraint(x, c)
        k = lc.key()
        if k not in seen:
            seen.add(k)
            out.append(lc)

    for seq, fr in history:
        if not isinstance(fr, FoldResult):
            raise TypeError("history entries must be (sequence, FoldResult) pairs")
        seq = np.asarray(seq, dtype=np.int64)
        if d is None:
            d = int(seq.max())
        d = max(d, int(seq.max()))
    d_types = d
    for seq, fr in history:
        seq = np.asarray(seq, dtype=np.int64)
        ctv = {}

        def n_of(k: int) -> np.ndarray:
            if k not in ctv:
                ctv[k] = contact_type_vector(ensemble.contact_map(k), seq, d_types)
            return ctv[k]

        n_target = n_of(target_index)
        for k in competitors(fr, target_index, n_max):
            emit(n_target - n_of(k), 0.0)
        if fr.foldable:
            gs = fr.ranked_spectrum[0][0]
            n_gs = n_of(gs)
            for k, _ in fr.ranked_spectrum[1:n_max + 1]:
                emit(n_of(k) - n_gs, -gap)
    return out


@dataclass
class RefineResult:
    eps: np.ndarray
    satisfied: bool
    iterations: int


def perceptron_refine(eps_vec: np.ndarray, constraints: list[LinearConstraint],
                      eta: float, max_iters: int = 100_000) -> RefineResult:
    """Most-violated-first perceptron on the constraint set.

    Repeatedly steps eps by eta times the most violated constraint direction
    until all margins are non-negative.  If ``max_iters`` runs out the best
    iterate seen (smallest total violation) is returned instead of the last.
    """
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    eps = np.asarray(eps_vec, dtype=np.float64).copy()
    if not constraints:
        return RefineResult(eps, True, 0)
    x = np.stack([lc.x for lc in constraints])
    c = np.array([lc.c for lc in constraints], dtype=np.float64)
    if x.shape[1] != eps.size:
        raise ValueError(f"constraint dimension {x.shape[1]} != vector size {eps.size}")
    best = eps.copy()
    best_violation = np.inf
    for it in range(max_iters):
        margins = x @ eps + c
        worst = int(np.argmin(margins))
        if margins[worst] >= 0.0:
            return RefineResult(eps, True, it)
        violation = float(-np.minimum(margins, 0.0).sum())
        if violation < best_violation:
            best_violation = violation
            best = eps.copy()
        eps += eta * x[worst]
    margins = x @ eps + c
    if margins.min() >= 0.0:
        return RefineResult(eps, True, max_iters)
    violation = float(-np.minimum(margins, 0.0).sum())
    if violation < best_violation:
        best = eps
    return RefineResult(best, False, max_iters)


def random_energy_matrix(n_types: int, rng: np.random.Generator,
                         half_width: float = 0.5) -> np.ndarray:
    """Symmetric matrix with entries drawn uniformly from [-half_width, half_width]."""
    e = np.zeros((n_types, n_types), dtype=np.float64)
    for m in range(n_types):
        for n in range(m, n_types):
            e[m, n] = e[n, m] = rng.uniform(-half_width, half_width)
    return e
