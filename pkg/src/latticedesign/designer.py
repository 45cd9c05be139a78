"""Estimator-style front end to the design loop.

``SequenceDesigner`` follows the scikit-learn protocol: constructor
parameters are stored verbatim (so ``get_params`` / ``set_params`` / cloning
work), ``fit`` learns the interaction matrix for a target conformation, and
the fitted model scores and folds new sequences under what it learned.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .energy import delta_contact_map
from .lattice import Conformation, Ensemble
from .pipeline import DesignConfig, run_design
from .solvers import GObjective
from .validation import check_sequences


class SequenceDesigner(BaseEstimator):
    """Learn a contact interaction matrix that singles out one fold.

    Parameters mirror :class:`~latticedesign.pipeline.DesignConfig`.  After
    ``fit`` the learned matrix lives in ``energy_matrix_`` and the full cycle
    history in ``report_``.
    """

    def __init__(self, side=4, n_types=3, composition=(5, 5, 6), beta=3.0,
                 p_fold=0.8, a1=2.1, a2=2.1, b=1.0, eta0=0.325, solver="seq-sa",
                 t_max=100.0, t_min=1e-4, n_steps=10_000, restarts=200,
                 n_candidates=30, max_cycles=5, n_competitors=10, stop_fc=0.5,
                 early_stop=True, eps_init="random", truth_matrix=None,
                 random_state=0):
        self.side = side
        self.n_types = n_types
        self.composition = composition
        self.beta = beta
        self.p_fold = p_fold
        self.a1 = a1
        self.a2 = a2
        self.b = b
        self.eta0 = eta0
        self.solver = solver
        self.t_max = t_max
        self.t_min = t_min
        self.n_steps = n_steps
        self.restarts = restarts
        self.n_candidates = n_candidates
        self.max_cycles = max_cycles
        self.n_competitors = n_competitors
        self.stop_fc = stop_fc
        self.early_stop = early_stop
        self.eps_init = eps_init
        self.truth_matrix = truth_matrix
        self.random_state = random_state

    def _config(self, target) -> DesignConfig:
        return DesignConfig(
            side=self.side, n_types=self.n_types,
            composition=tuple(self.composition), target=target, beta=self.beta,
            p_fold=self.p_fold, a1=self.a1, a2=self.a2, b=self.b, eta0=self.eta0,
            solver=self.solver, t_max=self.t_max, t_min=self.t_min,
            n_steps=self.n_steps, restarts=self.restarts,
            n_candidates=self.n_candidates, max_cycles=self.max_cycles,
            n_competitors=self.n_competitors, seed=self.random_state,
            stop_fc=self.stop_fc, early_stop=self.early_stop,
            eps_init=self.eps_init, truth_matrix=self.truth_matrix)

    def fit(self, X, y=None):
        """Learn the matrix for a target given as a Conformation, an ensemble
        index, "census", or an (n_sites, 2) coordinate array."""
        if isinstance(X, Conformation):
            target: object = X
        elif isinstance(X, (int, np.integer)):
            target = int(X)
        elif isinstance(X, str):
            target = X
        else:
            coords = np.asarray(X)
            if coords.ndim != 2 or coords.shape[1] != 2:
                raise ValueError("target must be a Conformation, index, 'census', "
                                 "or an (n_sites, 2) coordinate array")
            target = Conformation(tuple((int(a), int(b)) for a, b in coords))

        self.ensemble_ = Ensemble.from_side(self.side)
        if isinstance(target, Conformation):
            target = self.ensemble_.index_of(target)
        cfg = self._config(target)
        report = run_design(cfg)
        self.report_ = report
        self.target_index_ = report.target_index
        self.energy_matrix_ = np.array(report.final_eps, dtype=np.float64)
        last = report.cycles[-1] if report.cycles else None
        self.candidates_ = ([np.array(c, dtype=np.int64) for c in last.candidates]
                            if last else [])
        self.success_fraction_ = last.f_c if last else 0.0
        self.n_cycles_ = len(report.cycles)
        self.status_ = report.status
        dc = delta_contact_map(self.ensemble_.contact_map(self.target_index_),
                               self.ensemble_.average_contact_map())
        self._objective = GObjective(dc, self.energy_matrix_)
        return self

    def _check_fitted(self):
        if not hasattr(self, "energy_matrix_"):
            raise RuntimeError("this SequenceDesigner is not fitted yet")

    def transform(self, X) -> np.ndarray:
        """Design scores (one column; lower favours the target) under the
        learned matrix."""
        self._check_fitted()
        seqs = check_sequences(X, n_sites=self.side ** 2, n_types=self.n_types)
        return self._objective.batch(seqs)[:, None]

    def predict(self, X) -> np.ndarray:
        """Predicted ground-state structure index per sequence under the
        learned matrix (ties resolve to the lowest index)."""
        self._check_fitted()
        seqs = check_sequences(X, n_sites=self.side ** 2, n_types=self.n_types)
        energies = self.ensemble_.energies_batch(seqs, self.energy_matrix_)
        return energies.argmin(axis=1)

    def score(self, X=None, y=None) -> float:
        """Ground-truth success fraction of the final candidate set."""
        self._check_fitted()
        return float(self.success_fraction_)
