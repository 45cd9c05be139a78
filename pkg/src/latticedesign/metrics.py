"""Ranking quality, design success rate, and score histograms.

The ROC curve tracks, down the score ranking, the cumulative fraction of
known designing sequences recovered; its quality index rescales the area
under the curve so random ranking scores 0 and a perfect front-loaded
ranking approaches 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .energy import is_designing
from .errors import UndefinedMetricError
from .solvers import ExhaustiveRanking


@dataclass
class RocCurve:
    x: np.ndarray  # fraction of the ranking consumed, starts at 0
    y: np.ndarray  # fraction of designing sequences recovered
    q: float       # (area - 1/2) / (1/2), trapezoidal


def _flags_in_rank_order(ranking, designing) -> np.ndarray:
    if isinstance(ranking, ExhaustiveRanking):
        order = ranking.order
        if callable(designing):
            return np.array([bool(designing(ranking.sequence_at(k)))
                             for k in range(len(ranking))])
        designing = np.asarray(designing)
        if designing.dtype == bool:
            if designing.size != order.size:
                raise ValueError("designing mask length does not match the ranking")
            return designing[order]
        mask = np.zeros(order.size, dtype=bool)
        mask[designing.astype(np.int64)] = True
        return mask[order]
    # plain ranked identifiers
    order = np.asarray(ranking)
    if callable(designing):
        return np.array([bool(designing(item)) for item in order])
    designing = np.asarray(designing)
    if designing.dtype == bool:
        return designing[order.astype(np.int64)]
    member = set(int(v) for v in designing)
    return np.array([int(v) in member for v in order])


def roc(ranking, designing) -> RocCurve:
    """ROC over a ranked sequence space.

    ``ranking`` is an :class:`ExhaustiveRanking` or an array of ranked
    identifiers; ``designing`` is a boolean mask / index array over
    identifiers, or a predicate.  Raises when no sequence designs: the curve
    is undefined then.
    """
    flags = _flags_in_rank_order(ranking, designing)
    total = int(flags.sum())
    if total == 0:
        raise UndefinedMetricError("no designing sequences: ROC quality undefined")
    m = flags.size
    x = np.concatenate(([0.0], np.arange(1, m + 1) / m))
    y = np.concatenate(([0.0], np.cumsum(flags) / total))
    area = float(np.trapezoid(y, x))
    return RocCurve(x, y, (area - 0.5) / 0.5)


@dataclass(frozen=True)
class SuccessRecord:
    cycle: int
    n_candidates: int
    n_designing: int

    @property
    def fraction(self) -> float:
        return self.n_designing / self.n_candidates


def success_fraction(candidates, target_index: int, ensemble, e_truth, beta: float,
                     p_fold: float, cycle: int = 0) -> SuccessRecord:
    """Fraction of candidate sequences whose true unique ground state is the target."""
    candidates = list(candidates)
    if not candidates:
        raise ValueError("candidate set must be non-empty")
    hits = sum(1 for s in candidates
               if is_designing(s, target_index, ensemble, e_truth, beta, p_fold))
    return SuccessRecord(cycle, len(candidates), hits)


@dataclass
class Histogram:
    lo: np.ndarray
    hi: np.ndarray
    counts: np.ndarray


def g_histogram(values, bins: int = 60) -> Histogram:
    """Fixed-width histogram over [min, max]; a single point fills one bin."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ValueError("histogram needs at least one value")
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    counts, edges = np.histogram(v, bins=bins)
    return Histogram(edges[:-1], edges[1:], counts)


def write_roc_csv(curve: RocCurve, path, max_points: int = 0) -> None:
    """x,y rows; optionally an even subsample keeping the first and last point."""
    x, y = curve.x, curve.y
    if max_points and x.size > max_points:
        idx = np.unique(np.linspace(0, x.size - 1, max_points).round().astype(np.int64))
        x, y = x[idx], y[idx]
    lines = ["x,y"] + [f"{a:.10g},{b:.10g}" for a, b in zip(x, y)]
    Path(path).write_text("\n".join(lines) + "\n")


def write_fc_csv(records, path) -> None:
    lines = ["cycle,f_c,n_designing,n_candidates"]
    for r in records:
        lines.append(f"{r.cycle},{r.fraction:.10g},{r.n_designing},{r.n_candidates}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_histogram_csv(hist: Histogram, path) -> None:
    lines = ["bin_lo,bin_hi,count"]
    for lo, hi, c in zip(hist.lo, hist.hi, hist.counts):
        lines.append(f"{lo:.10g},{hi:.10g},{int(c)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_summary_json(summary: dict, path) -> None:
    Path(path).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
