"""Quadratic binary encoding of fixed-composition score minimisation.

Site i carries D-1 binary variables q_i^m, one per type m in 2..D; type 1 is
the implicit "all cold" state.  The objective splits into

    H = H_comp + H_occ + H_contact

    H_comp    = A1 * sum_m (sum_i q_i^m - N_m)^2          composition pinning
    H_occ     = A2 * sum_i sum_{m != n} q_i^m q_i^n       one type per site
    H_contact = B  * [ sum_{i<j} dC_ij sum_{m,n} q_i^m q_j^n alpha_mn
                       + sum_{i != j} dC_ij sum_m q_i^m gamma_m
                       + sum_{i<j} dC_ij eps_11 ]

with alpha_mn = eps_mn - eps_m1 - eps_n1 + eps_11 and gamma_m = eps_m1 -
eps_11.  On any valid one-hot assignment both penalties vanish and H equals
B times the design score of the decoded sequence.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .validation import check_composition, check_energy_matrix, check_sequence

# Contrast-map entries below this magnitude generate no terms.
SPARSITY_TOL = 1e-12


@dataclass(frozen=True)
class QuboWeights:
    """Penalty and score weights (composition, occupancy, score)."""

    a1: float = 2.1
    a2: float = 2.1
    b: float = 1.0

    def __post_init__(self):
        for name in ("a1", "a2", "b"):
            v = float(getattr(self, name))
            if not v > 0:
                raise ValueError(f"{name} must be positive, got {v}")
            object.__setattr__(self, name, v)


@dataclass
class QuboProblem:
    """Upper-triangular sparse quadratic form plus a constant offset.

    ``terms`` maps (u, v) with u <= v to coefficients; (u, u) entries are the
    linear part.  ``num_sites``/``num_types`` carry the variable layout and
    are absent on problems read back from bare text files.
    """

    num_vars: int
    terms: dict = field(repr=False)
    offset: float = 0.0
    num_sites: int | None = None
    num_types: int | None = None

    def var_index(self, site: int, type_label: int) -> int:
        if self.num_sites is None or self.num_types is None:
            raise ValueError("variable layout unknown for this problem")
        if not 0 <= site < self.num_sites:
            raise ValueError(f"site {site} outside 0..{self.num_sites - 1}")
        if not 2 <= type_label <= self.num_types:
            raise ValueError(f"type label {type_label} outside 2..{self.num_types}")
        return site * (self.num_types - 1) + (type_label - 2)


def encode(dc: np.ndarray, e: np.ndarray, composition,
           weights: QuboWeights = QuboWeights()) -> QuboProblem:
    """Build the QUBO for score minimisation at the given composition."""
    e = check_energy_matrix(e)
    comp = check_composition(composition)
    d = len(comp)
    if e.shape[0] != d:
        raise ValueError(f"matrix has {e.shape[0]} types, composition has {d}")
    if d < 2:
        raise ValueError("need at least two types to encode")
    dc = np.asarray(dc, dtype=np.float64)
    n = dc.shape[0]
    if dc.shape != (n, n):
        raise ValueError("contrast map must be square")
    if sum(comp) != n:
        raise ValueError(f"composition sums to {sum(comp)}, chain has {n} sites")

    scale = 2.0 * weights.b * np.abs(dc).max() * np.abs(e).max()
    if weights.a1 < scale or weights.a2 < scale:
        warnings.warn(
            f"penalty weights ({weights.a1}, {weights.a2}) below the rough "
            f"dominance scale {scale:.3g}; invalid assignments may win", stacklevel=2)

    nv = n * (d - 1)
    terms: dict[tuple[int, int], float] = {}

    def add(u: int, v: int, coeff: float):
        if u > v:
            u, v = v, u
        terms[(u, v)] = terms.get((u, v), 0.0) + coeff

    def var(site: int, m: int) -> int:  # m is a 1-based label in 2..d
        return site * (d - 1) + (m - 2)

    offset = 0.0

    # composition pinning, one squared deviation per explicit type
    for m in range(2, d + 1):
        n_m = comp[m - 1]
        offset += weights.a1 * n_m * n_m
        for i in range(n):
            add(var(i, m), var(i, m), weights.a1 * (1.0 - 2.0 * n_m))
            for j in range(i + 1, n):
                add(var(i, m), var(j, m), 2.0 * weights.a1)

    # single occupancy per site
    for i in range(n):
        for m in range(2, d + 1):
            for mm in range(m + 1, d + 1):
                add(var(i, m), var(i, mm), 2.0 * weights.a2)

    # contact contrast
    alpha = e[1:, 1:] - e[1:, :1] - e[:1, 1:] + e[0, 0]
    gamma = e[1:, 0] - e[0, 0]
    row_sum = dc.sum(axis=1) - np.diag(dc)
    for i in range(n):
        if abs(row_sum[i]) > 0.0:
            for m in range(2, d + 1):
                add(var(i, m), var(i, m), weights.b * gamma[m - 2] * row_sum[i])
    for i in range(n):
        for j in range(i + 1, n):
            w = dc[i, j]
            if abs(w) < SPARSITY_TOL:
                continue
            offset += weights.b * e[0, 0] * w
            for m in range(2, d + 1):
                for mm in range(2, d + 1):
                    coeff = weights.b * w * alpha[m - 2, mm - 2]
                    if coeff != 0.0:
                        add(var(i, m), var(j, mm), coeff)

    terms = {uv: c for uv, c in terms.items() if c != 0.0}
    return QuboProblem(nv, terms, offset, num_sites=n, num_types=d)


def encode_assignment(seq, n_types: int) -> np.ndarray:
    """One-hot-reduced bits for a sequence (type 1 encodes as all zeros)."""
    s = check_sequence(seq, n_types=n_types)
    n = s.size
    a = np.zeros(n * (n_types - 1), dtype=np.uint8)
    for i, t in enumerate(s):
        if t >= 2:
            a[i * (n_types - 1) + (t - 2)] = 1
    return a


@dataclass(frozen=True)
class DecodeReport:
    """Decoded sequence plus any constraint violations found."""

    sequence: np.ndarray | None   # populated when every site is single-hot
    double_occupancy: tuple       # (site, hot type labels) entries
    composition_delta: dict       # type label -> decoded minus requested count
    ok: bool


def decode(assignment: np.ndarray, composition) -> DecodeReport:
    """Map bits back to a sequence, or report which constraints are broken."""
    comp = check_composition(composition)
    d = len(comp)
    a = np.asarray(assignment).astype(np.int64)
    n = a.size // (d - 1)
    if n * (d - 1) != a.size:
        raise ValueError(f"assignment length {a.size} does not split into {d - 1} bits/site")
    bits = a.reshape(n, d - 1)
    clashes = []
    seq = np.ones(n, dtype=np.int64)
    for i in range(n):
        hot = np.nonzero(bits[i])[0]
        if hot.size > 1:
            clashes.append((i, tuple(int(h) + 2 for h in hot)))
        elif hot.size == 1:
            seq[i] = int(hot[0]) + 2
    if clashes:
        return DecodeReport(None, tuple(clashes), {}, False)
    counts = np.bincount(seq, minlength=d + 1)[1:]
    delta = {m + 1: int(counts[m] - comp[m]) for m in range(d) if counts[m] != comp[m]}
    return DecodeReport(seq, (), delta, not delta)


def qubo_energy(p: QuboProblem, assignment: np.ndarray) -> float:
    """Offset plus the sparse quadratic form evaluated at the assignment."""
    a = np.asarray(assignment).astype(np.float64)
    if a.size != p.num_vars:
        raise ValueError(f"assignment has {a.size} bits, problem has {p.num_vars}")
    total = p.offset
    for (u, v), c in p.terms.items():
        total += c * a[u] if u == v else c * a[u] * a[v]
    return float(total)


def dense_form(p: QuboProblem) -> tuple[np.ndarray, np.ndarray]:
    """(linear, symmetric off-diagonal) dense arrays for fast solvers."""
    lin = np.zeros(p.num_vars, dtype=np.float64)
    quad = np.zeros((p.num_vars, p.num_vars), dtype=np.float64)
    for (u, v), c in p.terms.items():
        if u == v:
            lin[u] += c
        else:
            quad[u, v] += c
            quad[v, u] += c
    return lin, quad


def write_qubo(p: QuboProblem, path) -> None:
    """Text export: header ``qubo <vars> <terms> <offset>`` then ``u v coeff`` rows."""
    lines = [f"qubo {p.num_vars} {len(p.terms)} {p.offset:.17g}"]
    for (u, v) in sorted(p.terms):
        lines.append(f"{u} {v} {p.terms[(u, v)]:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_qubo(path) -> QuboProblem:
    """Parse the text export format; the variable layout is not recoverable."""
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("qubo "):
        raise ValueError(f"{path}: missing qubo header")
    head = lines[0].split()
    if len(head) != 4:
        raise ValueError(f"{path}: malformed header {lines[0]!r}")
    nv, nt, offset = int(head[1]), int(head[2]), float(head[3])
    if len(lines) - 1 != nt:
        raise ValueError(f"{path}: header promises {nt} terms, found {len(lines) - 1}")
    terms: dict[tuple[int, int], float] = {}
    for ln in lines[1:]:
        u_s, v_s, c_s = ln.split()
        u, v = int(u_s), int(v_s)
        if not 0 <= u <= v < nv:
            raise ValueError(f"{path}: bad term indices {u} {v}")
        if (u, v) in terms:
            raise ValueError(f"{path}: duplicate term {u} {v}")
        terms[(u, v)] = float(c_s)
    return QuboProblem(nv, terms, offset)
