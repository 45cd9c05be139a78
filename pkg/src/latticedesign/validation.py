"""Input validation helpers used at the public API boundaries.

All sequence arrays use 1-based type labels (1..D); type 1 is the label that
the reduced one-hot encoding leaves implicit.
"""

from __future__ import annotations

import numpy as np


def check_sequence(seq, n_sites: int | None = None, n_types: int | None = None) -> np.ndarray:
    """Return ``seq`` as a 1-D int array of type labels, validating bounds."""
    s = np.asarray(seq)
    if s.ndim != 1:
        raise ValueError(f"sequence must be 1-D, got shape {s.shape}")
    if s.size == 0:
        raise ValueError("sequence must be non-empty")
    if not np.issubdtype(s.dtype, np.integer):
        f = np.asarray(seq, dtype=float)
        s = f.astype(np.int64)
        if not np.array_equal(s, f):
            raise ValueError("sequence entries must be integers")
    s = s.astype(np.int64)
    if s.min() < 1:
        raise ValueError("sequence type labels must be >= 1")
    if n_sites is not None and s.size != n_sites:
        raise ValueError(f"sequence has {s.size} sites, expected {n_sites}")
    if n_types is not None and s.max() > n_types:
        raise ValueError(f"sequence uses type {s.max()}, alphabet has {n_types}")
    return s


def check_sequences(x, n_sites: int | None = None, n_types: int | None = None) -> np.ndarray:
    """Return ``x`` as a 2-D (n_samples, n_sites) int array of type labels."""
    a = np.asarray(x)
    if a.ndim == 1:
        a = a[None, :]
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D array of sequences, got shape {a.shape}")
    out = np.empty(a.shape, dtype=np.int64)
    for k in range(a.shape[0]):
        out[k] = check_sequence(a[k], n_sites=n_sites, n_types=n_types)
    return out


def check_energy_matrix(e, n_types: int | None = None, tol: float = 1e-9) -> np.ndarray:
    """Return ``e`` as a float (D, D) symmetric matrix."""
    m = np.asarray(e, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"energy matrix must be square, got shape {m.shape}")
    if m.shape[0] < 1:
        raise ValueError("energy matrix must have at least one type")
    if n_types is not None and m.shape[0] != n_types:
        raise ValueError(f"energy matrix is {m.shape[0]}x{m.shape[0]}, expected {n_types} types")
    if not np.isfinite(m).all():
        raise ValueError("energy matrix entries must be finite")
    if np.abs(m - m.T).max() > tol:
        raise ValueError("energy matrix must be symmetric")
    return m


def check_composition(comp, n_sites: int | None = None) -> tuple[int, ...]:
    """Return ``comp`` as a tuple of per-type counts (type 1 first)."""
    try:
        counts = tuple(int(c) for c in comp)
    except TypeError as exc:
        raise ValueError("composition must be an iterable of counts") from exc
    if len(counts) == 0:
        raise ValueError("composition must have at least one type")
    if any(c < 0 for c in counts):
        raise ValueError("composition counts must be non-negative")
    if sum(counts) == 0:
        raise ValueError("composition must place at least one monomer")
    if n_sites is not None and sum(counts) != n_sites:
        raise ValueError(f"composition sums to {sum(counts)}, expected {n_sites}")
    return counts


def check_contact_map(cm, n_sites: int | None = None) -> np.ndarray:
    """Return ``cm`` as a square symmetric 0/1 array with an empty diagonal band."""
    m = np.asarray(cm)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"contact map must be square, got shape {m.shape}")
    if n_sites is not None and m.shape[0] != n_sites:
        raise ValueError(f"contact map is for {m.shape[0]} sites, expected {n_sites}")
    if not np.array_equal(m, m.T):
        raise ValueError("contact map must be symmetric")
    vals = np.unique(m)
    if not np.isin(vals, (0, 1)).all():
        raise ValueError("contact map entries must be 0 or 1")
    n = m.shape[0]
    idx = np.arange(n)
    if m[idx, idx].any():
        raise ValueError("contact map diagonal must be zero")
    if n > 1 and m[idx[:-1], idx[:-1] + 1].any():
        raise ValueError("chain neighbours cannot be contacts")
    return m.astype(np.uint8)


def check_probability(p: float, name: str = "probability", open_low: float = 0.0) -> float:
    p = float(p)
    if not open_low < p < 1.0:
        raise ValueError(f"{name} must lie in ({open_low}, 1), got {p}")
    return p
