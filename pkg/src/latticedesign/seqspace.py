"""Fixed-composition sequence space: counting, lexicographic unranking, sampling.

Sequences are arrangements of a multiset: composition (n_1, ..., n_D) places
n_m monomers of type m on the chain.  The lexicographic order over type
labels 1 < 2 < ... < D is the canonical iteration order everywhere; it also
serves as the deterministic tie-break when ranking by score.
"""

from __future__ import annotations

import math
from typing import Iterator

import numpy as np

from .errors import ResourceLimitError
from .validation import check_composition

EXHAUSTIVE_CAP = 10_000_000


def multinomial_count(composition) -> int:
    """Number of distinct arrangements of the composition multiset."""
    comp = check_composition(composition)
    total = math.factorial(sum(comp))
    for c in comp:
        total //= math.factorial(c)
    return total


def guard_exhaustive(composition, cap: int = EXHAUSTIVE_CAP) -> int:
    """Return the arrangement count, refusing spaces larger than ``cap``."""
    count = multinomial_count(composition)
    if count > cap:
        raise ResourceLimitError(
            f"sequence space holds {count} arrangements, above the cap of {cap}")
    return count


def unrank(composition, indices: np.ndarray) -> np.ndarray:
    """Sequences at the given lexicographic ranks, one row per index.

    Maintains, per row, the remaining type counts and the number of
    completions; the count after placing type t at a position with n cells
    left is (remaining completions) * count_t / n, an exact integer.
    """
    comp = check_composition(composition)
    d = len(comp)
    n = sum(comp)
    total = multinomial_count(comp)
    if total > np.iinfo(np.int64).max:
        raise ResourceLimitError("sequence space too large for 64-bit ranking")
    idx = np.asarray(indices, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= total):
        raise ValueError(f"rank outside [0, {total})")
    b = idx.size
    r = idx.copy()
    counts = np.tile(np.array(comp, dtype=np.int64), (b, 1))
    m_rem = np.full(b, total, dtype=np.int64)
    seq = np.empty((b, n), dtype=np.int64)
    for pos in range(n):
        n_rem = n - pos
        acc = np.zeros(b, dtype=np.int64)
        placed = np.zeros(b, dtype=bool)
        for t in range(d):
            block = (m_rem * counts[:, t]) // n_rem
            hit = (~placed) & (r < acc + block)
            if hit.any():
                seq[hit, pos] = t + 1
                r[hit] -= acc[hit]
                m_rem[hit] = block[hit]
                counts[hit, t] -= 1
                placed |= hit
            acc += block
    return seq


def sequence_at(composition, index: int) -> np.ndarray:
    return unrank(composition, np.array([index]))[0]


def iter_chunks(composition, chunk_size: int = 1 << 16,
                cap: int = EXHAUSTIVE_CAP) -> Iterator[tuple[int, np.ndarray]]:
    """Yield (start_rank, block) covering the whole space in lexicographic order."""
    total = guard_exhaustive(composition, cap)
    for start in range(0, total, chunk_size):
        stop = min(start + chunk_size, total)
        yield start, unrank(composition, np.arange(start, stop, dtype=np.int64))


def all_sequences(composition, cap: int = EXHAUSTIVE_CAP) -> np.ndarray:
    """The full (count, n_sites) array in lexicographic order."""
    total = guard_exhaustive(composition, cap)
    return unrank(composition, np.arange(total, dtype=np.int64))


def random_sequence(composition, rng: np.random.Generator) -> np.ndarray:
    """A uniformly random arrangement of the composition multiset."""
    comp = check_composition(composition)
    base = np.repeat(np.arange(1, len(comp) + 1, dtype=np.int64), comp)
    return rng.permutation(base)
