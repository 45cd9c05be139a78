"""Compact chains on the square lattice.

A conformation is a self-avoiding chain that visits every cell of an L x L
grid.  Conformations related by the 8 point symmetries of the square and by
chain reversal are treated as one class; enumeration returns the
lexicographically smallest member of each class.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence as SequenceABC

import numpy as np

from .errors import ResourceLimitError

# Exhaustive enumeration grows ~16x per side increment; sides beyond this cap
# must be requested explicitly.
ENUMERATION_CAP = 6

Site = tuple[int, int]


@dataclass(frozen=True)
class Conformation:
    """An ordered tuple of grid cells forming one compact chain."""

    sites: tuple[Site, ...]

    def __post_init__(self):
        sites = tuple((int(x), int(y)) for x, y in self.sites)
        object.__setattr__(self, "sites", sites)
        n = len(sites)
        side = math.isqrt(n)
        if side * side != n or side < 1:
            raise ValueError(f"chain length {n} does not fill a square grid")
        if len(set(sites)) != n:
            raise ValueError("chain revisits a cell")
        for x, y in sites:
            if not (0 <= x < side and 0 <= y < side):
                raise ValueError(f"cell ({x}, {y}) outside the {side}x{side} grid")
        for (x0, y0), (x1, y1) in zip(sites, sites[1:]):
            if abs(x0 - x1) + abs(y0 - y1) != 1:
                raise ValueError("consecutive cells must be lattice neighbours")

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def side(self) -> int:
        return math.isqrt(len(self.sites))

    def as_array(self) -> np.ndarray:
        return np.array(self.sites, dtype=np.int64)


def _images(sites: tuple[Site, ...], side: int):
    """All 16 images of a chain: 8 point symmetries x optional reversal."""
    m = side - 1
    maps = (
        lambda x, y: (x, y),
        lambda x, y: (y, m - x),
        lambda x, y: (m - x, m - y),
        lambda x, y: (m - y, x),
        lambda x, y: (m - x, y),
        lambda x, y: (x, m - y),
        lambda x, y: (y, x),
        lambda x, y: (m - y, m - x),
    )
    for f in maps:
        img = tuple(f(x, y) for x, y in sites)
        yield img
        yield img[::-1]


def canonical_form(c: Conformation) -> Conformation:
    """The lexicographically smallest of the 16 symmetry/reversal images."""
    best = min(_images(c.sites, c.side))
    return Conformation(best)


def _directed_paths(side: int):
    """Yield every directed compact chain on the side x side grid.

    Depth-first search over cell ids (id = x*side + y).  A partial chain is
    abandoned as soon as the unvisited cells stop being mutually connected,
    since no Hamiltonian completion can exist then.
    """
    n = side * side
    nbrs: list[list[int]] = [[] for _ in range(n)]
    for x in range(side):
        for y in range(side):
            i = x * side + y
            if x + 1 < side:
                nbrs[i].append(i + side)
            if x > 0:
                nbrs[i].append(i - side)
            if y + 1 < side:
                nbrs[i].append(i + 1)
            if y > 0:
                nbrs[i].append(i - 1)

    full = (1 << n) - 1
    top_row = sum(1 << (x * side + side - 1) for x in range(side))
    bottom_row = sum(1 << (x * side) for x in range(side))
    not_top = full & ~top_row
    not_bottom = full & ~bottom_row

    def region_connected(free: int) -> bool:
        grown = free & (-free)
        while True:
            nxt = (grown
                   | ((grown & not_top) << 1)
                   | ((grown & not_bottom) >> 1)
                   | (grown << side)
                   | (grown >> side)) & free
            if nxt == grown:
                return grown == free
            grown = nxt

    path: list[int] = []
    out: list[tuple[int, ...]] = []

    def extend(cell: int, visited: int):
        path.append(cell)
        if visited == full:
            out.append(tuple(path))
        else:
            free = full & ~visited
            if region_connected(free):
                for j in nbrs[cell]:
                    bit = 1 << j
                    if not visited & bit:
                        extend(j, visited | bit)
        path.pop()

    for start in range(n):
        extend(start, 1 << start)
    return out


def enumerate_compact_conformations(side: int, *, allow_large: bool = False) -> list[Conformation]:
    """All compact chains on the side x side grid, one per symmetry class.

    Returns canonical representatives in lexicographic order.  Sides above
    ``ENUMERATION_CAP`` are refused unless ``allow_large`` is set, because the
    search grows roughly 16-fold per increment of ``side``.
    """
    if side < 2:
        raise ValueError(f"grid side must be >= 2, got {side}")
    if side > ENUMERATION_CAP and not allow_large:
        raise ResourceLimitError(
            f"enumeration for side {side} exceeds the cap ({ENUMERATION_CAP}); "
            "pass allow_large=True to force it")
    classes: set[tuple[Site, ...]] = set()
    for ids in _directed_paths(side):
        sites = tuple((i // side, i % side) for i in ids)
        classes.add(min(_images(sites, side)))
    return [Conformation(s) for s in sorted(classes)]


def contact_map(c: Conformation) -> np.ndarray:
    """0/1 matrix of non-bonded lattice-neighbour pairs.

    Entry (i, j) is 1 iff cells i and j sit at unit distance and |i - j| > 1.
    On the square lattice this forces |i - j| odd (the grid is bipartite).
    """
    n = c.n_sites
    index = {site: k for k, site in enumerate(c.sites)}
    cm = np.zeros((n, n), dtype=np.uint8)
    for k, (x, y) in enumerate(c.sites):
        for nb in ((x + 1, y), (x, y + 1)):
            j = index.get(nb)
            if j is not None and abs(j - k) > 1:
                cm[k, j] = cm[j, k] = 1
    return cm


def average_contact_map(database: Iterable) -> np.ndarray:
    """Entrywise mean contact map over a conformation (or map) database."""
    total = None
    count = 0
    n = None
    for item in database:
        m = contact_map(item) if isinstance(item, Conformation) else np.asarray(item)
        if n is None:
            n = m.shape[0]
            total = np.zeros((n, n), dtype=np.float64)
        elif m.shape != (n, n):
            raise ValueError("database mixes chain lengths")
        total += m
        count += 1
    if count == 0:
        raise ValueError("database must contain at least one conformation")
    return total / count


def _interaction_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Index pairs (i < j) that can ever host a contact: odd |i - j| >= 3."""
    ii, jj = [], []
    for i in range(n):
        for j in range(i + 3, n, 2):
            ii.append(i)
            jj.append(j)
    return np.array(ii, dtype=np.int64), np.array(jj, dtype=np.int64)


class Ensemble:
    """A fixed database of equal-length conformations with cached geometry.

    Stores, per structure, the contact incidence over the bipartite-allowed
    pair basis so a sequence's energies over the whole database reduce to one
    matrix-vector product.
    """

    def __init__(self, conformations: SequenceABC[Conformation]):
        self.conformations = list(conformations)
        if not self.conformations:
            raise ValueError("ensemble must contain at least one conformation")
        n = self.conformations[0].n_sites
        if any(c.n_sites != n for c in self.conformations):
            raise ValueError("ensemble mixes chain lengths")
        self.n_sites = n
        self.side = self.conformations[0].side
        self.pair_i, self.pair_j = _interaction_pairs(n)
        basis = np.zeros((len(self.conformations), self.pair_i.size), dtype=np.float64)
        self._maps: list[np.ndarray] = []
        for k, c in enumerate(self.conformations):
            cm = contact_map(c)
            self._maps.append(cm)
            basis[k] = cm[self.pair_i, self.pair_j]
        self.contact_basis = basis
        self._avg: np.ndarray | None = None
        self._canon_index = {canonical_form(c).sites: k for k, c in enumerate(self.conformations)}

    @classmethod
    def from_side(cls, side: int, *, allow_large: bool = False) -> "Ensemble":
        return cls(enumerate_compact_conformations(side, allow_large=allow_large))

    def __len__(self) -> int:
        return len(self.conformations)

    def contact_map(self, k: int) -> np.ndarray:
        return self._maps[k]

    def contact_pairs(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        hot = self.contact_basis[k] > 0
        return self.pair_i[hot], self.pair_j[hot]

    def average_contact_map(self) -> np.ndarray:
        if self._avg is None:
            self._avg = average_contact_map(self._maps)
        return self._avg

    def index_of(self, c: Conformation) -> int:
        """Ensemble index of the class containing ``c`` (KeyError if absent)."""
        return self._canon_index[canonical_form(c).sites]

    def energies(self, seq: np.ndarray, e: np.ndarray) -> np.ndarray:
        """Contact energy of ``seq`` on every structure."""
        w = e[seq[self.pair_i] - 1, seq[self.pair_j] - 1]
        return self.contact_basis @ w

    def energies_batch(self, seqs: np.ndarray, e: np.ndarray) -> np.ndarray:
        """(n_sequences, n_structures) energies for a batch of sequences."""
        w = e[seqs[:, self.pair_i] - 1, seqs[:, self.pair_j] - 1]
        return w @ self.contact_basis.T


def write_conformations(conformations: Iterable[Conformation], path) -> None:
    """One conformation per line: space-separated "x,y" cells in chain order."""
    lines = []
    for c in conformations:
        lines.append(" ".join(f"{x},{y}" for x, y in c.sites))
    Path(path).write_text("\n".join(lines) + "\n")


def read_conformations(path) -> list[Conformation]:
    """Parse the conformation file format written by :func:`write_conformations`."""
    out = []
    for ln, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        sites = []
        for tok in line.split():
            parts = tok.split(",")
            if len(parts) != 2:
                raise ValueError(f"{path}:{ln}: bad cell {tok!r}, expected x,y")
            sites.append((int(parts[0]), int(parts[1])))
        try:
            out.append(Conformation(tuple(sites)))
        except ValueError as exc:
            raise ValueError(f"{path}:{ln}: {exc}") from exc
    if not out:
        raise ValueError(f"{path}: no conformations found")
    return out
