"""Enumeration and contact-map tests.

The directed-path oracle below is an intentionally naive recursion kept
independent of the library's bitmask implementation.
"""

import itertools

import numpy as np
import pytest

import latticedesign as ld
from latticedesign import lattice
from latticedesign.errors import ResourceLimitError


def naive_directed_paths(side):
    """Plain recursive enumeration of Hamiltonian paths on the side x side grid."""
    n = side * side
    found = []

    def extend(path, seen):
        if len(path) == n:
            found.append(tuple(path))
            return
        x, y = path[-1]
        for nx, ny in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if 0 <= nx < side and 0 <= ny < side and (nx, ny) not in seen:
                path.append((nx, ny))
                seen.add((nx, ny))
                extend(path, seen)
                seen.remove((nx, ny))
                path.pop()

    for sx in range(side):
        for sy in range(side):
            extend([(sx, sy)], {(sx, sy)})
    return found


# directed Hamiltonian path counts on the square grid; the 4x4 value is
# cross-checked against the naive oracle in test_directed_counts_match_oracle
DIRECTED_COUNTS = {2: 8, 3: 40, 4: 552, 5: 8648}

# symmetry classes after quotienting by the 8 point symmetries and reversal
CLASS_COUNTS = {2: 1, 3: 3, 4: 38, 5: 549}


@pytest.mark.parametrize("side", [2, 3, 4])
def test_directed_counts_match_oracle(side):
    oracle = {tuple(x * side + y for x, y in p) for p in naive_directed_paths(side)}
    fast = lattice._directed_paths(side)
    assert len(fast) == len(oracle) == DIRECTED_COUNTS[side]
    assert set(fast) == oracle


@pytest.mark.parametrize("side", sorted(DIRECTED_COUNTS))
def test_directed_counts_frozen(side):
    if side == 5:
        assert len(lattice._directed_paths(5)) == DIRECTED_COUNTS[5]
    else:
        assert len(lattice._directed_paths(side)) == DIRECTED_COUNTS[side]


@pytest.mark.parametrize("side", sorted(CLASS_COUNTS))
def test_class_counts_frozen(side):
    confs = lattice.enumerate_compact_conformations(side)
    assert len(confs) == CLASS_COUNTS[side]


@pytest.mark.parametrize("side", [3, 4])
def test_classes_cover_all_directed_paths(side):
    confs = lattice.enumerate_compact_conformations(side)
    canon = {c.sites for c in confs}
    for path in lattice._directed_paths(side):
        c = lattice.Conformation(tuple(divmod(cell, side) for cell in path))
        assert lattice.canonical_form(c).sites in canon


def test_canonical_form_idempotent_and_invariant():
    confs = lattice.enumerate_compact_conformations(4)
    for c in confs[:10]:
        canon = lattice.canonical_form(c)
        assert lattice.canonical_form(canon).sites == canon.sites
        # reversal maps into the same class
        rev = lattice.Conformation(tuple(reversed(c.sites)))
        assert lattice.canonical_form(rev).sites == canon.sites


def test_conformation_validation():
    with pytest.raises(ValueError):
        lattice.Conformation(((0, 0), (0, 1), (1, 1)))  # not a square count
    with pytest.raises(ValueError):
        lattice.Conformation(((0, 0), (0, 1), (0, 0), (1, 0)))  # repeat
    with pytest.raises(ValueError):
        lattice.Conformation(((0, 0), (1, 1), (0, 1), (1, 0)))  # diagonal step
    with pytest.raises(ValueError):
        lattice.Conformation(((0, 0), (0, 1), (0, 2), (0, 3)))  # leaves the box


def test_enumeration_cap():
    with pytest.raises(ResourceLimitError):
        lattice.enumerate_compact_conformations(lattice.ENUMERATION_CAP + 1)


def test_contact_map_invariants(ens4):
    n = ens4.n_sites
    idx = np.arange(n)
    sep = np.abs(idx[:, None] - idx[None, :])
    for k in range(len(ens4)):
        cm = ens4.contact_map(k)
        assert cm.shape == (n, n)
        assert np.array_equal(cm, cm.T)
        assert not cm[sep <= 1].any()
        # bipartite parity: residues at even separation share a sublattice
        assert not cm[sep % 2 == 0].any()
        # compact chains always realize every lattice edge not used by the backbone
        assert cm.sum() // 2 == 2 * 4 * 3 - (n - 1)


def test_contact_map_matches_geometry(ens4):
    c = ens4.conformations[7]
    cm = lattice.contact_map(c)
    pts = c.as_array()
    for i in range(len(pts)):
        for j in range(len(pts)):
            d = abs(pts[i, 0] - pts[j, 0]) + abs(pts[i, 1] - pts[j, 1])
            expect = 1 if (d == 1 and abs(i - j) > 1) else 0
            assert cm[i, j] == expect


def test_contact_map_reversal_relation(ens4):
    c = ens4.conformations[3]
    cm = lattice.contact_map(c)
    rev = lattice.Conformation(tuple(reversed(c.sites)))
    cm_rev = lattice.contact_map(rev)
    assert np.array_equal(cm_rev, cm[::-1, ::-1])


def test_average_contact_map(ens3):
    avg = ens3.average_contact_map()
    stack = np.stack([ens3.contact_map(k) for k in range(len(ens3))])
    assert np.allclose(avg, stack.mean(axis=0))
    assert np.array_equal(avg, avg.T)
    assert avg.min() >= 0.0 and avg.max() <= 1.0
    assert lattice.average_contact_map(list(ens3.conformations)) == pytest.approx(avg)


@pytest.mark.parametrize("n,count", [(16, 49), (25, 132), (36, 289)])
def test_interaction_pair_counts(n, count):
    ii, jj = lattice._interaction_pairs(n)
    brute = [(i, j) for i in range(n) for j in range(i + 1, n)
             if (j - i) % 2 == 1 and j - i >= 3]
    assert ii.size == len(brute) == count
    assert list(zip(ii.tolist(), jj.tolist())) == brute


def test_contact_basis_consistency(ens4):
    # every nonzero entry of the pair basis must match the dense map
    for k in (0, 11, 37):
        cm = ens4.contact_map(k)
        row = ens4.contact_basis[k]
        dense = cm[ens4.pair_i, ens4.pair_j]
        assert np.array_equal(row, dense.astype(row.dtype))


def test_index_of(ens4):
    for k in (0, 5, 19):
        c = ens4.conformations[k]
        assert ens4.index_of(c) == k
        shuffled = lattice.Conformation(tuple(reversed(c.sites)))
        assert ens4.index_of(shuffled) == k


def test_file_round_trip(tmp_path, ens3):
    path = tmp_path / "confs.txt"
    lattice.write_conformations(list(ens3.conformations), path)
    back = lattice.read_conformations(path)
    assert [c.sites for c in back] == [c.sites for c in ens3.conformations]


def test_enumeration_deterministic_order():
    a = lattice.enumerate_compact_conformations(4)
    b = lattice.enumerate_compact_conformations(4)
    assert [c.sites for c in a] == [c.sites for c in b]
