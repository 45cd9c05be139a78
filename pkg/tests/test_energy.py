import warnings

import numpy as np
import pytest

import latticedesign as ld
from latticedesign import energy, lattice, seqspace


def loop_contact_energy(cm, seq, e):
    """Reference triple-loop evaluation, no vectorization."""
    total = 0.0
    n = len(seq)
    for i in range(n):
        for j in range(i + 1, n):
            if cm[i, j]:
                total += e[seq[i] - 1, seq[j] - 1]
    return total


def loop_scoring_g(dc, seq, e):
    total = 0.0
    n = len(seq)
    for i in range(n):
        for j in range(i + 1, n):
            total += dc[i, j] * e[seq[i] - 1, seq[j] - 1]
    return total


def test_contact_energy_matches_loop(ens4, eps3, rng):
    for k in (0, 9, 25):
        cm = ens4.contact_map(k)
        for _ in range(5):
            seq = seqspace.random_sequence((5, 5, 6), rng)
            assert energy.contact_energy(cm, seq, eps3) == pytest.approx(
                loop_contact_energy(cm, seq, eps3), abs=1e-12)


def test_scoring_g_matches_loop(ens4, eps3, rng):
    dc = energy.delta_contact_map(ens4.contact_map(5), ens4.average_contact_map())
    for _ in range(8):
        seq = seqspace.random_sequence((5, 5, 6), rng)
        assert energy.scoring_g(dc, seq, eps3) == pytest.approx(
            loop_scoring_g(dc, seq, eps3), abs=1e-12)


def test_scoring_g_decomposition(ens4, eps3, rng):
    # G(S) = E(target, S) - mean over the database of E(db_k, S)
    avg = ens4.average_contact_map()
    dc = energy.delta_contact_map(ens4.contact_map(5), avg)
    for _ in range(4):
        seq = seqspace.random_sequence((5, 5, 6), rng)
        e_target = energy.contact_energy(ens4.contact_map(5), seq, eps3)
        e_mean = np.mean([energy.contact_energy(ens4.contact_map(k), seq, eps3)
                          for k in range(len(ens4))])
        assert energy.scoring_g(dc, seq, eps3) == pytest.approx(
            e_target - e_mean, abs=1e-10)


def test_g_values_batch(ens4, eps3, rng):
    dc = energy.delta_contact_map(ens4.contact_map(5), ens4.average_contact_map())
    seqs = np.stack([seqspace.random_sequence((5, 5, 6), rng) for _ in range(20)])
    batch = energy.g_values(seqs, dc, eps3)
    single = [energy.scoring_g(dc, s, eps3) for s in seqs]
    assert np.allclose(batch, single, atol=1e-12)


def test_ensemble_energies_consistent(ens3, eps3, rng):
    seq = seqspace.random_sequence((3, 3, 3), rng)
    via_ensemble = ens3.energies(seq, eps3)
    via_maps = [loop_contact_energy(ens3.contact_map(k), seq, eps3)
                for k in range(len(ens3))]
    assert np.allclose(via_ensemble, via_maps, atol=1e-12)
    batch = ens3.energies_batch(seq[None, :], eps3)
    assert np.allclose(batch[0], via_maps, atol=1e-12)


def test_boltzmann_two_level():
    # closed form: p = 1 / (1 + exp(-beta * gap))
    beta = 3.0
    p = energy.boltzmann_probability(np.array([-1.0, 0.0]), 0, beta)
    assert p == pytest.approx(1.0 / (1.0 + np.exp(-beta)), rel=1e-12)


def test_boltzmann_shift_invariance():
    beta = 2.0
    e1 = np.array([-2.0, -1.5, 0.3, 4.0])
    p1 = energy.boltzmann_probability(e1, 0, beta)
    p2 = energy.boltzmann_probability(e1 + 1000.0, 0, beta)
    assert p1 == pytest.approx(p2, rel=1e-12)
    # degenerate ground state splits the weight
    assert energy.boltzmann_probability(np.array([0.0, 0.0]), 0, beta) == \
        pytest.approx(0.5, rel=1e-12)
    # huge beta must not overflow
    assert energy.boltzmann_probability(np.array([-500.0, 0.0]), 0, 1e3) == 1.0


def test_boltzmann_normalization(rng):
    beta = 3.0
    energies = rng.normal(size=12)
    total = sum(energy.boltzmann_probability(energies, k, beta)
                for k in range(energies.size))
    assert total == pytest.approx(1.0, rel=1e-12)


def test_fold_probability_matches_direct(ens3, eps3, rng):
    seq = seqspace.random_sequence((3, 3, 3), rng)
    energies = ens3.energies(seq, eps3)
    for k in range(len(ens3)):
        assert energy.fold_probability(seq, k, ens3, eps3, 3.0) == pytest.approx(
            energy.boltzmann_probability(energies, k, 3.0), rel=1e-12)


def test_ground_states_tolerance():
    energies = np.array([0.0, 1e-10, 0.5])
    assert list(energy.ground_states(energies, tol=1e-9)) == [0, 1]
    assert list(energy.ground_states(energies, tol=1e-11)) == [0]


def test_is_designing(ens3, eps3, census333, seqs333):
    # cross-check the census labels on a handful of rows
    target = census333.best_structure()
    ranks = set(census333.designing[target].tolist())
    some_designing = sorted(ranks)[:3]
    for r in some_designing:
        assert energy.is_designing(seqs333[r], target, ens3, eps3, 3.0, 0.8)
    for r in (0, 1, 2):
        expect = r in ranks
        assert energy.is_designing(seqs333[r], target, ens3, eps3, 3.0, 0.8) == expect


def test_matrix_io_round_trip(tmp_path, eps3):
    path = tmp_path / "eps.txt"
    energy.save_energy_matrix(eps3, path)
    back = energy.load_energy_matrix(path)
    assert np.array_equal(back, eps3)


def test_matrix_load_symmetrizes(tmp_path):
    path = tmp_path / "asym.txt"
    path.write_text("0.0 1.0\n0.5 0.0\n")
    with pytest.warns(UserWarning):
        m = energy.load_energy_matrix(path)
    assert m[0, 1] == pytest.approx(0.75)
    assert np.array_equal(m, m.T)


def test_ground_truth_matrices():
    e3 = ld.ground_truth_matrix(3)
    e4 = ld.ground_truth_matrix(4)
    e5 = ld.ground_truth_matrix(5)
    assert e3.shape == (3, 3) and e4.shape == (4, 4) and e5.shape == (5, 5)
    for m in (e3, e4, e5):
        assert np.array_equal(m, m.T)
    assert e3[0, 0] == pytest.approx(-0.35346)
    assert e3[0, 2] == pytest.approx(0.42582)
    assert e4[1, 1] == pytest.approx(0.43261)
    assert e4[1, 3] == pytest.approx(-0.5146)
    assert e5[3, 3] == pytest.approx(-0.38521)
    assert e5[4, 4] == pytest.approx(-0.32999)
    with pytest.raises(ValueError):
        ld.ground_truth_matrix(6)


def test_delta_contact_map_shape(ens4):
    dc = energy.delta_contact_map(ens4.contact_map(0), ens4.average_contact_map())
    assert np.array_equal(dc, dc.T)
    assert np.allclose(np.diag(dc), 0.0)
