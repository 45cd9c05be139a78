"""Estimator front end: sklearn protocol compliance plus fitted behaviour."""

import numpy as np
import pytest
from sklearn.base import clone

from latticedesign.designer import SequenceDesigner
from latticedesign.energy import delta_contact_map
from latticedesign.folding import fold
from latticedesign.lattice import Conformation, enumerate_compact_conformations
from latticedesign.solvers import GObjective


def tiny_designer(**overrides) -> SequenceDesigner:
    params = dict(side=3, n_types=3, composition=(3, 3, 3), t_max=2.0,
                  t_min=0.1, n_steps=400, restarts=8, n_candidates=5,
                  max_cycles=2, early_stop=False, random_state=1)
    params.update(overrides)
    return SequenceDesigner(**params)


@pytest.fixture(scope="module")
def fitted():
    return tiny_designer().fit(0)


class TestProtocol:
    def test_get_params_round_trip(self):
        est = tiny_designer()
        p = est.get_params()
        assert p["side"] == 3
        assert p["random_state"] == 1
        assert SequenceDesigner(**p).get_params() == p

    def test_clone_strips_state(self, fitted):
        fresh = clone(fitted)
        assert fresh.get_params() == fitted.get_params()
        assert not hasattr(fresh, "energy_matrix_")

    def test_set_params(self):
        est = tiny_designer().set_params(random_state=7, beta=2.5)
        assert est.random_state == 7
        assert est.beta == 2.5

    def test_unfitted_raises(self):
        est = tiny_designer()
        seqs = np.array([[1, 2, 3, 1, 2, 3, 1, 2, 3]])
        with pytest.raises(RuntimeError, match="not fitted"):
            est.transform(seqs)
        with pytest.raises(RuntimeError, match="not fitted"):
            est.predict(seqs)
        with pytest.raises(RuntimeError, match="not fitted"):
            est.score()


class TestFit:
    def test_fit_returns_self_with_state(self, fitted):
        assert isinstance(fitted, SequenceDesigner)
        assert fitted.energy_matrix_.shape == (3, 3)
        assert np.allclose(fitted.energy_matrix_, fitted.energy_matrix_.T)
        assert fitted.target_index_ == 0
        assert fitted.n_cycles_ == len(fitted.report_.cycles) == 2
        assert fitted.status_ in ("solved", "max-cycles")
        assert len(fitted.candidates_) >= 1
        assert 0.0 <= fitted.success_fraction_ <= 1.0

    def test_fit_is_deterministic(self, fitted):
        again = tiny_designer().fit(0)
        np.testing.assert_array_equal(again.energy_matrix_, fitted.energy_matrix_)

    def test_target_as_conformation(self, fitted):
        conf = enumerate_compact_conformations(3)[1]
        est = tiny_designer(max_cycles=0).fit(conf)
        assert est.target_index_ == fitted.ensemble_.index_of(conf)

    def test_target_as_coordinates(self, fitted):
        conf = enumerate_compact_conformations(3)[1]
        coords = np.array(conf.sites)
        est = tiny_designer(max_cycles=0).fit(coords)
        assert est.target_index_ == fitted.ensemble_.index_of(conf)

    def test_target_census(self, census333):
        est = tiny_designer(max_cycles=0).fit("census")
        assert est.target_index_ == census333.best_structure()

    def test_bad_target_shape(self):
        with pytest.raises(ValueError, match="coordinate"):
            tiny_designer().fit(np.zeros((3, 4)))


class TestFittedMethods:
    def test_transform_matches_learned_objective(self, fitted, seqs333):
        seqs = seqs333[:40]
        out = fitted.transform(seqs)
        assert out.shape == (40, 1)
        dc = delta_contact_map(
            fitted.ensemble_.contact_map(fitted.target_index_),
            fitted.ensemble_.average_contact_map())
        expected = GObjective(dc, fitted.energy_matrix_).batch(seqs)
        np.testing.assert_allclose(out[:, 0], expected, atol=1e-12)

    def test_predict_agrees_with_folding(self, fitted, seqs333):
        seqs = seqs333[::97]
        pred = fitted.predict(seqs)
        assert pred.shape == (len(seqs),)
        for seq, p in zip(seqs, pred):
            fr = fold(seq, fitted.ensemble_, fitted.energy_matrix_, 3.0)
            # argmin ties resolve to the lowest index, like ranked_spectrum
            assert p == fr.ranked_spectrum[0][0]

    def test_transform_validates_sequences(self, fitted):
        with pytest.raises(ValueError):
            fitted.transform(np.array([[1, 2, 3]]))          # wrong length
        with pytest.raises(ValueError):
            fitted.transform(np.array([[0, 2, 3, 1, 2, 3, 1, 2, 3]]))

    def test_score_is_final_success_fraction(self, fitted):
        assert fitted.score() == pytest.approx(fitted.report_.cycles[-1].f_c)
