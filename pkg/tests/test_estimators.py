import numpy as np
import pytest
from sklearn.base import clone

from madgan.estimators import (KnnDistanceDetector, MadGanDetector,
                               PcaReconstructionDetector)
from madgan.numerics import make_rng


def sine_data(n=300, seed=0):
    rng = make_rng(seed)
    t = np.arange(n)
    return np.sin(2 * np.pi * t / 40)[:, None] + 0.05 * rng.standard_normal((n, 1))


@pytest.fixture(scope="module")
def fitted():
    est = MadGanDetector(epochs=25, batch_size=16, latent_dim=3, gen_hidden=16,
                         gen_depth=1, disc_hidden=16, disc_depth=1,
                         disc_optimizer="adam", disc_lr=1e-3, gen_lr=3e-4,
                         inv_iterations=20, seed=1)
    return est.fit(sine_data())


class TestMadGanDetector:
    def test_get_params_round_trips_through_clone(self):
        est = MadGanDetector(epochs=3, latent_dim=5, tau="q0.9", seed=7)
        cloned = clone(est)
        assert cloned.get_params() == est.get_params()

    def test_set_params_chains(self):
        est = MadGanDetector().set_params(epochs=2, lam=0.25)
        assert est.epochs == 2 and est.lam == 0.25

    def test_unfitted_predict_raises(self):
        with pytest.raises(RuntimeError, match="not fitted"):
            MadGanDetector().predict(sine_data())

    def test_fit_returns_self_and_scores_cover(self, fitted):
        X = sine_data(seed=2)
        scores = fitted.score_samples(X)
        assert scores.shape == (len(X),)
        assert np.all(np.isfinite(scores))

    def test_predict_is_binary(self, fitted):
        pred = fitted.predict(sine_data(seed=3))
        assert set(np.unique(pred)) <= {0, 1}

    def test_same_seed_same_scores(self, fitted):
        X = sine_data(seed=4)
        np.testing.assert_array_equal(fitted.score_samples(X),
                                      fitted.score_samples(X))

    def test_fit_is_seed_deterministic(self):
        kw = dict(epochs=3, batch_size=16, latent_dim=3, gen_hidden=8,
                  gen_depth=1, disc_hidden=8, disc_depth=1, seed=5)
        X = sine_data()
        a = MadGanDetector(**kw).fit(X)
        b = MadGanDetector(**kw).fit(X)
        for ta, tb in zip(a.model_.generator.tensors(), b.model_.generator.tensors()):
            np.testing.assert_array_equal(ta, tb)


class TestBaselineEstimators:
    def test_pca_detector_flags_off_manifold_point(self):
        t = np.linspace(-1, 1, 200)
        X = np.stack([t, t], axis=1)
        est = PcaReconstructionDetector(n_components=1).fit(X)
        scores = est.score_samples(np.array([[0.3, 0.3], [1.0, -1.0]]))
        assert scores[0] < 1e-10 < scores[1]

    def test_knn_detector_flags_outlier(self):
        X = make_rng(0).standard_normal((200, 2))
        est = KnnDistanceDetector(n_neighbors=5).fit(X)
        scores = est.score_samples(np.array([[0.0, 0.0], [10.0, 10.0]]))
        assert scores[1] > scores[0]

    def test_clone_preserves_params(self):
        est = KnnDistanceDetector(n_neighbors=9)
        assert clone(est).n_neighbors == 9
        est2 = PcaReconstructionDetector(n_components=4)
        assert clone(est2).n_components == 4

    def test_unfitted_raises(self):
        with pytest.raises(RuntimeError):
            PcaReconstructionDetector().score_samples(np.zeros((3, 2)))
        with pytest.raises(RuntimeError):
            KnnDistanceDetector().score_samples(np.zeros((3, 2)))
