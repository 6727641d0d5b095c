"""Scikit-learn style estimator facade over the detection pipeline.

`fit` consumes a raw [n_timesteps, n_variables] array of normal data;
`score_samples` returns the per-timestep anomaly score (higher = more
anomalous) and `predict` the binary anomaly labels. Parameters follow the
sklearn convention of being stored verbatim in ``__init__`` so ``clone``
and ``get_params`` work as usual.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array

from . import detector
from .baselines import knn_detector, pca_detector
from .dataset import (MultivariateSeries, choose_pc_count, fit_normalizer,
                      fit_pca, make_windows, normalize, project)
from .detector import InversionConfig
from .gan import TrainConfig, train
from .numerics import make_rng


def _as_series(X) -> MultivariateSeries:
    if isinstance(X, MultivariateSeries):
        return X
    values = check_array(X, dtype=np.float64, ensure_2d=True)
    return MultivariateSeries(values=values)


class MadGanDetector(BaseEstimator):
    """GAN-trained LSTM pair scoring timesteps by reconstruction + discrimination.

    Parameters mirror the run configuration; defaults follow the reference
    setup (window 30 step 10, latent dim 15, generator depth 3 / 100 units,
    discriminator depth 1 / 100 units, 100 epochs).
    """

    def __init__(self, s_w=30, s_s=10, latent_dim=15, gen_hidden=100, gen_depth=3,
                 disc_hidden=100, disc_depth=1, epochs=100, batch_size=64,
                 d_steps=1, gen_optimizer="adam", gen_lr=1e-3,
                 disc_optimizer="sgd", disc_lr=0.01, grad_clip=5.0,
                 pc="none", variance_target=0.995, lam=0.5, tau="q0.99",
                 inv_iterations=50, inv_lr=0.01, inv_restarts=3,
                 similarity="cosine", seed=0):
        self.s_w = s_w
        self.s_s = s_s
        self.latent_dim = latent_dim
        self.gen_hidden = gen_hidden
        self.gen_depth = gen_depth
        self.disc_hidden = disc_hidden
        self.disc_depth = disc_depth
        self.epochs = epochs
        self.batch_size = batch_size
        self.d_steps = d_steps
        self.gen_optimizer = gen_optimizer
        self.gen_lr = gen_lr
        self.disc_optimizer = disc_optimizer
        self.disc_lr = disc_lr
        self.grad_clip = grad_clip
        self.pc = pc
        self.variance_target = variance_target
        self.lam = lam
        self.tau = tau
        self.inv_iterations = inv_iterations
        self.inv_lr = inv_lr
        self.inv_restarts = inv_restarts
        self.similarity = similarity
        self.seed = seed

    def _train_config(self) -> TrainConfig:
        return TrainConfig(epochs=self.epochs, batch_size=self.batch_size,
                           d_steps=self.d_steps, latent_dim=self.latent_dim,
                           gen_hidden=self.gen_hidden, gen_depth=self.gen_depth,
                           disc_hidden=self.disc_hidden, disc_depth=self.disc_depth,
                           gen_optimizer=self.gen_optimizer, gen_lr=self.gen_lr,
                           disc_optimizer=self.disc_optimizer, disc_lr=self.disc_lr,
                           grad_clip=self.grad_clip, seed=self.seed)

    def _inversion_config(self) -> InversionConfig:
        return InversionConfig(iterations=self.inv_iterations,
                               learning_rate=self.inv_lr,
                               restarts=self.inv_restarts,
                               similarity=self.similarity)

    def fit(self, X, y=None, progress=None):
        series = _as_series(X)
        norm_state = fit_normalizer(series)
        normalized = normalize(series, norm_state)
        pca_state = None
        if self.pc != "none":
            if self.pc == "auto":
                k = choose_pc_count(normalized, self.variance_target)
            else:
                k = int(self.pc)
            pca_state = fit_pca(normalized, k)
            normalized = project(normalized, pca_state)
        windows = make_windows(normalized, self.s_w, self.s_s)
        rng = make_rng(self.seed)
        self.model_ = train(windows, self._train_config(), rng,
                            normalization=norm_state, pca=pca_state,
                            progress=progress)
        return self

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise RuntimeError("estimator is not fitted; call fit first")

    def score_series(self, X, truth=None):
        """Full ScoreSeries + LabelVector for a test series."""
        self._check_fitted()
        series = _as_series(X)
        rng = make_rng(self.seed + 1)
        return detector.detect(self.model_, series, lam=self.lam, tau=self.tau,
                               config=self._inversion_config(), rng=rng,
                               truth=truth)

    def score_samples(self, X):
        """Per-timestep DR-Score; higher means more anomalous."""
        scores, _ = self.score_series(X)
        return scores.drs

    def predict(self, X):
        """Binary per-timestep labels (1 = anomaly) under the tau policy."""
        _, labels = self.score_series(X)
        return labels.labels


class PcaReconstructionDetector(BaseEstimator):
    """Baseline: squared PCA reconstruction error per timestep."""

    def __init__(self, n_components=2):
        self.n_components = n_components

    def fit(self, X, y=None):
        self.train_ = _as_series(X)
        return self

    def score_samples(self, X):
        if not hasattr(self, "train_"):
            raise RuntimeError("estimator is not fitted; call fit first")
        return pca_detector(self.train_, _as_series(X), self.n_components).scores


class KnnDistanceDetector(BaseEstimator):
    """Baseline: mean Euclidean distance to the k nearest training rows."""

    def __init__(self, n_neighbors=5):
        self.n_neighbors = n_neighbors

    def fit(self, X, y=None):
        self.train_rows_ = _as_series(X).values
        return self

    def score_samples(self, X):
        if not hasattr(self, "train_rows_"):
            raise RuntimeError("estimator is not fitted; call fit first")
        return knn_detector(self.train_rows_, _as_series(X).values,
                            self.n_neighbors).scores
