"""Per-timestep baseline detectors: PCA reconstruction error and KNN distance.

Both score individual (normalized) measurement vectors, deliberately blind to
temporal structure, and plug into the same threshold-sweep machinery as the
main detector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import MultivariateSeries, fit_pca, project_values, reconstruct_values


@dataclass(frozen=True)
class BaselineScore:
    scores: np.ndarray
    method: str


def pca_detector(train: MultivariateSeries, test: MultivariateSeries, k: int) -> BaselineScore:
    """Squared reconstruction error under a k-component PCA fitted on train."""
    pca = fit_pca(train, k)
    proj = project_values(test.values, pca)
    recon = reconstruct_values(proj, pca)
    err = np.sum((test.values - recon) ** 2, axis=1)
    return BaselineScore(scores=err, method=f"pca_k{k}")


def knn_detector(train_rows: np.ndarray, test_rows: np.ndarray, k: int) -> BaselineScore:
    """Mean Euclidean distance from each test row to its k nearest train rows."""
    train_rows = np.asarray(train_rows, dtype=np.float64)
    test_rows = np.asarray(test_rows, dtype=np.float64)
    n_train = train_rows.shape[0]
    if k < 1 or k > n_train:
        raise ValueError(f"k={k} must be in [1, {n_train}]")
    scores = np.empty(test_rows.shape[0])
    # chunked exact distances; desk-scale data never needs an ANN index
    chunk = 256
    tr_sq = np.sum(train_rows**2, axis=1)
    for start in range(0, test_rows.shape[0], chunk):
        block = test_rows[start:start + chunk]
        d2 = (np.sum(block**2, axis=1)[:, None] + tr_sq[None, :]
              - 2.0 * block @ train_rows.T)
        np.maximum(d2, 0.0, out=d2)
        nearest = np.sort(d2, axis=1)[:, :k]
        scores[start:start + chunk] = np.sqrt(nearest).mean(axis=1)
    return BaselineScore(scores=scores, method=f"knn_k{k}")
