"""Anomaly scoring: latent inversion, combined losses, DR-Score remap, labels.

Both score components are oriented high-iff-anomalous: the reconstruction
residual directly, and the discrimination part as -log D(x) (cross-entropy
of the discriminator's per-timestep probability against the "real" label).
Each component is min-max normalized over the whole test run before the
convex combination, so the mixing weight is scale-independent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import (MultivariateSeries, make_windows, normalize_values,
                      project_values)
from .gan import PROB_EPS, GanModel
from .lstm import lstm_backward, lstm_forward

SIMILARITIES = ("cosine", "neg_mse")


@dataclass
class InversionConfig:
    iterations: int = 50
    learning_rate: float = 0.01
    restarts: int = 3
    similarity: str = "cosine"

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.similarity not in SIMILARITIES:
            raise ValueError(f"similarity must be one of {SIMILARITIES}")


@dataclass
class InversionResult:
    z: np.ndarray
    reconstruction: np.ndarray
    error: float
    initial_error: float
    restart_initial_errors: list[float]
    restart_final_errors: list[float]


@dataclass
class ScoreSeries:
    """Per-timestep DR-Scores with coverage counts and score components."""

    drs: np.ndarray
    lc: np.ndarray
    residual_part: np.ndarray
    discrimination_part: np.ndarray
    lam: float

    @property
    def covered(self) -> np.ndarray:
        return self.lc > 0


@dataclass
class LabelVector:
    labels: np.ndarray
    tau: float
    uncovered: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.uncovered is None:
            self.uncovered = np.zeros(len(self.labels), dtype=bool)


def _inversion_error(x_flat: np.ndarray, y_flat: np.ndarray, similarity: str):
    """Returns (error, dError/dy)."""
    if similarity == "cosine":
        nx = np.linalg.norm(x_flat)
        ny = np.linalg.norm(y_flat)
        denom = max(nx * ny, 1e-300)
        cos = float(x_flat @ y_flat) / denom
        err = 1.0 - cos
        dy = -(x_flat / denom - cos * y_flat / max(ny * ny, 1e-300))
        return err, dy
    diff = y_flat - x_flat
    err = float(np.mean(diff * diff))
    return err, 2.0 * diff / diff.size


def invert_window(model: GanModel, x: np.ndarray, config: InversionConfig,
                  rng: np.random.Generator) -> InversionResult:
    """Gradient descent on the inversion error over z, best of several restarts.

    Steps that would increase the error are rejected with step-halving, so a
    restart's final error never exceeds its initial error.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.s_w, model.data_dim):
        raise ValueError(f"expected window shape {(model.s_w, model.data_dim)}, got {x.shape}")
    x_flat = x.reshape(-1)
    best: InversionResult | None = None
    init_errors: list[float] = []
    final_errors: list[float] = []
    for _ in range(config.restarts):
        z = rng.standard_normal((1, model.s_w, model.latent_dim))
        y, cache = lstm_forward(model.generator, z, head_activation="tanh")
        err, dy_flat = _inversion_error(x_flat, y.reshape(-1), config.similarity)
        if not np.isfinite(err):
            continue
        initial = err
        lr = config.learning_rate
        for _ in range(config.iterations):
            _, dz = lstm_backward(model.generator, cache, dy_flat.reshape(y.shape))
            accepted = False
            for _ in range(12):
                z_new = z - lr * dz
                y_new, cache_new = lstm_forward(model.generator, z_new, head_activation="tanh")
                err_new, dy_new = _inversion_error(x_flat, y_new.reshape(-1), config.similarity)
                if np.isfinite(err_new) and err_new < err:
                    z, y, cache, err, dy_flat = z_new, y_new, cache_new, err_new, dy_new
                    accepted = True
                    break
                lr *= 0.5
            if not accepted:
                break
            lr = min(lr * 1.2, 10.0 * config.learning_rate)
        init_errors.append(initial)
        final_errors.append(err)
        if best is None or err < best.error:
            best = InversionResult(z[0], y[0], err, initial, [], [])
    if best is None:
        raise RuntimeError("all inversion restarts produced non-finite errors")
    best.restart_initial_errors = init_errors
    best.restart_final_errors = final_errors
    return best


def residual(x: np.ndarray, x_hat: np.ndarray) -> np.ndarray:
    """Per-timestep sum over variables of absolute reconstruction differences."""
    x = np.asarray(x, dtype=np.float64)
    x_hat = np.asarray(x_hat, dtype=np.float64)
    if x.shape != x_hat.shape:
        raise ValueError(f"shape mismatch {x.shape} vs {x_hat.shape}")
    return np.abs(x - x_hat).sum(axis=-1)


def discrimination_term(d_probs: np.ndarray) -> np.ndarray:
    """Cross-entropy against the "real" label; high means anomalous."""
    return -np.log(np.clip(d_probs, PROB_EPS, 1.0 - PROB_EPS))


def minmax_normalize(values: np.ndarray) -> np.ndarray:
    """Scale a whole score matrix to [0, 1]; a constant matrix maps to 0."""
    lo = values.min()
    hi = values.max()
    if hi == lo:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


def combined_loss(res_norm: np.ndarray, disc_norm: np.ndarray, lam: float) -> np.ndarray:
    """Convex combination of the two normalized components."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must be in [0, 1]")
    res_norm = np.asarray(res_norm, dtype=np.float64)
    disc_norm = np.asarray(disc_norm, dtype=np.float64)
    if res_norm.shape != disc_norm.shape:
        raise ValueError("component shape mismatch")
    return lam * res_norm + (1.0 - lam) * disc_norm


def remap_to_timesteps(window_values: np.ndarray, start_indices: np.ndarray,
                       n_timesteps: int) -> tuple[np.ndarray, np.ndarray]:
    """Scatter-mean window-level values back onto source timesteps.

    Timestep t averages window_values[j, s] over all (j, s) with
    start_indices[j] + s == t; the count is returned alongside.
    """
    window_values = np.asarray(window_values, dtype=np.float64)
    n_windows, s_w = window_values.shape
    starts = np.asarray(start_indices, dtype=np.int64)
    if starts.shape != (n_windows,):
        raise ValueError("start_indices length must match window count")
    if n_windows and starts.max() + s_w > n_timesteps:
        raise ValueError("windows extend past the stated series length")
    total = np.zeros(n_timesteps)
    count = np.zeros(n_timesteps, dtype=np.int64)
    offsets = np.arange(s_w)
    for j in range(n_windows):
        t = starts[j] + offsets
        np.add.at(total, t, window_values[j])
        np.add.at(count, t, 1)
    mean = np.divide(total, count, out=np.zeros(n_timesteps), where=count > 0)
    return mean, count


def drs_remap(window_losses: np.ndarray, start_indices: np.ndarray, n_timesteps: int,
              res_norm: np.ndarray | None = None,
              disc_norm: np.ndarray | None = None,
              lam: float = 0.5) -> ScoreSeries:
    """Build the per-timestep DR-Score series from window-level losses."""
    drs, lc = remap_to_timesteps(window_losses, start_indices, n_timesteps)
    if res_norm is not None:
        res_part, _ = remap_to_timesteps(res_norm, start_indices, n_timesteps)
    else:
        res_part = np.zeros(n_timesteps)
    if disc_norm is not None:
        disc_part, _ = remap_to_timesteps(disc_norm, start_indices, n_timesteps)
    else:
        disc_part = np.zeros(n_timesteps)
    return ScoreSeries(drs=drs, lc=lc, residual_part=res_part,
                       discrimination_part=disc_part, lam=lam)


def threshold_labels(scores: ScoreSeries, tau: float) -> LabelVector:
    """A_t = 1 iff DRS_t > tau; uncovered timesteps stay 0 and are flagged."""
    if not np.isfinite(tau):
        raise ValueError("tau must be finite")
    covered = scores.covered
    labels = ((scores.drs > tau) & covered).astype(np.int64)
    return LabelVector(labels=labels, tau=tau, uncovered=~covered)


def quantile_tau(scores: ScoreSeries, q: float) -> float:
    covered = scores.drs[scores.covered]
    if covered.size == 0:
        raise ValueError("no covered timesteps to take a quantile over")
    return float(np.quantile(covered, q))


def detect(model: GanModel, test_series: MultivariateSeries, lam: float = 0.5,
           tau: float | str = "q0.99", config: InversionConfig | None = None,
           rng: np.random.Generator | None = None,
           truth: np.ndarray | None = None) -> tuple[ScoreSeries, LabelVector]:
    """Full scoring pipeline over a test series.

    tau may be an explicit float, "qX" for the X quantile of the run's own
    DR-Scores (e.g. "q0.99"), or "sweep" to pick the best-F1 threshold
    against provided ground-truth labels (evaluation use only).
    """
    from .metrics import sweep_tau  # local import to avoid a cycle

    if config is None:
        config = InversionConfig()
    if rng is None:
        rng = np.random.default_rng(0)
    values = test_series.values
    if model.normalization is not None:
        values = normalize_values(values, model.normalization)
    if model.pca is not None:
        values = project_values(values, model.pca)
    if values.shape[1] != model.data_dim:
        raise ValueError(
            f"test data has {values.shape[1]} variables after preprocessing, "
            f"model expects {model.data_dim}")
    ws = make_windows(values, model.s_w, model.s_s)
    n_windows = ws.count
    res_mat = np.empty((n_windows, model.s_w))
    for j in range(n_windows):
        inv = invert_window(model, ws.windows[j], config, rng)
        res_mat[j] = residual(ws.windows[j], inv.reconstruction)
    probs, _ = lstm_forward(model.discriminator, ws.windows, head_activation="sigmoid")
    disc_mat = discrimination_term(probs[:, :, 0])
    res_norm = minmax_normalize(res_mat)
    disc_norm = minmax_normalize(disc_mat)
    losses = combined_loss(res_norm, disc_norm, lam)
    scores = drs_remap(losses, ws.start_indices, test_series.num_timesteps,
                       res_norm=res_norm, disc_norm=disc_norm, lam=lam)
    if isinstance(tau, str):
        if tau == "sweep":
            if truth is None:
                truth = test_series.labels
            if truth is None:
                raise ValueError("tau='sweep' needs ground-truth labels")
            table = sweep_tau(scores, truth)
            tau_value = table.best_f1.tau
        elif tau.startswith("q"):
            tau_value = quantile_tau(scores, float(tau[1:]))
        else:
            raise ValueError(f"unknown tau policy {tau!r}")
    else:
        tau_value = float(tau)
    return scores, threshold_labels(scores, tau_value)
