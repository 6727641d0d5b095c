"""Adversarial training of the LSTM generator/discriminator pair.

The discriminator is trained on the standard binary cross-entropy objective
(real -> 1, fake -> 0); the generator uses the non-saturating loss
mean(-log D(G(z))). Training progress is monitored per epoch with the
unbiased squared MMD between generated and real windows.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import NormalizationState, PcaState, WindowSet
from .lstm import LstmStackParams, init_params, lstm_backward, lstm_forward
from .numerics import AdamState, adam_step, clip_global_norm, sgd_step

PROB_EPS = 1e-7


class TrainingDiverged(RuntimeError):
    """Raised when a loss goes non-finite during training."""


@dataclass
class TrainConfig:
    epochs: int = 100
    batch_size: int = 64
    d_steps: int = 1
    latent_dim: int = 15
    gen_hidden: int = 100
    gen_depth: int = 3
    disc_hidden: int = 100
    disc_depth: int = 1
    gen_optimizer: str = "adam"
    gen_lr: float = 1e-3
    disc_optimizer: str = "sgd"
    disc_lr: float = 0.01
    grad_clip: float = 5.0
    seed: int = 0

    def __post_init__(self):
        for name in ("epochs", "batch_size", "d_steps", "latent_dim",
                     "gen_hidden", "gen_depth", "disc_hidden", "disc_depth"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.gen_lr <= 0 or self.disc_lr <= 0:
            raise ValueError("learning rates must be positive")
        for name in ("gen_optimizer", "disc_optimizer"):
            if getattr(self, name) not in ("adam", "sgd"):
                raise ValueError(f"{name} must be 'adam' or 'sgd'")


@dataclass
class GanModel:
    """Trained generator + discriminator plus the preprocessing state."""

    generator: LstmStackParams
    discriminator: LstmStackParams
    latent_dim: int
    s_w: int
    s_s: int
    normalization: NormalizationState | None = None
    pca: PcaState | None = None
    training_log: list[tuple[int, float, float, float]] = field(default_factory=list)

    @property
    def data_dim(self) -> int:
        return self.generator.output_dim


def _clamp(p: np.ndarray) -> np.ndarray:
    return np.clip(p, PROB_EPS, 1.0 - PROB_EPS)


def d_loss(real_scores: np.ndarray, fake_scores: np.ndarray) -> float:
    """mean(-log D(x)) + mean(-log(1 - D(G(z))))."""
    real = _clamp(np.asarray(real_scores, dtype=np.float64))
    fake = _clamp(np.asarray(fake_scores, dtype=np.float64))
    return float(np.mean(-np.log(real)) + np.mean(-np.log(1.0 - fake)))


def g_loss(fake_scores: np.ndarray) -> float:
    """Non-saturating generator loss mean(-log D(G(z)))."""
    fake = _clamp(np.asarray(fake_scores, dtype=np.float64))
    return float(np.mean(-np.log(fake)))


def median_bandwidth(combined: np.ndarray) -> float:
    """Median pairwise Euclidean distance of the pooled (flattened) sample."""
    sq = np.sum(combined**2, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * combined @ combined.T
    np.maximum(d2, 0.0, out=d2)
    iu = np.triu_indices(combined.shape[0], k=1)
    med = float(np.median(np.sqrt(d2[iu])))
    return med if med > 0 else 1.0


def mmd2(sample_a: np.ndarray, sample_b: np.ndarray, bandwidth: float | None = None) -> float:
    """Unbiased squared MMD with a Gaussian RBF kernel on flattened windows.

    Three-term form: within-a + within-b (diagonals excluded) minus twice the
    cross term. The bandwidth defaults to the median heuristic over the
    pooled sample.
    """
    a = np.asarray(sample_a, dtype=np.float64).reshape(len(sample_a), -1)
    b = np.asarray(sample_b, dtype=np.float64).reshape(len(sample_b), -1)
    n, m = a.shape[0], b.shape[0]
    if n < 2 or m < 2:
        raise ValueError("mmd2 needs at least 2 samples per side")
    if bandwidth is None:
        bandwidth = median_bandwidth(np.concatenate([a, b], axis=0))
    gamma = 1.0 / (2.0 * bandwidth**2)

    def kernel(x, y):
        d2 = (np.sum(x**2, axis=1)[:, None] + np.sum(y**2, axis=1)[None, :]
              - 2.0 * x @ y.T)
        return np.exp(-gamma * np.maximum(d2, 0.0))

    kaa = kernel(a, a)
    kbb = kernel(b, b)
    kab = kernel(a, b)
    term_a = (kaa.sum() - np.trace(kaa)) / (n * (n - 1))
    term_b = (kbb.sum() - np.trace(kbb)) / (m * (m - 1))
    term_ab = 2.0 * kab.sum() / (n * m)
    return float(term_a + term_b - term_ab)


def generate(model: GanModel, rng: np.random.Generator, count: int) -> np.ndarray:
    """Sample `count` generated windows of shape [s_w, data_dim]."""
    z = rng.standard_normal((count, model.s_w, model.latent_dim))
    out, _ = lstm_forward(model.generator, z, head_activation="tanh")
    return out


def discriminator_probs(disc: LstmStackParams, windows: np.ndarray) -> np.ndarray:
    """Per-timestep real-vs-fake probabilities, shape [batch, s_w]."""
    probs, _ = lstm_forward(disc, windows, head_activation="sigmoid")
    return probs[:, :, 0]


def _optimizer_state(kind: str, lr: float) -> AdamState | None:
    return AdamState(lr=lr) if kind == "adam" else None


def _apply_step(params: LstmStackParams, grads: LstmStackParams, kind: str,
                lr: float, state: AdamState | None, clip: float) -> LstmStackParams:
    g = clip_global_norm(grads.tensors(), clip)
    if kind == "adam":
        new = adam_step(params.tensors(), g, state)
    else:
        new = sgd_step(params.tensors(), g, lr)
    return params.replace_tensors(new)


def _d_train_step(gen, disc, real_batch, z, cfg, d_state):
    """One discriminator update; returns (new disc params, loss value)."""
    fake, _ = lstm_forward(gen, z, head_activation="tanh")
    p_real, cache_r = lstm_forward(disc, real_batch, head_activation="sigmoid")
    p_fake, cache_f = lstm_forward(disc, fake, head_activation="sigmoid")
    pr = p_real[:, -1, 0]
    pf = p_fake[:, -1, 0]
    loss = d_loss(pr, pf)
    mr, mf = len(pr), len(pf)
    dy_r = np.zeros_like(p_real)
    dy_r[:, -1, 0] = -1.0 / (mr * _clamp(pr))
    dy_f = np.zeros_like(p_fake)
    dy_f[:, -1, 0] = 1.0 / (mf * _clamp(1.0 - pf))
    grads_r, _ = lstm_backward(disc, cache_r, dy_r)
    grads_f, _ = lstm_backward(disc, cache_f, dy_f)
    grads = grads_r.replace_tensors(
        [a + b for a, b in zip(grads_r.tensors(), grads_f.tensors())])
    new_disc = _apply_step(disc, grads, cfg.disc_optimizer, cfg.disc_lr, d_state,
                           cfg.grad_clip)
    return new_disc, loss


def _g_train_step(gen, disc, z, cfg, g_state):
    """One generator update through a frozen discriminator."""
    fake, cache_g = lstm_forward(gen, z, head_activation="tanh")
    p_fake, cache_d = lstm_forward(disc, fake, head_activation="sigmoid")
    pf = p_fake[:, -1, 0]
    loss = g_loss(pf)
    dy = np.zeros_like(p_fake)
    dy[:, -1, 0] = -1.0 / (len(pf) * _clamp(pf))
    _, d_fake = lstm_backward(disc, cache_d, dy)
    grads_g, _ = lstm_backward(gen, cache_g, d_fake)
    new_gen = _apply_step(gen, grads_g, cfg.gen_optimizer, cfg.gen_lr, g_state,
                          cfg.grad_clip)
    return new_gen, loss


def train(windows: WindowSet, config: TrainConfig, rng: np.random.Generator,
          normalization: NormalizationState | None = None,
          pca: PcaState | None = None,
          progress=None) -> GanModel:
    """Algorithm-style alternating training: D step(s) then a G step per batch.

    Logs (epoch, d_loss, g_loss, mmd) per epoch, where the MMD compares a
    fresh generated batch against a fixed held-out slice of real windows.
    """
    if windows.count == 0:
        raise ValueError("no training windows")
    data = windows.windows
    m, s_w, dim = data.shape
    gen = init_params(rng, config.latent_dim, config.gen_hidden, config.gen_depth, dim)
    disc = init_params(rng, dim, config.disc_hidden, config.disc_depth, 1)
    g_state = _optimizer_state(config.gen_optimizer, config.gen_lr)
    d_state = _optimizer_state(config.disc_optimizer, config.disc_lr)
    eval_size = max(2, min(128, m))
    eval_real = data[rng.choice(m, size=eval_size, replace=False)]
    log: list[tuple[int, float, float, float]] = []
    model = GanModel(gen, disc, config.latent_dim, s_w, windows.step,
                     normalization, pca, log)

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(m)
        d_losses, g_losses = [], []
        for start in range(0, m, config.batch_size):
            batch_idx = order[start:start + config.batch_size]
            real_batch = data[batch_idx]
            bsz = len(batch_idx)
            for _ in range(config.d_steps):
                z = rng.standard_normal((bsz, s_w, config.latent_dim))
                disc, dl = _d_train_step(gen, disc, real_batch, z, config, d_state)
            z = rng.standard_normal((bsz, s_w, config.latent_dim))
            gen, gl = _g_train_step(gen, disc, z, config, g_state)
            if not (np.isfinite(dl) and np.isfinite(gl)):
                raise TrainingDiverged(
                    f"non-finite loss at epoch {epoch}, batch {start // config.batch_size}")
            d_losses.append(dl)
            g_losses.append(gl)
        model.generator = gen
        model.discriminator = disc
        fake_eval = generate(model, rng, eval_size)
        epoch_mmd = mmd2(fake_eval, eval_real)
        log.append((epoch, float(np.mean(d_losses)), float(np.mean(g_losses)), epoch_mmd))
        if progress is not None:
            progress(epoch, log[-1])
    return model
