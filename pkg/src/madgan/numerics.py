"""Low-level numerics: seeded RNG, activations, optimizers, finite differences.

Everything runs in float64; gradient checks at 1e-4 relative tolerance are
not reliable in float32.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    """Seeded PCG64 generator; identical seed gives an identical stream."""
    return np.random.Generator(np.random.PCG64(seed))


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sample_latent(rng: np.random.Generator, count: int, s_w: int, latent_dim: int) -> np.ndarray:
    """I.i.d. standard-normal latent sequences, shape [count, s_w, latent_dim]."""
    if count <= 0 or s_w <= 0 or latent_dim <= 0:
        raise ValueError("latent sample dimensions must be positive")
    return rng.standard_normal((count, s_w, latent_dim))


@dataclass
class AdamState:
    """Per-parameter-list Adam accumulators."""

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)

    def _ensure(self, params: list[np.ndarray]) -> None:
        if not self.m:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]


def adam_step(params: list[np.ndarray], grads: list[np.ndarray], state: AdamState) -> list[np.ndarray]:
    """One bias-corrected Adam update; returns new parameter arrays.

    A non-finite gradient skips the whole step (with a warning) so a single
    bad batch cannot poison the moment accumulators.
    """
    if len(params) != len(grads):
        raise ValueError("params/grads length mismatch")
    for p, g in zip(params, grads):
        if p.shape != g.shape:
            raise ValueError(f"shape mismatch {p.shape} vs {g.shape}")
    if not all(np.all(np.isfinite(g)) for g in grads):
        warnings.warn("non-finite gradient: Adam step skipped", RuntimeWarning)
        return [p.copy() for p in params]
    state._ensure(params)
    state.step += 1
    t = state.step
    b1, b2 = state.beta1, state.beta2
    out = []
    for i, (p, g) in enumerate(zip(params, grads)):
        state.m[i] = b1 * state.m[i] + (1 - b1) * g
        state.v[i] = b2 * state.v[i] + (1 - b2) * g * g
        m_hat = state.m[i] / (1 - b1**t)
        v_hat = state.v[i] / (1 - b2**t)
        out.append(p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps))
    return out


def sgd_step(params: list[np.ndarray], grads: list[np.ndarray], lr: float) -> list[np.ndarray]:
    """Plain gradient descent: p <- p - lr * g."""
    if len(params) != len(grads):
        raise ValueError("params/grads length mismatch")
    for p, g in zip(params, grads):
        if p.shape != g.shape:
            raise ValueError(f"shape mismatch {p.shape} vs {g.shape}")
    if not all(np.all(np.isfinite(g)) for g in grads):
        warnings.warn("non-finite gradient: SGD step skipped", RuntimeWarning)
        return [p.copy() for p in params]
    return [p - lr * g for p, g in zip(params, grads)]


def clip_global_norm(grads: list[np.ndarray], max_norm: float) -> list[np.ndarray]:
    """Rescale the gradient list so its joint L2 norm is at most max_norm."""
    total = np.sqrt(sum(float(np.sum(g * g)) for g in grads))
    if total <= max_norm or total == 0.0:
        return grads
    scale = max_norm / total
    return [g * scale for g in grads]


def finite_diff_grad(f, params: list[np.ndarray], h: float = 1e-5) -> list[np.ndarray]:
    """Central-difference gradient of a scalar function of a parameter list."""
    grads = []
    for idx, p in enumerate(params):
        g = np.zeros_like(p)
        flat = p.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            fp = f(params)
            flat[i] = orig - h
            fm = f(params)
            flat[i] = orig
            if not (np.isfinite(fp) and np.isfinite(fm)):
                raise FloatingPointError(f"non-finite loss during finite differences at param {idx}")
            gflat[i] = (fp - fm) / (2 * h)
        grads.append(g)
    return grads
