"""Flat run configuration with a line-oriented ``key = value`` file format.

Unknown keys are rejected with the offending line number; missing keys fall
back to documented defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

from .detector import InversionConfig
from .gan import TrainConfig


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    # windowing
    s_w: int = 30
    s_s: int = 10
    # dimensionality reduction: "auto" picks the smallest k reaching
    # variance_target, "none" disables PCA, an integer pins k
    pc: str = "auto"
    variance_target: float = 0.995
    # model
    latent_dim: int = 15
    gen_hidden: int = 100
    gen_depth: int = 3
    disc_hidden: int = 100
    disc_depth: int = 1
    # training
    epochs: int = 100
    batch_size: int = 64
    d_steps: int = 1
    gen_optimizer: str = "adam"
    gen_lr: float = 1e-3
    disc_optimizer: str = "sgd"
    disc_lr: float = 0.01
    grad_clip: float = 5.0
    seed: int = 0
    # scoring
    lam: float = 0.5
    tau: str = "q0.99"
    inv_iterations: int = 50
    inv_lr: float = 0.01
    inv_restarts: int = 3
    similarity: str = "cosine"
    # ingestion
    label_column: str = "label"

    def train_config(self) -> TrainConfig:
        return TrainConfig(epochs=self.epochs, batch_size=self.batch_size,
                           d_steps=self.d_steps, latent_dim=self.latent_dim,
                           gen_hidden=self.gen_hidden, gen_depth=self.gen_depth,
                           disc_hidden=self.disc_hidden, disc_depth=self.disc_depth,
                           gen_optimizer=self.gen_optimizer, gen_lr=self.gen_lr,
                           disc_optimizer=self.disc_optimizer, disc_lr=self.disc_lr,
                           grad_clip=self.grad_clip, seed=self.seed)

    def inversion_config(self) -> InversionConfig:
        return InversionConfig(iterations=self.inv_iterations,
                               learning_rate=self.inv_lr,
                               restarts=self.inv_restarts,
                               similarity=self.similarity)

    def pc_count(self, num_variables: int) -> int | None:
        """Resolve the pc setting to a component count (or None for no PCA)."""
        if self.pc == "none":
            return None
        if self.pc == "auto":
            return -1  # caller picks via choose_pc_count
        try:
            k = int(self.pc)
        except ValueError:
            raise ConfigError(f"pc must be 'auto', 'none', or an integer, got {self.pc!r}")
        if k < 1 or k > num_variables:
            raise ConfigError(f"pc={k} out of range [1, {num_variables}]")
        return k


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, raw: str, lineno: int | None = None):
    typ = _FIELD_TYPES[key]
    where = f" (line {lineno})" if lineno is not None else ""
    try:
        if typ == "int":
            return int(raw)
        if typ == "float":
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"bad value {raw!r} for key {key!r}{where}") from None


def apply_setting(config: RunConfig, key: str, raw: str, lineno: int | None = None) -> None:
    if key not in _FIELD_TYPES:
        where = f" (line {lineno})" if lineno is not None else ""
        raise ConfigError(f"unknown config key {key!r}{where}")
    setattr(config, key, _coerce(key, raw, lineno))


def parse_config_file(path) -> RunConfig:
    config = RunConfig()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}: line {lineno} is not 'key = value'")
            key, _, raw = stripped.partition("=")
            apply_setting(config, key.strip(), raw.strip(), lineno)
    return config


def config_to_text(config: RunConfig) -> str:
    lines = [f"{f.name} = {getattr(config, f.name)}" for f in fields(RunConfig)]
    return "\n".join(lines) + "\n"


def config_from_text(text: str) -> RunConfig:
    config = RunConfig()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, _, raw = stripped.partition("=")
        apply_setting(config, key.strip(), raw.strip(), lineno)
    return config
