"""Synthetic CPS-like data: coupled sinusoids plus injectable labeled attacks.

Stands in for access-restricted plant datasets so the whole pipeline can be
exercised end to end at desk scale.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .dataset import MultivariateSeries

ATTACK_KINDS = ("spike", "stuck", "drift")


@dataclass(frozen=True)
class AttackSpec:
    kind: str
    variable: int
    start: int
    duration: int
    magnitude: float

    def __post_init__(self):
        if self.kind not in ATTACK_KINDS:
            raise ValueError(f"attack kind must be one of {ATTACK_KINDS}")
        if self.duration < 1:
            raise ValueError("attack duration must be >= 1")
        if self.start < 0:
            raise ValueError("attack start must be >= 0")

    @property
    def end(self) -> int:
        return self.start + self.duration


@dataclass
class SynthConfig:
    num_variables: int = 2
    length: int = 2000
    frequencies: np.ndarray | None = None   # cycles per timestep, one per variable
    phases: np.ndarray | None = None
    amplitudes: np.ndarray | None = None
    coupling: np.ndarray | None = None      # [V x V]; row v mixes the sinusoid bases
    noise_std: float = 0.05

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("length must be positive")
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")
        v = self.num_variables
        if self.frequencies is None:
            self.frequencies = 1.0 / (40.0 + 17.0 * np.arange(v))
        if self.phases is None:
            self.phases = np.linspace(0.0, np.pi, v, endpoint=False)
        if self.amplitudes is None:
            self.amplitudes = np.ones(v)
        if self.coupling is None:
            self.coupling = np.eye(v)
        for name in ("frequencies", "phases", "amplitudes"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            setattr(self, name, arr)
            if arr.shape != (v,):
                raise ValueError(f"{name} must have one entry per variable")
        self.coupling = np.asarray(self.coupling, dtype=np.float64)
        if self.coupling.shape != (v, v):
            raise ValueError("coupling must be a [V x V] matrix")


def generate_normal(config: SynthConfig, rng: np.random.Generator) -> MultivariateSeries:
    """Coupled noisy sinusoids; labels all zero."""
    t = np.arange(config.length)[:, None]
    base = config.amplitudes * np.sin(2.0 * np.pi * config.frequencies * t + config.phases)
    values = base @ config.coupling.T
    if config.noise_std > 0:
        values = values + rng.normal(0.0, config.noise_std, size=values.shape)
    return MultivariateSeries(values=values,
                              labels=np.zeros(config.length, dtype=np.int64))


def inject_attacks(series: MultivariateSeries, attacks: list[AttackSpec],
                   rng: np.random.Generator | None = None) -> MultivariateSeries:
    """Apply attack intervals and set labels to 1 exactly on them.

    Overlapping attacks on the same variable are rejected; values outside
    attacked intervals are untouched.
    """
    values = series.values.copy()
    n, v = values.shape
    per_var: dict[int, list[AttackSpec]] = {}
    for a in attacks:
        if a.variable < 0 or a.variable >= v:
            raise ValueError(f"attack targets variable {a.variable}, series has {v}")
        if a.end > n:
            raise ValueError(f"attack [{a.start}, {a.end}) exceeds series length {n}")
        for other in per_var.get(a.variable, []):
            if a.start < other.end and other.start < a.end:
                raise ValueError(
                    f"overlapping attacks on variable {a.variable}: "
                    f"[{other.start},{other.end}) and [{a.start},{a.end})")
        per_var.setdefault(a.variable, []).append(a)
    labels = np.zeros(n, dtype=np.int64)
    for a in attacks:
        sl = slice(a.start, a.end)
        if a.kind == "spike":
            values[sl, a.variable] += a.magnitude
        elif a.kind == "stuck":
            values[sl, a.variable] = values[a.start, a.variable]
        else:  # drift
            ramp = np.linspace(0.0, a.magnitude, a.duration)
            values[sl, a.variable] += ramp
        labels[sl] = 1
    return MultivariateSeries(values=values, labels=labels,
                              variable_names=series.variable_names,
                              timestep_unit=series.timestep_unit)


def default_coupling(num_variables: int, strength: float = 0.3) -> np.ndarray:
    """Identity plus a uniform cross-variable mix, mimicking correlated sensors."""
    v = num_variables
    return np.eye(v) + strength * (np.ones((v, v)) - np.eye(v)) / max(v - 1, 1)


def write_csv(series: MultivariateSeries, path, label_column: str | None = "label") -> None:
    """Emit the same CSV format the loader ingests, closing the loop."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        header = list(series.variable_names)
        if label_column is not None and series.labels is not None:
            header.append(label_column)
        writer.writerow(header)
        for i in range(series.num_timesteps):
            row = [repr(float(x)) for x in series.values[i]]
            if label_column is not None and series.labels is not None:
                row.append(str(int(series.labels[i])))
            writer.writerow(row)
