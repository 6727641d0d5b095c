"""Ingestion and preprocessing for multivariate time series.

Covers CSV loading, min-max scaling to [-1, 1], PCA projection, and sliding
window extraction, together with the inverse transforms where they exist.
All fitted states are immutable after construction and every operation is
pure, so they are safe to share across threads.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np


class DatasetError(ValueError):
    """Raised on malformed input files or inconsistent transform states."""


@dataclass(frozen=True)
class MultivariateSeries:
    """A [M timesteps x T variables] real matrix with optional binary labels."""

    values: np.ndarray
    labels: np.ndarray | None = None
    variable_names: tuple[str, ...] = ()
    timestep_unit: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if values.ndim != 2:
            raise DatasetError(f"series values must be 2-D, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DatasetError("series contains NaN or Inf values")
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            object.__setattr__(self, "labels", labels)
            if labels.shape != (values.shape[0],):
                raise DatasetError("labels length must equal the number of timesteps")
            if not np.all((labels == 0) | (labels == 1)):
                raise DatasetError("labels must be 0 or 1")
        if not self.variable_names:
            object.__setattr__(
                self, "variable_names",
                tuple(f"v{j}" for j in range(values.shape[1])))
        elif len(self.variable_names) != values.shape[1]:
            raise DatasetError("variable_names length must equal the number of variables")

    @property
    def num_timesteps(self) -> int:
        return self.values.shape[0]

    @property
    def num_variables(self) -> int:
        return self.values.shape[1]


def load_csv(path, label_column: str | None = None) -> MultivariateSeries:
    """Load a header-ed CSV of reals; an optional label column is split off."""
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        label_idx = None
        if label_column is not None and label_column in header:
            label_idx = header.index(label_column)
        names = [h for i, h in enumerate(header) if i != label_idx]
        rows: list[list[float]] = []
        labels: list[int] = []
        for rownum, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DatasetError(
                    f"{path}: row {rownum} has {len(row)} cells, expected {len(header)}")
            vals = []
            for colnum, cell in enumerate(row):
                if colnum == label_idx:
                    if cell.strip() not in ("0", "1", "0.0", "1.0"):
                        raise DatasetError(
                            f"{path}: row {rownum} label {cell!r} not in {{0,1}}")
                    labels.append(int(float(cell)))
                    continue
                try:
                    v = float(cell)
                except ValueError:
                    raise DatasetError(
                        f"{path}: non-numeric cell {cell!r} at row {rownum}, "
                        f"column {header[colnum]!r}") from None
                if not np.isfinite(v):
                    raise DatasetError(
                        f"{path}: non-finite value at row {rownum}, column {header[colnum]!r}")
                vals.append(v)
            rows.append(vals)
    if not rows:
        raise DatasetError(f"{path}: no data rows")
    values = np.array(rows, dtype=np.float64)
    return MultivariateSeries(
        values=values,
        labels=np.array(labels, dtype=np.int64) if label_idx is not None else None,
        variable_names=tuple(names),
    )


@dataclass(frozen=True)
class NormalizationState:
    """Per-variable min/max fitted on training data only."""

    vmin: np.ndarray
    vmax: np.ndarray

    def __post_init__(self):
        vmin = np.asarray(self.vmin, dtype=np.float64)
        vmax = np.asarray(self.vmax, dtype=np.float64)
        object.__setattr__(self, "vmin", vmin)
        object.__setattr__(self, "vmax", vmax)
        if vmin.shape != vmax.shape or vmin.ndim != 1:
            raise DatasetError("normalization min/max must be matching vectors")
        if np.any(vmax < vmin):
            raise DatasetError("normalization max must be >= min per variable")


def fit_normalizer(series: MultivariateSeries) -> NormalizationState:
    return NormalizationState(series.values.min(axis=0), series.values.max(axis=0))


def _check_vars(values: np.ndarray, expected: int, what: str) -> None:
    if values.shape[1] != expected:
        raise DatasetError(f"{what}: expected {expected} variables, got {values.shape[1]}")


def normalize_values(values: np.ndarray, state: NormalizationState) -> np.ndarray:
    """Map each variable to [-1, 1] via the fitted range; constant columns to 0.

    Test data is scaled with the training range, so it may leave [-1, 1].
    """
    _check_vars(values, state.vmin.size, "normalize")
    span = state.vmax - state.vmin
    safe = np.where(span == 0, 1.0, span)
    out = 2.0 * (values - state.vmin) / safe - 1.0
    return np.where(span == 0, 0.0, out)


def denormalize_values(values: np.ndarray, state: NormalizationState) -> np.ndarray:
    _check_vars(values, state.vmin.size, "denormalize")
    span = state.vmax - state.vmin
    out = (values + 1.0) / 2.0 * span + state.vmin
    return np.where(span == 0, state.vmin, out)


def normalize(series: MultivariateSeries, state: NormalizationState) -> MultivariateSeries:
    return MultivariateSeries(normalize_values(series.values, state),
                              labels=series.labels,
                              variable_names=series.variable_names,
                              timestep_unit=series.timestep_unit)


def denormalize(series: MultivariateSeries, state: NormalizationState) -> MultivariateSeries:
    return MultivariateSeries(denormalize_values(series.values, state),
                              labels=series.labels,
                              variable_names=series.variable_names,
                              timestep_unit=series.timestep_unit)


@dataclass(frozen=True)
class PcaState:
    """Mean-centered principal axes; rows of `components` are orthonormal."""

    mean: np.ndarray
    components: np.ndarray
    variance_ratio: np.ndarray

    def __post_init__(self):
        for name in ("mean", "components", "variance_ratio"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        k, t = self.components.shape
        if self.mean.shape != (t,) or self.variance_ratio.shape != (k,):
            raise DatasetError("inconsistent PCA state shapes")
        gram = self.components @ self.components.T
        if not np.allclose(gram, np.eye(k), atol=1e-8):
            raise DatasetError("PCA components are not orthonormal")
        if np.any(np.diff(self.variance_ratio) > 1e-12):
            raise DatasetError("variance ratios must be non-increasing")

    @property
    def k(self) -> int:
        return self.components.shape[0]


def fit_pca(series: MultivariateSeries, k: int) -> PcaState:
    """Top-k principal axes of the sample covariance via SVD."""
    values = series.values
    m, t = values.shape
    if k < 1 or k > t:
        raise DatasetError(f"k={k} must be in [1, {t}]")
    if m < 2:
        raise DatasetError("PCA needs at least 2 rows")
    mean = values.mean(axis=0)
    centered = values - mean
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    var = s * s
    total = var.sum()
    ratio = var / total if total > 0 else np.zeros_like(var)
    return PcaState(mean=mean, components=vt[:k], variance_ratio=ratio[:k])


def choose_pc_count(series: MultivariateSeries, variance_target: float = 0.995) -> int:
    """Smallest k whose cumulative explained variance reaches the target."""
    full = fit_pca(series, series.num_variables)
    cum = np.cumsum(full.variance_ratio)
    k = int(np.searchsorted(cum, variance_target - 1e-12) + 1)
    return min(k, series.num_variables)


def project_values(values: np.ndarray, pca: PcaState) -> np.ndarray:
    _check_vars(values, pca.mean.size, "project")
    return (values - pca.mean) @ pca.components.T


def reconstruct_values(projected: np.ndarray, pca: PcaState) -> np.ndarray:
    _check_vars(projected, pca.k, "reconstruct")
    return projected @ pca.components + pca.mean


def project(series: MultivariateSeries, pca: PcaState) -> MultivariateSeries:
    return MultivariateSeries(project_values(series.values, pca),
                              labels=series.labels,
                              variable_names=tuple(f"pc{j}" for j in range(pca.k)),
                              timestep_unit=series.timestep_unit)


def reconstruct(series: MultivariateSeries, pca: PcaState) -> MultivariateSeries:
    return MultivariateSeries(reconstruct_values(series.values, pca),
                              labels=series.labels,
                              timestep_unit=series.timestep_unit)


@dataclass(frozen=True)
class WindowSet:
    """All full sliding windows over a series; the ragged tail is dropped."""

    windows: np.ndarray
    window_size: int
    step: int
    origin_length: int
    start_indices: np.ndarray = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "windows", np.asarray(self.windows, dtype=np.float64))
        if self.start_indices is None:
            starts = np.arange(self.windows.shape[0]) * self.step
            object.__setattr__(self, "start_indices", starts)
        else:
            object.__setattr__(self, "start_indices",
                               np.asarray(self.start_indices, dtype=np.int64))

    @property
    def count(self) -> int:
        return self.windows.shape[0]

    @property
    def dim(self) -> int:
        return self.windows.shape[2]


def make_windows(values_or_series, s_w: int, s_s: int) -> WindowSet:
    """Cut windows of length s_w every s_s rows; m = floor((M - s_w)/s_s) + 1."""
    values = values_or_series.values if isinstance(values_or_series, MultivariateSeries) \
        else np.asarray(values_or_series, dtype=np.float64)
    if s_w < 1 or s_s < 1:
        raise DatasetError("window size and step must be >= 1")
    m_rows = values.shape[0]
    if m_rows < s_w:
        raise DatasetError(f"series length {m_rows} shorter than window size {s_w}")
    count = (m_rows - s_w) // s_s + 1
    starts = np.arange(count) * s_s
    windows = np.stack([values[s:s + s_w] for s in starts])
    return WindowSet(windows=windows, window_size=s_w, step=s_s,
                     origin_length=m_rows, start_indices=starts)
