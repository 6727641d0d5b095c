"""MAD-GAN style multivariate time-series anomaly detection.

Train an LSTM generator/discriminator pair adversarially on normal data,
then score test timesteps by combining discriminator cross-entropy with
latent-inversion reconstruction residuals.
"""

from .dataset import (MultivariateSeries, NormalizationState, PcaState,
                      WindowSet, fit_normalizer, fit_pca, load_csv,
                      make_windows, normalize, project)
from .detector import InversionConfig, LabelVector, ScoreSeries, detect
from .estimators import KnnDistanceDetector, MadGanDetector, PcaReconstructionDetector
from .gan import GanModel, TrainConfig, generate, mmd2, train

__all__ = [
    "MultivariateSeries", "NormalizationState", "PcaState", "WindowSet",
    "fit_normalizer", "fit_pca", "load_csv", "make_windows", "normalize",
    "project", "InversionConfig", "LabelVector", "ScoreSeries", "detect",
    "GanModel", "TrainConfig", "generate", "mmd2", "train",
    "MadGanDetector", "PcaReconstructionDetector", "KnnDistanceDetector",
]

__version__ = "0.1.0"
