"""affectbench: corruption-robustness evaluation for arousal-valence predictors.

Applies reproducible image degradations (lighter, darker, gaussian, noise,
motion) to face-crop frame sequences, runs any predictor speaking the
affect-predict/1 protocol over original and corrupted frames, and reports
agreement via signed deviations, trend frequencies, and the concordance
correlation coefficient.
"""

__version__ = "0.1.0"

from .bridge import AffectSample, AffectSequence, run_predictor
from .corruptions import (
    CorruptionSpec,
    adjust_brightness,
    gaussian_blur,
    horizontal_motion,
    salt_pepper,
)
from .corruptions import apply as apply_corruption
from .errors import AffectbenchError, FrameDecodeError, PredictorError, ValidationError
from .frames import BoundingBox, Frame, FrameRef, crop, load_frame, save_frame
from .metrics import (
    AgreementStats,
    agreement_stats,
    aggregate,
    align,
    ccc,
    deviation,
    pearson,
    trend_frequency,
)
from .mock_predictor import mock_predict
from .rng import derive_seed

__all__ = [
    "__version__",
    "AffectbenchError",
    "AffectSample",
    "AffectSequence",
    "AgreementStats",
    "BoundingBox",
    "CorruptionSpec",
    "Frame",
    "FrameDecodeError",
    "FrameRef",
    "PredictorError",
    "ValidationError",
    "adjust_brightness",
    "aggregate",
    "agreement_stats",
    "align",
    "apply_corruption",
    "ccc",
    "crop",
    "derive_seed",
    "deviation",
    "gaussian_blur",
    "horizontal_motion",
    "load_frame",
    "mock_predict",
    "pearson",
    "run_predictor",
    "salt_pepper",
    "save_frame",
    "trend_frequency",
]
