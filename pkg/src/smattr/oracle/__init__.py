"""Model oracles: the synthetic in-process backend and the external protocol."""

from .base import TARGET_MODES, Oracle, TargetFeature, target_feature
from .evidential import class_probs, confidence, dirichlet_strength, edl_loss
from .protocol import ExternalOracle
from .synthetic import SyntheticOracle

__all__ = [
    "ExternalOracle",
    "Oracle",
    "SyntheticOracle",
    "TARGET_MODES",
    "TargetFeature",
    "class_probs",
    "confidence",
    "dirichlet_strength",
    "edl_loss",
    "target_feature",
]
