from dataclasses import dataclass

import numpy as np

from ..exceptions import InvalidArgumentError, OracleInputError
from .evidential import class_probs


class Oracle:
    """Model contract used by the scores and metrics.

    Subclasses set ``shape`` (H, W, C), ``feature_dim`` and ``n_categories``
    and implement ``embed``, ``evidence`` and ``class_weight``. Every method
    must be deterministic for a given input.
    """

    shape = None
    feature_dim = None
    n_categories = None

    def embed(self, image):
        raise NotImplementedError

    def evidence(self, image):
        raise NotImplementedError

    def class_weight(self, category):
        raise NotImplementedError

    def predict_proba(self, image):
        return class_probs(self.evidence(image))

    def check_input(self, image):
        arr = np.asarray(image, dtype=np.float32)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if tuple(arr.shape) != tuple(self.shape):
            raise OracleInputError(f"oracle expects images of shape {tuple(self.shape)}, got {arr.shape}")
        return arr

    def check_category(self, category):
        category = int(category)
        if not 0 <= category < self.n_categories:
            raise InvalidArgumentError(f"category {category} outside [0, {self.n_categories})")
        return category

    def close(self):
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


@dataclass(frozen=True)
class TargetFeature:
    mode: str
    vector: np.ndarray


TARGET_MODES = ("image", "category")


def target_feature(oracle, mode, image=None, category=None):
    """Semantic target: the embedding of ``image`` or a class weight vector."""
    if mode in ("image", "from-image"):
        if image is None:
            raise InvalidArgumentError("target mode 'image' needs an image")
        return TargetFeature("image", np.asarray(oracle.embed(image), dtype=np.float64))
    if mode in ("category", "from-category"):
        if category is None:
            raise InvalidArgumentError("target mode 'category' needs a category index")
        category = oracle.check_category(category)
        return TargetFeature("category", np.asarray(oracle.class_weight(category), dtype=np.float64))
    raise InvalidArgumentError(f"unknown target mode {mode!r}; expected one of {TARGET_MODES}")
