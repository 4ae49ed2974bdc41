import numpy as np

from .. import _prng
from .base import Oracle


class SyntheticOracle(Oracle):
    """Seeded random-projection model standing in for a trained network.

    ``embed(x) = normalize(tanh(x_flat @ P))`` where ``P`` is the
    ``(H*W*C, feature_dim)`` projection, and
    ``evidence(x) = exp(head @ embed(x))`` with a ``(n_categories, feature_dim)``
    head. Both matrices are float32 draws from ``_prng.uniform_matrix`` (one
    stream per input pixel for ``P``, one per category for the head); all
    products accumulate in float64. An all-zero pre-activation embeds to the
    zero vector instead of being normalised.
    """

    def __init__(self, shape, seed=0, feature_dim=32, n_categories=10, zero_head=False):
        h, w, c = (int(v) for v in shape)
        if min(h, w, c) < 1 or feature_dim < 1 or n_categories < 2:
            raise ValueError("shape, feature_dim and n_categories must be positive (n_categories >= 2)")
        self.shape = (h, w, c)
        self.seed = int(seed)
        self.feature_dim = int(feature_dim)
        self.n_categories = int(n_categories)
        n_inputs = h * w * c
        self.projection = _prng.uniform_matrix(self.seed, _prng.TAG_EMBED, n_inputs, self.feature_dim)
        if zero_head:
            self.head = np.zeros((self.n_categories, self.feature_dim), dtype=np.float32)
        else:
            self.head = _prng.uniform_matrix(self.seed, _prng.TAG_HEAD, self.n_categories, self.feature_dim)
        self._projection64 = self.projection.astype(np.float64)
        self._head64 = self.head.astype(np.float64)

    def embed(self, image):
        x = self.check_input(image).reshape(-1).astype(np.float64)
        pre = np.tanh(x @ self._projection64)
        norm = np.sqrt(np.dot(pre, pre))
        if norm == 0.0:
            return np.zeros(self.feature_dim)
        return pre / norm

    def evidence(self, image):
        return np.exp(self._head64 @ self.embed(image))

    def class_weight(self, category):
        return self._head64[self.check_category(category)].copy()

    def __repr__(self):
        return (f"SyntheticOracle(shape={self.shape}, seed={self.seed}, "
                f"feature_dim={self.feature_dim}, n_categories={self.n_categories})")
