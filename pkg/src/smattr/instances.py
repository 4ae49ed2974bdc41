"""Seeded synthetic attribution problems for self-tests and benchmarks."""

from dataclasses import dataclass

import numpy as np

from .geometry import divide, divide_uniform
from .oracle import SyntheticOracle, target_feature
from .scores import ScoreContext


@dataclass
class Instance:
    seed: int
    image: np.ndarray
    saliency: np.ndarray
    regions: object
    oracle: SyntheticOracle

    def context(self, lambdas=None, target_mode="image", category=None, cache_size=100_000):
        target = target_feature(self.oracle, target_mode, image=self.image, category=category)
        return ScoreContext(self.image, self.regions, self.oracle, target, lambdas, cache_size)

    @property
    def predicted_category(self):
        return int(np.argmax(self.oracle.predict_proba(self.image)))


def synthetic_image(rng, height, width, channels):
    """Smooth background plus one bright elliptical blob, values in [0, 1]."""
    yy, xx = np.mgrid[0:height, 0:width] / np.array([max(height - 1, 1), max(width - 1, 1)])[:, None, None]
    cy, cx = rng.uniform(0.25, 0.75, size=2)
    sy, sx = rng.uniform(0.12, 0.3, size=2)
    blob = np.exp(-(((yy - cy) / sy) ** 2 + ((xx - cx) / sx) ** 2))
    img = np.empty((height, width, channels))
    for c in range(channels):
        fy, fx, phase = rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0), rng.uniform(0, 2 * np.pi)
        background = 0.25 + 0.15 * np.sin(2 * np.pi * (fy * yy + fx * xx) + phase)
        img[:, :, c] = background * (1 - blob) + rng.uniform(0.6, 1.0) * blob
    img += rng.normal(0.0, 0.03, size=img.shape)
    return np.clip(img, 0.0, 1.0).astype(np.float32), blob


def make_instance(seed, n=4, m=None, patch=4, channels=3, feature_dim=16, categories=5, uniform=False):
    """Random image, blob-centred prior saliency map, division and synthetic oracle.

    ``m`` defaults to ``n*n`` (one patch per element).
    """
    rng = np.random.default_rng(seed)
    size = n * patch
    image, blob = synthetic_image(rng, size, size, channels)
    saliency = np.clip(blob + rng.uniform(0.0, 0.3, size=blob.shape), 0.0, None).astype(np.float32)
    if uniform:
        regions = divide_uniform(image, n)
    else:
        regions = divide(image, saliency, n, n * n if m is None else m)
    oracle = SyntheticOracle(image.shape, seed=seed, feature_dim=feature_dim, n_categories=categories)
    return Instance(seed, image, saliency, regions, oracle)
