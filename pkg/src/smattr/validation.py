"""Input validation helpers in the spirit of ``sklearn.utils.check_array``."""

import numpy as np

from .exceptions import InvalidArgumentError, InvalidGeometryError


def check_image(image, *, copy=False):
    """Return ``image`` as a float32 ``(H, W, C)`` array with values in [0, 1].

    2-D input is treated as a single-channel image.
    """
    arr = np.array(image, dtype=np.float32, copy=copy) if copy else np.asarray(image, dtype=np.float32)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3:
        raise InvalidGeometryError(f"image must be 2-D or 3-D, got shape {arr.shape}")
    if arr.shape[2] not in (1, 3):
        raise InvalidGeometryError(f"image must have 1 or 3 channels, got {arr.shape[2]}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidGeometryError(f"empty image of shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("image contains non-finite values")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise InvalidArgumentError("image values must lie in [0, 1]")
    return arr


def check_saliency(saliency):
    arr = np.asarray(saliency, dtype=np.float64)
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[:, :, 0]
    if arr.ndim != 2:
        raise InvalidGeometryError(f"saliency map must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("saliency map contains non-finite values")
    if arr.min() < 0.0:
        raise InvalidArgumentError("saliency map values must be non-negative")
    return arr


def check_subset(subset, m):
    """Return ``subset`` as a sorted tuple of distinct element ids in [0, m)."""
    ids = tuple(sorted({int(i) for i in subset}))
    if ids and (ids[0] < 0 or ids[-1] >= m):
        raise InvalidArgumentError(f"element ids must lie in [0, {m}), got {list(subset)}")
    return ids


def check_order(order, m):
    order = [int(i) for i in order]
    if len(set(order)) != len(order):
        raise InvalidArgumentError("order contains duplicate element ids")
    if any(i < 0 or i >= m for i in order):
        raise InvalidArgumentError(f"order ids must lie in [0, {m})")
    return order
