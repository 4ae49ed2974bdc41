"""Patch grids and saliency-guided division of an image into sub-regions.

An image of shape ``(H, W, C)`` is cut into an ``n x n`` grid of equal
patches numbered row-major. A division groups the patches into ``m``
elements of ``d = n*n/m`` patches each; the masked image of an element keeps
its patches and zeroes everything else, so the masked images of all elements
sum back to the original image.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidConfigError, InvalidGeometryError
from .validation import check_image, check_saliency, check_subset


@dataclass(frozen=True)
class PatchGrid:
    n: int
    patch_h: int
    patch_w: int

    def __post_init__(self):
        if self.n < 1 or self.patch_h < 1 or self.patch_w < 1:
            raise InvalidGeometryError(f"invalid patch grid {self}")

    @classmethod
    def for_shape(cls, height, width, n):
        n = int(n)
        if n < 1:
            raise InvalidGeometryError(f"grid size must be >= 1, got {n}")
        if height % n or width % n:
            raise InvalidGeometryError(
                f"image of size {height}x{width} is not divisible into a {n}x{n} grid"
            )
        return cls(n, height // n, width // n)

    @property
    def height(self):
        return self.n * self.patch_h

    @property
    def width(self):
        return self.n * self.patch_w

    @property
    def n_patches(self):
        return self.n * self.n

    def patch_slices(self, patch):
        i, j = divmod(int(patch), self.n)
        return (
            slice(i * self.patch_h, (i + 1) * self.patch_h),
            slice(j * self.patch_w, (j + 1) * self.patch_w),
        )


@dataclass(frozen=True)
class RegionSet:
    """A partition of the patch grid into ``m`` equally sized elements."""

    grid: PatchGrid
    elements: tuple
    labels: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        elements = tuple(tuple(int(p) for p in e) for e in self.elements)
        object.__setattr__(self, "elements", elements)
        n2 = self.grid.n_patches
        if not elements:
            raise InvalidConfigError("a region set needs at least one element")
        d = len(elements[0])
        if any(len(e) != d for e in elements) or d * len(elements) != n2:
            raise InvalidConfigError("elements must all hold n*n/m patches")
        flat = [p for e in elements for p in e]
        if sorted(flat) != list(range(n2)):
            raise InvalidConfigError("elements must partition the patch grid exactly")
        patch_owner = np.empty(n2, dtype=np.int64)
        for eid, e in enumerate(elements):
            patch_owner[list(e)] = eid
        owner_grid = patch_owner.reshape(self.grid.n, self.grid.n)
        labels = np.repeat(np.repeat(owner_grid, self.grid.patch_h, axis=0), self.grid.patch_w, axis=1)
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @property
    def m(self):
        return len(self.elements)

    @property
    def d(self):
        return len(self.elements[0])

    @property
    def n(self):
        return self.grid.n

    def pixel_mask(self, subset):
        """Boolean ``(H, W)`` mask of the pixels covered by ``subset``."""
        keep = np.zeros(self.m, dtype=bool)
        keep[list(check_subset(subset, self.m))] = True
        return keep[self.labels]

    def __eq__(self, other):
        if not isinstance(other, RegionSet):
            return NotImplemented
        return self.grid == other.grid and self.elements == other.elements

    def __hash__(self):
        return hash((self.grid, self.elements))


def pool_saliency(saliency, n):
    """Block-mean pool a saliency map down to an ``n x n`` importance grid."""
    sal = check_saliency(saliency)
    grid = PatchGrid.for_shape(sal.shape[0], sal.shape[1], n)
    blocks = sal.reshape(grid.n, grid.patch_h, grid.n, grid.patch_w)
    return blocks.mean(axis=(1, 3))


def rank_patches(importance):
    """Patch indices sorted by importance, highest first.

    Ties go to the lower row-major index.
    """
    flat = np.asarray(importance, dtype=np.float64).ravel()
    # lexsort: last key is primary
    return np.lexsort((np.arange(flat.size), -flat))


def divide(image, saliency, n, m):
    """Group patches into ``m`` elements by descending prior importance.

    Element ``l`` receives the patches ranked ``l*d`` to ``(l+1)*d - 1``.
    """
    img = check_image(image)
    sal = check_saliency(saliency)
    if sal.shape != img.shape[:2]:
        raise InvalidGeometryError(
            f"saliency map shape {sal.shape} does not match image shape {img.shape[:2]}"
        )
    n, m = int(n), int(m)
    grid = PatchGrid.for_shape(img.shape[0], img.shape[1], n)
    if m < 1 or grid.n_patches % m:
        raise InvalidConfigError(f"{n}x{n} patches cannot be split into {m} equal elements")
    d = grid.n_patches // m
    ranks = rank_patches(pool_saliency(sal, n))
    elements = [tuple(int(p) for p in ranks[l * d:(l + 1) * d]) for l in range(m)]
    return RegionSet(grid, tuple(elements))


def divide_uniform(image, n):
    """One element per patch, numbered row-major; no prior map involved."""
    img = check_image(image)
    grid = PatchGrid.for_shape(img.shape[0], img.shape[1], n)
    return RegionSet(grid, tuple((p,) for p in range(grid.n_patches)))


def apply_mask(image, subset, regions):
    """Keep the pixels of the elements in ``subset`` and zero the rest."""
    img = check_image(image)
    if img.shape[:2] != regions.labels.shape:
        raise InvalidGeometryError(
            f"image shape {img.shape[:2]} does not match region grid {regions.labels.shape}"
        )
    keep = regions.pixel_mask(subset)
    return np.where(keep[:, :, None], img, np.float32(0.0))


def element_importance(importance, regions):
    """Mean pooled importance of each element."""
    flat = np.asarray(importance, dtype=np.float64).ravel()
    return np.array([flat[list(e)].mean() for e in regions.elements])
