"""Insertion/deletion curves, their AUC, and highest-confidence-by-range."""

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .exceptions import FormatError, InvalidArgumentError
from .geometry import apply_mask
from .oracle.evidential import class_probs
from .validation import check_image, check_order

RANGES = (0.25, 0.5, 0.75, 1.0)
CURVE_KINDS = ("insertion", "deletion")


@dataclass(frozen=True)
class Curve:
    fractions: np.ndarray
    probabilities: np.ndarray
    kind: str
    category: int

    def __post_init__(self):
        f = np.asarray(self.fractions, dtype=np.float64)
        p = np.asarray(self.probabilities, dtype=np.float64)
        if self.kind not in CURVE_KINDS:
            raise InvalidArgumentError(f"unknown curve kind {self.kind!r}")
        if f.ndim != 1 or f.shape != p.shape or f.size < 2:
            raise InvalidArgumentError("a curve needs at least two (fraction, probability) points")
        if f[0] != 0.0 or f[-1] != 1.0 or np.any(np.diff(f) <= 0):
            raise InvalidArgumentError("curve fractions must increase strictly from 0 to 1")
        object.__setattr__(self, "fractions", f)
        object.__setattr__(self, "probabilities", p)

    @property
    def points(self):
        return list(zip(self.fractions.tolist(), self.probabilities.tolist()))


@dataclass(frozen=True)
class RangeReport:
    ranges: tuple
    best: tuple


def _probe(oracle, image, category):
    return float(class_probs(oracle.evidence(image))[category])


def _curve(image, regions, order, category, oracle, kind, n_jobs):
    img = check_image(image)
    order = check_order(order, regions.m)
    if not order:
        raise InvalidArgumentError("order must hold at least one element")
    category = oracle.check_category(category)
    k = len(order)
    if kind == "insertion":
        subsets = [order[:i] for i in range(k + 1)]
    else:
        everything = set(range(regions.m))
        subsets = [sorted(everything - set(order[:i])) for i in range(k + 1)]
    images = [apply_mask(img, s, regions) for s in subsets]
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            probs = list(pool.map(lambda x: _probe(oracle, x, category), images))
    else:
        probs = [_probe(oracle, x, category) for x in images]
    fractions = np.arange(k + 1) / k
    return Curve(fractions, np.array(probs), kind, category)


def insertion_curve(image, regions, order, category, oracle, n_jobs=1):
    """Probability of ``category`` as elements are revealed in ``order``, from black."""
    return _curve(image, regions, order, category, oracle, "insertion", n_jobs)


def deletion_curve(image, regions, order, category, oracle, n_jobs=1):
    """Probability of ``category`` as elements are zeroed in ``order``."""
    return _curve(image, regions, order, category, oracle, "deletion", n_jobs)


def auc(curve):
    """Trapezoidal area under the curve over fraction in [0, 1].

    Summed relative to the first point, which is equivalent because the
    fractions span exactly [0, 1]; a constant curve then integrates to its
    constant without rounding.
    """
    p, f = curve.probabilities, curve.fractions
    base = p[0]
    mids = (p[:-1] + p[1:]) / 2.0 - base
    return float(base + np.dot(np.diff(f), mids))


def highest_confidence_by_range(curve, ranges=RANGES):
    """Running maximum of the insertion curve up to each search fraction."""
    if curve.kind != "insertion":
        raise InvalidArgumentError("highest confidence is defined on insertion curves")
    best = []
    for r in ranges:
        inside = curve.fractions <= r + 1e-12
        best.append(float(curve.probabilities[inside].max()))
    return RangeReport(tuple(ranges), tuple(best))


def order_to_saliency(regions, order):
    """Rank map: the element ranked ``r`` of ``k`` gets ``(k - r) / k``, others 0."""
    order = check_order(order, regions.m)
    k = len(order)
    per_element = np.zeros(regions.m, dtype=np.float64)
    for r, e in enumerate(order):
        per_element[e] = (k - r) / k
    return per_element[regions.labels].astype(np.float32)


def write_curve_csv(curve, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["fraction", "probability"])
        for f, p in curve.points:
            writer.writerow([f"{f:.9g}", f"{p:.9g}"])


def read_curve_csv(path, kind="insertion", category=0):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["fraction", "probability"]:
        raise FormatError(f"{path}: expected header 'fraction,probability'")
    data = np.array([[float(a), float(b)] for a, b in rows[1:]])
    return Curve(data[:, 0], data[:, 1], kind, category)
