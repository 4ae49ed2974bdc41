"""The four sub-scores and their weighted sum.

All set arguments are collections of element ids of a ``RegionSet``. The
"union" of a subset is the image with only those elements unmasked; its
"complement" keeps every other element.
"""

import math
import threading
from collections import OrderedDict
from dataclasses import astuple, dataclass

import numpy as np

from .exceptions import InvalidArgumentError
from .geometry import apply_mask
from .oracle.base import TargetFeature, target_feature
from .oracle.evidential import confidence
from .validation import check_image, check_subset


@dataclass(frozen=True)
class Lambdas:
    conf: float = 1.0
    eff: float = 1.0
    cons: float = 1.0
    colla: float = 1.0

    def __post_init__(self):
        for v in astuple(self):
            if not math.isfinite(v) or v < 0:
                raise InvalidArgumentError(f"score weights must be finite and >= 0, got {astuple(self)}")

    @classmethod
    def coerce(cls, value):
        if value is None:
            return cls()
        if isinstance(value, cls):
            return value
        if isinstance(value, dict):
            return cls(**{k: float(v) for k, v in value.items()})
        values = [float(v) for v in value]
        if len(values) != 4:
            raise InvalidArgumentError(f"expected four score weights, got {len(values)}")
        return cls(*values)

    def as_list(self):
        return list(astuple(self))


@dataclass(frozen=True)
class ScoreBreakdown:
    conf: float
    eff: float
    cons: float
    colla: float
    total: float

    def as_dict(self):
        return {"conf": self.conf, "eff": self.eff, "cons": self.cons,
                "colla": self.colla, "total": self.total}


def cosine_similarity(a, b):
    """Cosine similarity; 0 when either vector is zero."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidArgumentError(f"feature dimension mismatch: {a.shape} vs {b.shape}")
    na = math.sqrt(float(np.dot(a, a)))
    nb = math.sqrt(float(np.dot(b, b)))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def cosine_distance(a, b):
    return 1.0 - cosine_similarity(a, b)


def pairwise_cosine_distance(features):
    """``(m, m)`` cosine distances between the rows of ``features``."""
    f = np.asarray(features, dtype=np.float64)
    norms = np.sqrt(np.einsum("ij,ij->i", f, f))
    safe = np.where(norms > 0, norms, 1.0)
    unit = f / safe[:, None]
    sim = np.clip(unit @ unit.T, -1.0, 1.0)
    zero = norms == 0
    sim[zero, :] = 0.0
    sim[:, zero] = 0.0
    return 1.0 - sim


class ScoreContext:
    """Everything the objective needs for one image: regions, oracle, target, weights.

    Element embeddings are computed once on first use. Union evaluations are
    memoised in a bounded cache keyed by the sorted subset.
    """

    def __init__(self, image, regions, oracle, target=None, lambdas=None, cache_size=100_000):
        self.image = check_image(image)
        self.regions = regions
        self.oracle = oracle
        if target is None:
            target = target_feature(oracle, "image", image=self.image)
        elif not isinstance(target, TargetFeature):
            target = TargetFeature("vector", np.asarray(target, dtype=np.float64))
        self.target = target
        self.lambdas = Lambdas.coerce(lambdas)
        self.cache_size = int(cache_size)
        self._cache = OrderedDict()
        self._lock = threading.Lock()
        self._element_features = None
        self._distances = None

    @property
    def m(self):
        return self.regions.m

    def masked(self, subset):
        return apply_mask(self.image, subset, self.regions)

    @property
    def element_features(self):
        if self._element_features is None:
            feats = np.array([self.oracle.embed(self.masked((i,))) for i in range(self.m)])
            with self._lock:
                if self._element_features is None:
                    self._element_features = feats
                    self._distances = pairwise_cosine_distance(feats)
        return self._element_features

    @property
    def distances(self):
        if self._distances is None:
            self.element_features
        return self._distances

    def _union_terms(self, key):
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        union = self.masked(key)
        members = set(key)
        complement = self.masked(tuple(i for i in range(self.m) if i not in members))
        f_union = self.oracle.embed(union)
        conf = confidence(self.oracle.evidence(union))
        cons = cosine_similarity(f_union, self.target.vector)
        colla = 1.0 - cosine_similarity(self.oracle.embed(complement), self.target.vector)
        terms = (conf, cons, colla)
        if self.cache_size > 0:
            with self._lock:
                self._cache[key] = terms
                if len(self._cache) > self.cache_size:
                    self._cache.popitem(last=False)
        return terms

    def objective(self, subset):
        key = check_subset(subset, self.m)
        conf, cons, colla = self._union_terms(key)
        eff = _effectiveness_from_distances(key, self.distances)
        lam = self.lambdas
        total = lam.conf * conf + lam.eff * eff + lam.cons * cons + lam.colla * colla
        return ScoreBreakdown(conf, eff, cons, colla, total)

    def value(self, subset):
        return self.objective(subset).total

    def with_lambdas(self, lambdas):
        """A context sharing this one's oracle, target and element cache."""
        other = ScoreContext.__new__(ScoreContext)
        other.__dict__.update(self.__dict__)
        other.lambdas = Lambdas.coerce(lambdas)
        return other


def _effectiveness_from_distances(key, distances):
    if not key:
        return 0.0
    if len(key) == 1:
        return 1.0
    sub = distances[np.ix_(key, key)].copy()
    np.fill_diagonal(sub, np.inf)
    return float(sub.min(axis=1).sum())


def effectiveness_marginal(alpha, subset, ctx):
    """Smallest cosine distance from element ``alpha`` to the elements of ``subset``.

    An empty ``subset`` scores 1.
    """
    key = check_subset(subset, ctx.m)
    alpha = int(alpha)
    if not 0 <= alpha < ctx.m:
        raise InvalidArgumentError(f"element {alpha} outside [0, {ctx.m})")
    if alpha in key:
        raise InvalidArgumentError(f"element {alpha} is already in the subset")
    if not key:
        return 1.0
    return float(ctx.distances[alpha, list(key)].min())


def effectiveness(subset, ctx):
    """Sum over members of each one's smallest distance to the other members."""
    return _effectiveness_from_distances(check_subset(subset, ctx.m), ctx.distances)


def consistency(subset, ctx):
    key = check_subset(subset, ctx.m)
    return cosine_similarity(ctx.oracle.embed(ctx.masked(key)), ctx.target.vector)


def collaboration(subset, ctx):
    key = set(check_subset(subset, ctx.m))
    rest = [i for i in range(ctx.m) if i not in key]
    return 1.0 - cosine_similarity(ctx.oracle.embed(ctx.masked(rest)), ctx.target.vector)


def confidence_score(subset, ctx):
    key = check_subset(subset, ctx.m)
    return confidence(ctx.oracle.evidence(ctx.masked(key)))


def objective(subset, ctx):
    return ctx.objective(subset)
