"""scikit-learn style front end over division, scoring and greedy search."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import InvalidArgumentError, InvalidConfigError
from .geometry import divide, divide_uniform
from .metrics import auc, deletion_curve, insertion_curve, order_to_saliency
from .oracle import target_feature
from .scores import Lambdas, ScoreContext
from .search import greedy_maximize
from .validation import check_image, check_saliency


def attribute(image, oracle, saliency=None, n=10, m=25, k=None, lambdas=None, division="prior",
              target_mode="image", category=None, mode="greedy", n_jobs=1):
    """Divide ``image`` and greedily order its elements.

    Returns ``(regions, context, result)``.
    """
    image = check_image(image)
    if division == "uniform":
        regions = divide_uniform(image, n)
    elif division == "prior":
        if saliency is None:
            raise InvalidArgumentError("prior division needs a saliency map")
        regions = divide(image, saliency, n, m)
    else:
        raise InvalidConfigError(f"unknown division {division!r}")
    target = target_feature(oracle, target_mode, image=image, category=category)
    ctx = ScoreContext(image, regions, oracle, target, Lambdas.coerce(lambdas))
    result = greedy_maximize(ctx, regions.m if k is None else k, n_jobs=n_jobs, mode=mode)
    return regions, ctx, result


class SubmodularAttribution(TransformerMixin, BaseEstimator):
    """Attribute one image's prediction to an ordered set of masked sub-regions.

    Parameters
    ----------
    oracle : Oracle
        Model providing embeddings, evidence and class weights.
    n_patches : int
        Patches per image side.
    n_elements : int
        Number of sub-regions; must divide ``n_patches ** 2``. Ignored when
        ``division="uniform"`` (one element per patch).
    k : int or None
        Elements to select; ``None`` orders all of them.
    lambdas : sequence of four floats
        Weights of the confidence, effectiveness, consistency and
        collaboration scores.
    division : {"prior", "uniform"}
    target : {"image", "category"}
        Target feature: embedding of the full image, or the class weight of
        ``y`` passed to ``fit``.
    search : {"greedy", "lazy"}
    n_jobs : int
        Concurrent candidate evaluations per greedy step.

    Attributes
    ----------
    regions_ : RegionSet
    result_ : AttributionResult
    order_ : list of int
    """

    def __init__(self, oracle=None, n_patches=10, n_elements=25, k=None, lambdas=(1.0, 1.0, 1.0, 1.0),
                 division="prior", target="image", search="greedy", n_jobs=1):
        self.oracle = oracle
        self.n_patches = n_patches
        self.n_elements = n_elements
        self.k = k
        self.lambdas = lambdas
        self.division = division
        self.target = target
        self.search = search
        self.n_jobs = n_jobs

    def fit(self, X, y=None, saliency=None):
        """Run the search on image ``X``; ``y`` is the category to explain, if any."""
        if self.oracle is None:
            raise InvalidConfigError("SubmodularAttribution needs an oracle")
        image = check_image(X)
        if saliency is not None:
            saliency = check_saliency(saliency)
        if self.target == "category" and y is None:
            raise InvalidArgumentError("target='category' needs y")
        regions, ctx, result = attribute(
            image, self.oracle, saliency, n=self.n_patches, m=self.n_elements, k=self.k,
            lambdas=self.lambdas, division=self.division, target_mode=self.target,
            category=y, mode=self.search, n_jobs=self.n_jobs,
        )
        self.image_ = image
        self.regions_ = regions
        self.context_ = ctx
        self.result_ = result
        self.order_ = list(result.order)
        self.category_ = None if y is None else int(y)
        return self

    def transform(self, X):
        """Rank saliency map of the fitted image (``X`` must be that image)."""
        check_is_fitted(self, "result_")
        image = check_image(X)
        if image.shape != self.image_.shape or not np.array_equal(image, self.image_):
            raise InvalidArgumentError("transform expects the image passed to fit")
        return order_to_saliency(self.regions_, self.order_)

    def _probe(self, y):
        if y is not None:
            return int(y)
        if self.category_ is not None:
            return self.category_
        return int(np.argmax(self.oracle.predict_proba(self.image_)))

    def insertion_auc(self, y=None):
        check_is_fitted(self, "result_")
        return auc(insertion_curve(self.image_, self.regions_, self.order_, self._probe(y), self.oracle))

    def deletion_auc(self, y=None):
        check_is_fitted(self, "result_")
        return auc(deletion_curve(self.image_, self.regions_, self.order_, self._probe(y), self.oracle))

    def score(self, X, y=None):
        """Insertion AUC of the fitted ordering for category ``y``."""
        self.transform(X)
        return self.insertion_auc(y)
