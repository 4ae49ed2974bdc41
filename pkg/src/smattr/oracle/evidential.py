"""Dirichlet-evidence quantities computed from an evidence vector."""

import numpy as np

from ..exceptions import InvalidArgumentError


def _check_evidence(e):
    e = np.asarray(e, dtype=np.float64)
    if e.ndim != 1 or e.size < 2:
        raise InvalidArgumentError(f"evidence must be a vector of >= 2 categories, got shape {e.shape}")
    if not np.all(np.isfinite(e)) or np.any(e < 0):
        raise InvalidArgumentError("evidence must be finite and non-negative")
    return e


def dirichlet_strength(e):
    return float(np.sum(_check_evidence(e) + 1.0))


def confidence(e):
    """One minus the predictive uncertainty ``K / sum(e + 1)``."""
    e = _check_evidence(e)
    return 1.0 - e.size / float(np.sum(e + 1.0))


def class_probs(e):
    """Mean of the Dirichlet with concentrations ``e + 1``."""
    alpha = _check_evidence(e) + 1.0
    return alpha / alpha.sum()


def edl_loss(e, onehot):
    """Evidential log-loss ``sum_k y_k (log S - log(e_k + 1))``.

    Only evaluated, never optimised here.
    """
    e = _check_evidence(e)
    y = np.asarray(onehot, dtype=np.float64)
    if y.shape != e.shape or not np.all((y == 0) | (y == 1)) or y.sum() != 1:
        raise InvalidArgumentError("onehot must be a 0/1 vector with exactly one 1, matching evidence")
    strength = np.sum(e + 1.0)
    return float(np.sum(y * (np.log(strength) - np.log(e + 1.0))))
