"""Greedy maximisation of the set objective, plus brute force and property checks.

Functions here accept any "problem" exposing ``m`` and ``objective(subset)``
returning an object with a ``total`` attribute, so test doubles plug in
directly (see ``SetFunction``).
"""

import heapq
import itertools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .exceptions import BudgetExceededError, InvalidConfigError
from .scores import ScoreBreakdown, effectiveness_marginal

VIOLATION_TOL = 1e-6
GREEDY_MODES = ("greedy", "lazy")


class SetFunction:
    """Adapter turning ``func(subset) -> float`` into a search problem."""

    def __init__(self, func, m):
        self.func = func
        self.m = int(m)

    def objective(self, subset):
        total = float(self.func(tuple(sorted(subset))))
        return ScoreBreakdown(total, 0.0, 0.0, 0.0, total)

    def value(self, subset):
        return self.objective(subset).total


def modular_function(weights):
    """Sum-of-weights set function; submodular with equality."""
    w = np.asarray(weights, dtype=np.float64)
    return SetFunction(lambda s: float(w[list(s)].sum()) if s else 0.0, len(w))


@dataclass
class AttributionResult:
    order: list
    gains: list
    values: list
    breakdowns: list
    timing_ms: list
    base_value: float
    base_breakdown: ScoreBreakdown = None
    mode: str = "greedy"

    @property
    def k(self):
        return len(self.order)

    def check(self, rtol=1e-6):
        """Raise ``ValueError`` if the bookkeeping invariants do not hold."""
        n = len(self.order)
        if len(set(self.order)) != n:
            raise ValueError("order has duplicate elements")
        if not (len(self.gains) == len(self.values) == len(self.breakdowns) == n):
            raise ValueError("order, gains, values and breakdowns differ in length")
        if self.timing_ms and len(self.timing_ms) != n:
            raise ValueError("timing_ms length differs from order")
        prev = self.base_value
        for v, g in zip(self.values, self.gains):
            if not math.isclose(prev + g, v, rel_tol=rtol, abs_tol=rtol):
                raise ValueError(f"value {v} != previous {prev} + gain {g}")
            prev = v


@dataclass
class PropertyReport:
    name: str
    trials: int
    violations: int
    max_violation_magnitude: float
    seed: int
    tolerance: float = VIOLATION_TOL
    examples: list = field(default_factory=list)

    @property
    def violation_rate(self):
        return self.violations / self.trials if self.trials else 0.0

    def summary(self):
        return (f"{self.name}: trials={self.trials} violations={self.violations} "
                f"rate={self.violation_rate:.4f} max_violation={self.max_violation_magnitude:.6g} "
                f"seed={self.seed}")

    def as_dict(self):
        return {"name": self.name, "trials": self.trials, "violations": self.violations,
                "violation_rate": self.violation_rate,
                "max_violation_magnitude": self.max_violation_magnitude,
                "seed": self.seed, "tolerance": self.tolerance}


def _check_k(problem, k):
    k = int(k)
    if not 1 <= k <= problem.m:
        raise InvalidConfigError(f"k must lie in [1, {problem.m}], got {k}")
    return k


def _argmax_lowest(values, ids):
    best_i = 0
    for i in range(1, len(values)):
        if values[i] > values[best_i]:
            best_i = i
    return ids[best_i], values[best_i]


def greedy_maximize(problem, k, n_jobs=1, mode="greedy"):
    """Pick ``k`` elements one at a time, each maximising the objective of the grown set.

    Ties go to the lowest element id, so the order does not depend on
    ``n_jobs``. ``mode="lazy"`` reuses stale gains as upper bounds, which is
    exact only for truly submodular objectives.
    """
    k = _check_k(problem, k)
    if mode not in GREEDY_MODES:
        raise InvalidConfigError(f"unknown search mode {mode!r}")
    if n_jobs < 1:
        raise InvalidConfigError("n_jobs must be >= 1")
    # Warm the per-element cache outside the timed steps.
    if hasattr(problem, "element_features"):
        problem.element_features
    base = problem.objective(())
    if mode == "lazy":
        return _lazy_greedy(problem, k, base)

    pool = ThreadPoolExecutor(max_workers=n_jobs) if n_jobs > 1 else None
    try:
        selected, gains, values, breakdowns, timing = [], [], [], [], []
        current = base.total
        remaining = list(range(problem.m))
        for _ in range(k):
            t0 = time.perf_counter()
            candidates = [tuple(selected) + (a,) for a in remaining]
            if pool is None:
                evaluated = [problem.objective(c) for c in candidates]
            else:
                evaluated = list(pool.map(problem.objective, candidates))
            totals = [b.total for b in evaluated]
            best, best_total = _argmax_lowest(totals, remaining)
            idx = remaining.index(best)
            selected.append(best)
            remaining.pop(idx)
            gains.append(best_total - current)
            values.append(best_total)
            breakdowns.append(evaluated[idx])
            current = best_total
            timing.append((time.perf_counter() - t0) * 1000.0)
    finally:
        if pool is not None:
            pool.shutdown()
    return AttributionResult(selected, gains, values, breakdowns, timing, base.total, base, "greedy")


def _lazy_greedy(problem, k, base):
    selected, gains, values, breakdowns, timing = [], [], [], [], []
    current = base.total
    heap = [(-math.inf, a, -1) for a in range(problem.m)]
    heapq.heapify(heap)
    for step in range(k):
        t0 = time.perf_counter()
        fresh = {}
        while True:
            _, a, stamp = heapq.heappop(heap)
            if stamp == step:
                break
            fresh[a] = problem.objective(tuple(selected) + (a,))
            heapq.heappush(heap, (-(fresh[a].total - current), a, step))
        b = fresh[a]
        selected.append(a)
        gains.append(b.total - current)
        values.append(b.total)
        breakdowns.append(b)
        current = b.total
        timing.append((time.perf_counter() - t0) * 1000.0)
    return AttributionResult(selected, gains, values, breakdowns, timing, base.total, base, "lazy")


def brute_force_maximize(problem, k, budget=500_000):
    """Exact best size-``k`` subset; ties go to the lexicographically smallest."""
    k = _check_k(problem, k)
    count = math.comb(problem.m, k)
    if count > budget:
        raise BudgetExceededError(f"C({problem.m}, {k}) = {count} subsets exceeds the budget of {budget}")
    best, best_value = None, -math.inf
    for subset in itertools.combinations(range(problem.m), k):
        v = problem.objective(subset).total
        if v > best_value:
            best, best_value = subset, v
    return best, best_value


def verify_greedy_steps(problem, result, tol=0.0):
    """Replay ``result`` and list steps whose pick was not the lowest-id argmax.

    Returns a list of ``(step, chosen, expected)`` tuples; empty means every
    step is confirmed.
    """
    failures = []
    selected = []
    for step, chosen in enumerate(result.order):
        remaining = [a for a in range(problem.m) if a not in selected]
        totals = [problem.objective(tuple(selected) + (a,)).total for a in remaining]
        best, best_total = _argmax_lowest(totals, remaining)
        chosen_total = totals[remaining.index(chosen)]
        if chosen != best and not (tol > 0 and chosen_total >= best_total - tol):
            failures.append((step, chosen, best))
        selected.append(chosen)
    return failures


def _record(report, magnitude, example):
    if magnitude > report.tolerance:
        report.violations += 1
        report.max_violation_magnitude = max(report.max_violation_magnitude, magnitude)
        if len(report.examples) < 5:
            report.examples.append(example)


def check_submodularity(problem, trials=1000, seed=0, tol=VIOLATION_TOL, name="submodularity"):
    """Sample ``Sa ⊂ Sb``, ``alpha ∉ Sb`` and count diminishing-returns violations."""
    m = problem.m
    if m < 3:
        raise InvalidConfigError("submodularity check needs m >= 3")
    rng = np.random.default_rng(seed)
    report = PropertyReport(name, int(trials), 0, 0.0, int(seed), tol)
    for _ in range(int(trials)):
        a = int(rng.integers(0, m - 1))
        b = a + int(rng.integers(1, m - a))
        perm = [int(x) for x in rng.permutation(m)]
        sa, sb, alpha = tuple(perm[:a]), tuple(perm[:b]), perm[b]
        gain_a = problem.objective(sa + (alpha,)).total - problem.objective(sa).total
        gain_b = problem.objective(sb + (alpha,)).total - problem.objective(sb).total
        _record(report, gain_b - gain_a, (sorted(sa), sorted(sb), alpha))
    return report


def check_monotonicity(problem, trials=1000, seed=0, tol=VIOLATION_TOL, name="monotonicity"):
    """Sample ``S``, ``alpha ∉ S`` and count decreases of the objective."""
    m = problem.m
    if m < 2:
        raise InvalidConfigError("monotonicity check needs m >= 2")
    rng = np.random.default_rng(seed)
    report = PropertyReport(name, int(trials), 0, 0.0, int(seed), tol)
    for _ in range(int(trials)):
        s = int(rng.integers(0, m))
        perm = [int(x) for x in rng.permutation(m)]
        subset, alpha = tuple(perm[:s]), perm[s]
        gain = problem.objective(subset + (alpha,)).total - problem.objective(subset).total
        _record(report, -gain, (sorted(subset), alpha))
    return report


def check_min_distance_monotonicity(ctx, trials=10_000, seed=0, tol=VIOLATION_TOL):
    """Check that an element's smallest distance to a set never grows with the set.

    Draws non-empty ``Sa ⊆ Sb`` and ``alpha ∉ Sb``. The empty set is excluded
    because its marginal is a fixed convention, not a minimum.
    """
    m = ctx.m
    if m < 2:
        raise InvalidConfigError("min-distance check needs m >= 2")
    rng = np.random.default_rng(seed)
    report = PropertyReport("min-distance monotonicity", int(trials), 0, 0.0, int(seed), tol)
    for _ in range(int(trials)):
        a = int(rng.integers(1, m))
        b = a + int(rng.integers(0, m - a))
        perm = [int(x) for x in rng.permutation(m)]
        sa, sb, alpha = perm[:a], perm[:b], perm[b]
        margin_a = effectiveness_marginal(alpha, sa, ctx)
        margin_b = effectiveness_marginal(alpha, sb, ctx)
        _record(report, margin_b - margin_a, (sorted(sa), sorted(sb), alpha))
    return report
