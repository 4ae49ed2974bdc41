import itertools
import math

import numpy as np
import pytest

from smattr.exceptions import BudgetExceededError, InvalidConfigError
from smattr.instances import make_instance
from smattr.search import (
    AttributionResult,
    SetFunction,
    brute_force_maximize,
    check_min_distance_monotonicity,
    check_monotonicity,
    check_submodularity,
    greedy_maximize,
    modular_function,
    verify_greedy_steps,
)


def table_function(values):
    """Set function read from an explicit {frozenset: value} table."""
    return lambda s: values[frozenset(s)]


@pytest.fixture(scope="module")
def ctx10():
    return make_instance(1, n=10, m=10, patch=2).context()


class TestGreedy:
    def test_single_step_picks_argmax(self):
        f = SetFunction(table_function({frozenset(): 0.0, frozenset({0}): 0.2,
                                        frozenset({1}): 0.9, frozenset({2}): 0.5}), 3)
        result = greedy_maximize(f, 1)
        assert result.order == [1]
        assert result.gains == [0.9] and result.values == [0.9]

    def test_tie_goes_to_lowest_id(self):
        f = modular_function([1.0, 3.0, 3.0, 0.5])
        assert greedy_maximize(f, 2).order == [1, 2]

    def test_full_budget_is_permutation(self, ctx10):
        result = greedy_maximize(ctx10, 10)
        assert sorted(result.order) == list(range(10))
        result.check()

    def test_k_out_of_range(self, ctx10):
        for k in (0, 11):
            with pytest.raises(InvalidConfigError):
                greedy_maximize(ctx10, k)

    def test_seeded_order_matches_exhaustive_step_search(self, ctx10):
        result = greedy_maximize(ctx10, 3)
        chosen = []
        for _ in range(3):
            rest = [a for a in range(10) if a not in chosen]
            scores = {a: ctx10.value(chosen + [a]) for a in rest}
            best = max(scores.values())
            chosen.append(min(a for a in rest if scores[a] == best))
        assert result.order == chosen
        assert verify_greedy_steps(ctx10, result) == []

    def test_threads_do_not_change_order(self, ctx10):
        base = greedy_maximize(ctx10, 6)
        for n_jobs in (2, 4, 8):
            other = greedy_maximize(ctx10, 6, n_jobs=n_jobs)
            assert other.order == base.order and other.values == base.values

    def test_lazy_exact_on_submodular_function(self):
        # facility-location: monotone submodular
        rng = np.random.default_rng(4)
        sim = rng.uniform(size=(9, 20))
        f = SetFunction(lambda s: float(sim[list(s)].max(axis=0).sum()) if s else 0.0, 9)
        plain = greedy_maximize(f, 5)
        lazy = greedy_maximize(f, 5, mode="lazy")
        assert lazy.mode == "lazy" and plain.mode == "greedy"
        assert lazy.order == plain.order
        np.testing.assert_allclose(lazy.values, plain.values)

    def test_bad_mode(self, ctx10):
        with pytest.raises(InvalidConfigError):
            greedy_maximize(ctx10, 2, mode="stochastic")

    def test_step_replay_detects_tampering(self, ctx10):
        result = greedy_maximize(ctx10, 3)
        result.order[0] = next(a for a in range(10) if a != result.order[0] and a not in result.order)
        assert verify_greedy_steps(ctx10, result)

    def test_result_invariant_check(self):
        r = AttributionResult([0, 1], [1.0, 0.5], [1.0, 1.5], [None, None], [], 0.0)
        r.check()
        r.values[1] = 2.0
        with pytest.raises(ValueError):
            r.check()
        with pytest.raises(ValueError):
            AttributionResult([0, 0], [1.0, 0.0], [1.0, 1.0], [None, None], [], 0.0).check()


class TestBruteForce:
    def test_full_set(self):
        subset, value = brute_force_maximize(modular_function([1, 2, 3, 4]), 4)
        assert subset == (0, 1, 2, 3) and value == 10

    def test_k1_equals_greedy_first_pick(self):
        ctx = make_instance(2, n=5, m=5, patch=2).context()
        subset, value = brute_force_maximize(ctx, 1)
        assert list(subset) == greedy_maximize(ctx, 1).order
        assert value == greedy_maximize(ctx, 1).values[0]

    def test_matches_enumeration(self, ctx10):
        subset, value = brute_force_maximize(ctx10, 3)
        values = {s: ctx10.value(s) for s in itertools.combinations(range(10), 3)}
        best = max(values.values())
        assert value == best
        assert subset == min(s for s, v in values.items() if v == best)

    def test_lexicographic_tie(self):
        subset, _ = brute_force_maximize(modular_function([1, 1, 1, 1]), 2)
        assert subset == (0, 1)

    def test_budget(self):
        with pytest.raises(BudgetExceededError):
            brute_force_maximize(modular_function(np.ones(30)), 15)
        with pytest.raises(BudgetExceededError):
            brute_force_maximize(modular_function(np.ones(10)), 3, budget=100)

    def test_greedy_bound_on_submodular_function(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            sim = rng.uniform(size=(10, 15))
            f = SetFunction(lambda s, sim=sim: float(sim[list(s)].max(axis=0).sum()) if s else 0.0, 10)
            _, opt = brute_force_maximize(f, 3)
            assert greedy_maximize(f, 3).values[-1] >= (1 - 1 / math.e) * opt


class TestCheckers:
    def test_modular_double_has_no_violations(self):
        f = modular_function(np.random.default_rng(0).uniform(size=10))
        assert check_submodularity(f, 500, 3).violations == 0
        assert check_monotonicity(f, 500, 3).violations == 0

    def test_supermodular_function_is_caught(self):
        f = SetFunction(lambda s: float(len(s)) ** 2, 8)
        report = check_submodularity(f, 300, 1)
        assert report.violations > 0 and report.max_violation_magnitude >= 2.0 - 1e-9
        assert report.violations <= report.trials

    def test_decreasing_function_is_caught(self):
        f = SetFunction(lambda s: -float(len(s)), 6)
        report = check_monotonicity(f, 100, 0)
        assert report.violations == 100 and report.max_violation_magnitude == pytest.approx(1.0)

    def test_reports_are_deterministic(self, ctx10):
        a = check_submodularity(ctx10, 200, 9)
        b = check_submodularity(ctx10, 200, 9)
        assert a.as_dict() == b.as_dict()

    def test_min_distance_exact(self, ctx10):
        assert check_min_distance_monotonicity(ctx10, 2000, 1).violations == 0

    def test_small_m_rejected(self):
        with pytest.raises(InvalidConfigError):
            check_submodularity(modular_function([1, 2]), 10, 0)

    def test_summary_mentions_counts(self):
        report = check_monotonicity(modular_function([1, 2, 3]), 10, 0, name="x")
        assert report.summary().startswith("x: trials=10 violations=0")
