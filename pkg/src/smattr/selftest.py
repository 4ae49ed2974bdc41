"""Built-in seeded checks of the objective's set-function properties."""

import math
from dataclasses import dataclass, field

import numpy as np

from .instances import make_instance
from .search import (
    brute_force_maximize,
    check_min_distance_monotonicity,
    check_monotonicity,
    check_submodularity,
    greedy_maximize,
    modular_function,
    verify_greedy_steps,
)

GREEDY_BOUND = 1.0 - 1.0 / math.e


@dataclass
class SelfTestOutcome:
    reports: list = field(default_factory=list)
    lines: list = field(default_factory=list)
    hard_failures: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.hard_failures

    def as_dict(self):
        return {"reports": [r.as_dict() for r in self.reports], "lines": self.lines,
                "hard_failures": self.hard_failures, "ok": self.ok}


def bound_instance(seed, trials, check_seed):
    """Greedy vs exhaustive optimum on one m=10, k=3 instance.

    Returns ``(ratio, greedy_value, optimum, clean, reports)``; ``clean``
    means neither sampled property check found a violation.
    """
    ctx = make_instance(seed, n=10, m=10, patch=2).context()
    sub = check_submodularity(ctx, trials, check_seed)
    mono = check_monotonicity(ctx, trials, check_seed)
    greedy = greedy_maximize(ctx, 3)
    _, optimum = brute_force_maximize(ctx, 3)
    value = greedy.values[-1]
    ratio = value / optimum if optimum > 0 else math.inf
    return ratio, value, optimum, sub.violations == 0 and mono.violations == 0, (sub, mono)


def run_selftest(trials=1000, seed=0, n_bound_instances=5):
    out = SelfTestOutcome()

    def report(r, hard):
        out.reports.append(r)
        tag = "HARD" if hard else "soft"
        out.lines.append(f"[{tag}] {r.summary()}")
        if hard and r.violations:
            out.hard_failures.append(r.name)

    weights = np.random.default_rng(seed).uniform(0.0, 1.0, size=12)
    modular = modular_function(weights)
    report(check_submodularity(modular, trials, seed, name="modular double: submodularity"), True)
    report(check_monotonicity(modular, trials, seed, name="modular double: monotonicity"), True)

    inst = make_instance(seed, n=4, m=16, patch=4)
    ctx = inst.context()
    report(check_submodularity(ctx, trials, seed, name="full objective: submodularity"), False)
    report(check_monotonicity(ctx, trials, seed, name="full objective: monotonicity"), False)
    conf_only = ctx.with_lambdas((1, 0, 0, 0))
    report(check_monotonicity(conf_only, trials, seed, name="confidence only: monotonicity"), False)
    report(check_min_distance_monotonicity(ctx, max(trials, 1000), seed), True)

    result = greedy_maximize(ctx, ctx.m)
    failures = verify_greedy_steps(ctx, result)
    out.lines.append(f"[HARD] greedy step replay: steps={result.k} failures={len(failures)}")
    if failures:
        out.hard_failures.append("greedy step replay")

    for i in range(n_bound_instances):
        ratio, value, optimum, clean, _ = bound_instance(seed + i, trials, seed)
        status = "checked" if clean else "reported (property violations)"
        line = (f"greedy vs optimum: instance={seed + i} greedy={value:.9g} optimum={optimum:.9g} "
                f"ratio={ratio:.6f} bound={GREEDY_BOUND:.6f} {status}")
        if clean and ratio < GREEDY_BOUND - 1e-9:
            out.hard_failures.append(f"greedy bound on instance {seed + i}")
            line += " FAIL"
        out.lines.append(("[HARD] " if clean else "[soft] ") + line)
    out.lines.append("selftest: " + ("PASS" if out.ok else "FAIL: " + ", ".join(out.hard_failures)))
    return out
