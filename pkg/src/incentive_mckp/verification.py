"""Randomized property suite behind the ``verify`` command.

Each check returns the number of violations found on one instance; the
exact enumerator is the reference for everything involving optimal welfare.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .exact import Enumerator
from .greedy import GreedyResult, solve
from .model import Alternative, Individual, Instance, choice_outcome, default_alternative, evaluate
from .policies import (
    TripodConfig,
    inefficiency_lower_bound,
    suboptimality_gap_lower_bound,
    tax_level_for,
    tripod_policy,
)

PROPERTIES = ("touch_points", "gap_bound", "diminishing_returns", "policy_reproduction",
              "inefficiency_bound", "suboptimality_bound")


def random_instance(rng: np.random.Generator, max_individuals=6, max_alts=5,
                    low=0, high=20, integer=True) -> Instance:
    n = int(rng.integers(1, max_individuals + 1))
    inds = []
    for i in range(n):
        m = int(rng.integers(1, max_alts + 1))
        if integer:
            vals = rng.integers(low, high + 1, size=(m, 2)).astype(float)
        else:
            vals = rng.uniform(low, high, size=(m, 2))
        inds.append(Individual(i, tuple(Alternative(j, u, s) for j, (u, s) in enumerate(vals))))
    return Instance(tuple(inds))


def touch_point_violations(instance: Instance, result: GreedyResult, enum: Enumerator) -> int:
    return sum(enum.welfare(e.tot_incentive) != e.welfare_gain for e in result.iteration_log)


def gap_bound_violations(instance: Instance, enum: Enumerator, budgets) -> int:
    bad = 0
    for b in budgets:
        res = solve(instance, b)
        gap = enum.welfare(b) - res.welfare_gain
        bound = 0.0 if res.split_incr_efficiency is None else \
            res.split_incr_efficiency * (b - res.budget_used)
        bad += gap > bound + 1e-9
    return bad


def diminishing_returns_violations(result: GreedyResult) -> int:
    """Incremental and overall efficiencies must not increase, checked in rationals."""
    bad = 0
    prev_inc = prev_overall = None
    tot = gain = Fraction(0)
    for e in result.iteration_log:
        dw, ds = Fraction(e.incr_weight), Fraction(e.incr_social)
        tot += dw
        gain += ds
        inc, overall = ds / dw, gain / tot
        if prev_inc is not None and (inc > prev_inc or overall > prev_overall):
            bad += 1
        prev_inc, prev_overall = inc, overall
    return bad


def reproduction_violations(instance: Instance, result: GreedyResult) -> int:
    """The personalized policy must move exactly the assigned individuals."""
    chosen = choice_outcome(instance, result.incentive_policy).chosen
    assigned = result.assignment
    return sum(chosen[i] != assigned.get(i, default_alternative(instance.individual(i)))
               for i in chosen)


def inefficiency_violations(instance: Instance, result: GreedyResult, enum: Enumerator):
    """Tripod overspend against the lower bound, and the suboptimality bound."""
    tau = tax_level_for(result) / (1.0 + 1e-9)
    tri = tripod_policy(instance, TripodConfig(
        1.0 / tau, [ind.individual_id for ind in instance.individuals]))
    if choice_outcome(instance, tri.policy).chosen != \
            choice_outcome(instance, result.incentive_policy).chosen:
        return 0, 0
    tri_eval = evaluate(instance, tri.policy)
    pers_eval = evaluate(instance, result.incentive_policy)
    loss = inefficiency_lower_bound(instance, tri.policy, tau)
    bad_loss = int(tri_eval.expenses - pers_eval.expenses < loss - 1e-9)
    true_gap = enum.welfare(tri_eval.expenses) - tri_eval.welfare_gain
    bound = suboptimality_gap_lower_bound(instance, tri.policy, tau)
    bad_gap = int(bound > true_gap + 1e-9)
    return bad_loss, bad_gap


@dataclass
class VerifyReport:
    instances: int = 0
    checks: dict[str, int] = field(default_factory=lambda: dict.fromkeys(PROPERTIES, 0))
    violations: dict[str, int] = field(default_factory=lambda: dict.fromkeys(PROPERTIES, 0))

    @property
    def ok(self) -> bool:
        return not any(self.violations.values())

    def add(self, name, bad):
        """Record one check; ``bad`` counts failures within it."""
        self.checks[name] += 1
        self.violations[name] += int(bad > 0)


def run_suite(n_instances=50, max_individuals=6, max_alts=5, seed=0) -> VerifyReport:
    rng = np.random.default_rng(seed)
    report = VerifyReport()
    for _ in range(n_instances):
        inst = random_instance(rng, max_individuals, max_alts)
        enum = Enumerator(inst)
        total = float(enum.cost.max())
        full = solve(inst, total)
        budgets = rng.uniform(0.0, max(total, 1.0), size=3).tolist()
        report.instances += 1
        report.add("touch_points", touch_point_violations(inst, full, enum))
        report.add("gap_bound", gap_bound_violations(inst, enum, budgets))
        report.add("diminishing_returns", diminishing_returns_violations(full))
        for b in budgets:
            res = solve(inst, b)
            report.add("policy_reproduction", reproduction_violations(inst, res))
            bad_loss, bad_gap = inefficiency_violations(inst, res, enum)
            report.add("inefficiency_bound", bad_loss)
            report.add("suboptimality_bound", bad_gap)
    return report

