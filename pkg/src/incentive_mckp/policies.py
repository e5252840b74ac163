"""Policy families built from a greedy run, and their comparison.

Personalized incentives, enforcement (bans), proportional tax-subsidy and
Tripod-style proportional incentives can all be tuned to induce the same
choices.  They then share welfare and disutility and differ only in who
pays: the regulator or the individuals.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import NotProportionalIncentiveError
from .greedy import GreedyResult, solve
from .model import (
    BANNED,
    Instance,
    Policy,
    choose,
    default_alternative,
    evaluate,
)

EXACT = "exact"
EXCLUDE_BOUNDARY = "exclude_boundary"


@dataclass(frozen=True)
class TaxSubsidyConfig:
    tax_level: float
    baselines: dict[int, float]
    boundary_mode: str = EXCLUDE_BOUNDARY
    delta: float = 1e-9

    def __post_init__(self):
        if not self.tax_level > 0:
            raise ValueError("tax level must be positive")
        if self.boundary_mode not in (EXACT, EXCLUDE_BOUNDARY):
            raise ValueError(f"unknown boundary mode {self.boundary_mode!r}")
        if self.boundary_mode == EXCLUDE_BOUNDARY and not self.delta > 0:
            raise ValueError("delta must be positive when excluding the boundary")

    @property
    def effective_tax_level(self) -> float:
        if self.boundary_mode == EXCLUDE_BOUNDARY:
            return self.tax_level / (1.0 + self.delta)
        return self.tax_level


@dataclass(frozen=True)
class TripodConfig:
    tee: float
    arrival_order: Sequence[int]
    budget: float = math.inf

    def __post_init__(self):
        if not self.tee > 0:
            raise ValueError("TEE must be positive")


@dataclass(frozen=True)
class TripodOutcome:
    policy: Policy
    spent: float
    served: frozenset[int] = field(default_factory=frozenset)


@dataclass(frozen=True)
class ComparisonRow:
    policy: str
    expenses: float
    utility_change: float
    disutility: float
    welfare_gain: float


def personalized_incentive_policy(result: GreedyResult) -> Policy:
    return result.incentive_policy


def enforcement_policy(result: GreedyResult, instance: Instance) -> Policy:
    """Ban, for each incentivized individual, every alternative preferred to the target."""
    transfers = {}
    for iid, target in result.assignment.items():
        ind = instance.individual(iid)
        u_target = ind.alternative(target).utility
        for alt in ind.alternatives:
            if alt.alt_id != target and alt.utility >= u_target:
                transfers[(iid, alt.alt_id)] = BANNED
    return Policy(transfers)


def default_baselines(instance: Instance) -> dict[int, float]:
    return {
        ind.individual_id: ind.alternative(default_alternative(ind)).social
        for ind in instance.individuals
    }


def proportional_tax_policy(instance: Instance, config: TaxSubsidyConfig) -> Policy:
    tau = config.effective_tax_level
    transfers = {}
    for ind in instance.individuals:
        base = config.baselines.get(ind.individual_id)
        if base is None:
            base = ind.alternative(default_alternative(ind)).social
        for alt in ind.alternatives:
            transfers[(ind.individual_id, alt.alt_id)] = tau * (alt.social - base)
    return Policy(transfers)


def tripod_policy(instance: Instance, config: TripodConfig) -> TripodOutcome:
    """Proportional incentives handed out first-come first-served.

    Each arriving individual is offered ``(s_j - s_default) / TEE`` for every
    socially better alternative.  They are served only if the transfer of the
    alternative they would then pick fits in the remaining budget; the first
    individual who does not fit closes the scheme.
    """
    transfers = {}
    served = set()
    spent = 0.0
    for iid in config.arrival_order:
        ind = instance.individual(iid)
        s_def = ind.alternative(default_alternative(ind)).social
        offer = {
            (iid, alt.alt_id): (alt.social - s_def) / config.tee
            for alt in ind.alternatives if alt.social > s_def
        }
        if not offer:
            continue
        pick = choose(ind, Policy(offer))
        cost = offer.get((iid, pick), 0.0)
        if spent + cost > config.budget:
            break
        transfers.update(offer)
        spent += cost
        if cost > 0:
            served.add(iid)
    return TripodOutcome(Policy(transfers), spent, frozenset(served))


def _check_proportional(instance: Instance, policy: Policy, tau: float, rtol=1e-9):
    by_ind: dict[int, dict[int, float]] = {}
    for (iid, jid), t in policy.transfers.items():
        if t is BANNED or not math.isfinite(t) or t < 0:
            raise NotProportionalIncentiveError(
                f"transfer {t!r} for ({iid}, {jid}) is not a non-negative amount")
        by_ind.setdefault(iid, {})[jid] = t
    for iid, ts in by_ind.items():
        ind = instance.individual(iid)
        s_def = ind.alternative(default_alternative(ind)).social
        positive = [(ind.alternative(j).social, t) for j, t in ts.items() if t > 0]
        if not positive:
            continue
        base = positive[0][0] - positive[0][1] / tau
        scale = max(1.0, abs(base), abs(s_def))
        if base > s_def + rtol * scale:
            raise NotProportionalIncentiveError(
                f"individual {iid}: baseline {base} above the default social indicator")
        for alt in ind.alternatives:
            expected = tau * max(0.0, alt.social - base)
            got = ts.get(alt.alt_id, 0.0)
            if abs(got - expected) > rtol * max(1.0, abs(expected)):
                raise NotProportionalIncentiveError(
                    f"individual {iid}, alternative {alt.alt_id}: transfer {got} "
                    f"is not proportional (expected {expected})")


def inefficiency_lower_bound(instance: Instance, policy: Policy, tax_level: float) -> float:
    """Minimum incentive a personalized policy saves over a proportional one.

    Sums ``tau * w * (e - 1/tau)`` over individuals moved off their default,
    where ``w`` and ``e`` are the weight and overall efficiency of the
    alternative they end up choosing.
    """
    _check_proportional(instance, policy, tax_level)
    total = 0.0
    for ind in instance.individuals:
        d = ind.alternative(default_alternative(ind))
        picked = ind.alternative(choose(ind, policy))
        if picked.alt_id == d.alt_id:
            continue
        # tau * w * (e - 1/tau) with e = ds / w, written without the division
        total += tax_level * (picked.social - d.social) - (d.utility - picked.utility)
    return total


def suboptimality_gap_lower_bound(instance: Instance, policy: Policy, tax_level: float) -> float:
    loss = inefficiency_lower_bound(instance, policy, tax_level)
    spend = evaluate(instance, policy).expenses
    ref = solve(instance, max(spend, 0.0))
    eff = ref.characteristic_incr_efficiency or 0.0
    return max(0.0, eff * (loss - 2.0 * ref.max_step_size))


def tax_level_for(result: GreedyResult) -> float:
    """Tax level inducing the greedy allocation: inverse split efficiency.

    Without a split item every chain item was taken, so any level at or
    above the inverse of the last efficiency works; twice that is used.
    """
    if result.split_incr_efficiency is not None:
        return 1.0 / result.split_incr_efficiency
    if result.iteration_log:
        return 2.0 / result.iteration_log[-1].incr_efficiency
    return 1.0


def compare(instance: Instance, result: GreedyResult, delta: float = 1e-9,
            workers: int = 1) -> list[ComparisonRow]:
    """Evaluate the four policy families built from ``result``."""
    tau = tax_level_for(result)
    tax_cfg = TaxSubsidyConfig(tau, default_baselines(instance), EXCLUDE_BOUNDARY, delta)
    tripod = tripod_policy(instance, TripodConfig(
        tee=1.0 / tax_cfg.effective_tax_level,
        arrival_order=sorted(ind.individual_id for ind in instance.individuals),
    ))
    policies = [
        ("personalized", personalized_incentive_policy(result)),
        ("enforcement", enforcement_policy(result, instance)),
        ("proportional_tax", proportional_tax_policy(instance, tax_cfg)),
        ("tripod", tripod.policy),
    ]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            evals = list(pool.map(lambda p: evaluate(instance, p[1]), policies))
    else:
        evals = [evaluate(instance, p) for _, p in policies]
    return [
        ComparisonRow(name, ev.expenses, ev.utility_change, ev.disutility, ev.welfare_gain)
        for (name, _), ev in zip(policies, evals)
    ]


def rows_to_dicts(rows: Iterable[ComparisonRow]) -> list[dict]:
    return [
        {"policy": r.policy, "expenses": r.expenses, "utility_change": r.utility_change,
         "disutility": r.disutility, "welfare_gain": r.welfare_gain}
        for r in rows
    ]
