"""Instances, policies and the choice/evaluation semantics.

Every individual picks the alternative maximising intrinsic utility plus the
monetary transfer offered by the regulator.  Ties go to the larger social
indicator, then to the lowest alternative id.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

from .errors import AllBannedError

TOLERANCE = 1e-9


class _Banned:
    """Sentinel transfer: the alternative cannot be chosen at all."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "BANNED"

    def __reduce__(self):
        return (_Banned, ())


BANNED = _Banned()
Transfer = Union[float, _Banned]


@dataclass(frozen=True, slots=True)
class Alternative:
    alt_id: int
    utility: float
    social: float


@dataclass(frozen=True, slots=True)
class Individual:
    individual_id: int
    alternatives: tuple[Alternative, ...]

    def __post_init__(self):
        if not isinstance(self.alternatives, tuple):
            object.__setattr__(self, "alternatives", tuple(self.alternatives))

    def alternative(self, alt_id: int) -> Alternative:
        for alt in self.alternatives:
            if alt.alt_id == alt_id:
                return alt
        raise KeyError(f"individual {self.individual_id} has no alternative {alt_id}")


@dataclass(frozen=True)
class Instance:
    individuals: tuple[Individual, ...]
    money_unit: str = "EUR"
    welfare_unit: str = "welfare"
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.individuals, tuple):
            object.__setattr__(self, "individuals", tuple(self.individuals))
        object.__setattr__(
            self, "_index", {ind.individual_id: ind for ind in self.individuals}
        )

    def __len__(self):
        return len(self.individuals)

    def individual(self, individual_id: int) -> Individual:
        return self._index[individual_id]

    @property
    def n_alternatives(self) -> int:
        return sum(len(ind.alternatives) for ind in self.individuals)


@dataclass(frozen=True)
class Policy:
    """Sparse transfer map; missing ``(individual, alternative)`` pairs mean 0."""

    transfers: Mapping[tuple[int, int], Transfer] = field(default_factory=dict)

    def transfer(self, individual_id: int, alt_id: int) -> Transfer:
        return self.transfers.get((individual_id, alt_id), 0.0)

    def is_incentive_policy(self) -> bool:
        return all(t is not BANNED and t >= 0 for t in self.transfers.values())

    def __len__(self):
        return len(self.transfers)


@dataclass(frozen=True)
class ChoiceOutcome:
    chosen: dict[int, int]
    realized_utility: dict[int, float]


@dataclass(frozen=True)
class PolicyEvaluation:
    welfare: float
    expenses: float
    utility_change: float
    disutility: float
    baseline_welfare: float

    @property
    def welfare_gain(self) -> float:
        return self.welfare - self.baseline_welfare

    @property
    def utility_loss(self) -> float:
        return -self.utility_change


@dataclass(frozen=True)
class Violation:
    kind: str
    individual_id: int | None
    alt_id: int | None
    message: str


def _choice_key(alt: Alternative, transfer: float):
    return (alt.utility + transfer, alt.social, -alt.alt_id)


def default_alternative(individual: Individual) -> int:
    best = max(individual.alternatives, key=lambda a: (a.utility, a.social, -a.alt_id))
    return best.alt_id


def _choose(individual: Individual, policy: Policy) -> tuple[Alternative, float]:
    iid = individual.individual_id
    best = None
    best_key = None
    best_t = 0.0
    for alt in individual.alternatives:
        t = policy.transfers.get((iid, alt.alt_id), 0.0)
        if t is BANNED:
            continue
        key = _choice_key(alt, t)
        if best_key is None or key > best_key:
            best, best_key, best_t = alt, key, t
    if best is None:
        raise AllBannedError(iid)
    return best, best_t


def choose(individual: Individual, policy: Policy) -> int:
    """Alternative picked by ``individual`` when facing ``policy``."""
    return _choose(individual, policy)[0].alt_id


def check_policy_references(instance: Instance, policy: Policy) -> None:
    for iid, jid in policy.transfers:
        try:
            instance.individual(iid).alternative(jid)
        except KeyError:
            raise KeyError(
                f"policy references unknown pair (individual={iid}, alternative={jid})"
            ) from None


def choice_outcome(instance: Instance, policy: Policy) -> ChoiceOutcome:
    chosen = {}
    realized = {}
    for ind in instance.individuals:
        alt, t = _choose(ind, policy)
        chosen[ind.individual_id] = alt.alt_id
        realized[ind.individual_id] = alt.utility + t
    return ChoiceOutcome(chosen, realized)


def evaluate(instance: Instance, policy: Policy) -> PolicyEvaluation:
    """Welfare, expenses, utility change and disutility of ``policy``.

    Disutility is expenses plus the total loss of individual utility, which
    reduces to the sum over individuals of ``u_default - u_chosen``.
    """
    check_policy_references(instance, policy)
    zero = Policy()
    welfare = baseline = expenses = utility_change = 0.0
    for ind in instance.individuals:
        default, _ = _choose(ind, zero)
        alt, t = _choose(ind, policy)
        welfare += alt.social
        baseline += default.social
        expenses += t
        utility_change += alt.utility + t - default.utility
    return PolicyEvaluation(
        welfare=welfare,
        expenses=expenses,
        utility_change=utility_change,
        disutility=expenses - utility_change,
        baseline_welfare=baseline,
    )


def inducing_weight(u_default: float, u_alt: float) -> float:
    """``u_default - u_alt``, rounded up so that ``u_alt + w >= u_default`` holds in floats."""
    w = u_default - u_alt
    while u_alt + w < u_default:
        w = math.nextafter(w, math.inf)
    return w


def weight(individual: Individual, alt_id: int) -> float:
    """Minimum incentive that makes ``individual`` switch to ``alt_id``."""
    default = individual.alternative(default_alternative(individual))
    return inducing_weight(default.utility, individual.alternative(alt_id).utility)


def validate_instance(instance: Instance) -> list[Violation]:
    report = []
    seen_ids = set()
    for ind in instance.individuals:
        iid = ind.individual_id
        if iid in seen_ids:
            report.append(Violation("DuplicateIndividualId", iid, None,
                                    f"individual id {iid} appears more than once"))
        seen_ids.add(iid)
        if not ind.alternatives:
            report.append(Violation("EmptyIndividual", iid, None,
                                    f"individual {iid} has no alternatives"))
        alt_ids = set()
        points = {}
        for alt in ind.alternatives:
            if alt.alt_id in alt_ids:
                report.append(Violation("DuplicateAlternativeId", iid, alt.alt_id,
                                        f"alternative id {alt.alt_id} repeated"))
            alt_ids.add(alt.alt_id)
            if not (math.isfinite(alt.utility) and math.isfinite(alt.social)):
                report.append(Violation("NonFiniteValue", iid, alt.alt_id,
                                        "utility and social indicator must be finite"))
                continue
            key = (alt.utility, alt.social)
            if key in points:
                report.append(Violation(
                    "IdenticalAlternatives", iid, alt.alt_id,
                    f"alternatives {points[key]} and {alt.alt_id} share utility and social indicator",
                ))
            else:
                points[key] = alt.alt_id
    return report


def strip_pareto_dominated(individual: Individual) -> Individual:
    """Drop alternatives beaten on utility by one at least as socially good."""
    alts = individual.alternatives
    kept = tuple(
        a for a in alts
        if not any(b.social >= a.social and b.utility > a.utility for b in alts)
    )
    if len(kept) == len(alts):
        return individual
    return Individual(individual.individual_id, kept)


def strip_instance(instance: Instance) -> Instance:
    return Instance(
        tuple(strip_pareto_dominated(ind) for ind in instance.individuals),
        instance.money_unit,
        instance.welfare_unit,
    )


def make_instance(rows: Iterable[Iterable[tuple[float, float]]], **units) -> Instance:
    """Build an instance from nested ``(utility, social)`` pairs with ordinal ids."""
    individuals = []
    for i, alts in enumerate(rows):
        individuals.append(Individual(
            i, tuple(Alternative(j, float(u), float(s)) for j, (u, s) in enumerate(alts))
        ))
    return Instance(tuple(individuals), **units)
