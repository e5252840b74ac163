"""Incentives when the regulator only knows the deterministic utility part.

Utilities are ``v_ij + eps_ij`` with i.i.d. Gumbel noise of scale ``mu``.
The planner offers, for each alternative, the expected utility gap given
that the observed default was preferred, and proposes offers one at a time
in greedy order.  Simulated individuals accept or refuse based on their
hidden noise.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .concavize import LpExtremeChain, hull_chain
from .errors import ImprobableDefaultError, NegativeBudgetError, NonPositiveScaleError
from .model import Individual, Instance, inducing_weight

MAX_REJECTIONS = 10**6


def gumbel_expected_incentive(delta_v: float, mu: float) -> float:
    """Expected utility gap ``E(U_d - U_j | U_d > U_j)`` for Gumbel noise.

    Closed form ``mu * (1 + e^-x) * ln(1 + e^x)`` with ``x = delta_v / mu``,
    evaluated without overflow for ``|x|`` up to several hundred.
    """
    if not mu > 0:
        raise NonPositiveScaleError(f"scale must be positive, got {mu}")
    x = delta_v / mu
    if x >= 0:
        softplus = x + math.log1p(math.exp(-x))
        return mu * (1.0 + math.exp(-x)) * softplus
    t = math.exp(x)
    softplus = math.log1p(t)
    # (1 + 1/t) * log1p(t); log1p(t)/t -> 1 as t -> 0
    ratio = softplus / t if t > 0 else 1.0
    return mu * (softplus + ratio)


@dataclass(frozen=True)
class StochasticInstance:
    """Planner view (``base`` holds deterministic utilities ``v``) plus hidden noise.

    ``latent`` maps individual id to one draw per alternative, in the order
    of ``base.individual(i).alternatives``.
    """

    base: Instance
    mu: float
    latent: dict[int, tuple[float, ...]] | None = None

    def __post_init__(self):
        if not self.mu > 0:
            raise NonPositiveScaleError(f"scale must be positive, got {self.mu}")

    def observed_default(self, individual: Individual) -> int:
        """Alternative chosen without policy: realized argmax if noise is known."""
        eps = self.latent.get(individual.individual_id) if self.latent else None
        best_key = best = None
        for n, alt in enumerate(individual.alternatives):
            u = alt.utility + (eps[n] if eps is not None else 0.0)
            key = (u, alt.social, -alt.alt_id)
            if best_key is None or key > best_key:
                best_key, best = key, alt.alt_id
        return best


@dataclass(frozen=True)
class Proposal:
    individual_id: int
    alt_id: int
    amount: float
    accepted: bool


@dataclass(frozen=True)
class SimulationReport:
    proposals: tuple[Proposal, ...]
    budget_spent: float
    welfare_gain: float
    granted: dict[int, tuple[int, float]] = field(default_factory=dict)

    @property
    def n_proposed(self) -> int:
        return len(self.proposals)

    @property
    def n_accepted(self) -> int:
        return sum(p.accepted for p in self.proposals)

    @property
    def acceptance_rate(self) -> float:
        return self.n_accepted / self.n_proposed if self.proposals else 0.0

    @property
    def chosen(self) -> dict[int, int]:
        return {i: alt for i, (alt, _) in self.granted.items()}

    def to_dict(self) -> dict:
        return {
            "budget_spent": self.budget_spent,
            "welfare_gain": self.welfare_gain,
            "incentives_proposed": self.n_proposed,
            "incentives_accepted": self.n_accepted,
            "acceptance_rate": self.acceptance_rate,
            "proposals": [
                {"individual": p.individual_id, "alternative": p.alt_id,
                 "amount": p.amount, "accepted": p.accepted}
                for p in self.proposals
            ],
        }


def stochastic_weights(instance: StochasticInstance) -> dict[tuple[int, int], float]:
    """Offer amount for every (individual, alternative), default included."""
    out = {}
    for ind in instance.base.individuals:
        d = ind.alternative(instance.observed_default(ind))
        for alt in ind.alternatives:
            out[(ind.individual_id, alt.alt_id)] = _offer(d.utility, alt.utility, instance.mu)
    return out


def _offer(v_default: float, v_alt: float, mu: float) -> float:
    # the closed form is >= the utility gap; enforce it against rounding
    return max(gumbel_expected_incentive(v_default - v_alt, mu),
               inducing_weight(v_default, v_alt))


def stochastic_chains(instance: StochasticInstance) -> list[LpExtremeChain]:
    chains = []
    for ind in instance.base.individuals:
        d_id = instance.observed_default(ind)
        d = ind.alternative(d_id)
        pts = [
            (alt.alt_id,
             0.0 if alt.alt_id == d_id else _offer(d.utility, alt.utility, instance.mu),
             alt.social)
            for alt in ind.alternatives
        ]
        chains.append(hull_chain(ind.individual_id, d_id, pts))
    return chains


def draw_latent(instance: Instance, mu: float, seed) -> dict[int, tuple[float, ...]]:
    """Unconditioned Gumbel(scale ``mu``) draws, one substream per individual."""
    root = np.random.SeedSequence(seed)
    children = root.spawn(len(instance.individuals))
    out = {}
    for ind, child in zip(instance.individuals, children):
        rng = np.random.default_rng(child)
        out[ind.individual_id] = tuple(rng.gumbel(0.0, mu, len(ind.alternatives)).tolist())
    return out


def simulate_sequential(instance: StochasticInstance, budget: float, seed=None
                        ) -> SimulationReport:
    """Propose offers in greedy order and let individuals respond.

    Offers are the full expected gap for the proposed alternative.  An
    individual accepts when the offer makes that alternative at least as
    good as what they currently hold.  Accepting an upgrade refunds the
    previous grant; refusing keeps it.  Proposing stops at the first offer
    whose net cost exceeds the remaining budget.
    """
    if budget < 0:
        raise NegativeBudgetError(f"budget must be non-negative, got {budget}")
    if instance.latent is None:
        if seed is None:
            raise ValueError("latent draws absent and no seed to generate them")
        instance = StochasticInstance(instance.base, instance.mu,
                                      draw_latent(instance.base, instance.mu, seed))

    chains = stochastic_chains(instance)
    by_id = {c.individual_id: c for c in chains}
    heap = [(-c.entries[1].incr_efficiency, c.individual_id, 1)
            for c in chains if len(c.entries) > 1]
    heapq.heapify(heap)

    latent_u = {}
    for ind in instance.base.individuals:
        eps = instance.latent[ind.individual_id]
        latent_u[ind.individual_id] = {
            alt.alt_id: alt.utility + e for alt, e in zip(ind.alternatives, eps)}

    holding = {}   # individual -> (alt_id, granted amount, entitlement, social)
    proposals = []
    spent = 0.0
    gain = 0.0
    while heap:
        _, iid, pos = heap[0]
        chain = by_id[iid]
        entry = chain.entries[pos]
        default_id = chain.entries[0].alt_id
        _, granted, entitled, held_social = holding.get(
            iid, (default_id, 0.0, latent_u[iid][default_id], chain.entries[0].social))
        amount = entry.weight
        net = amount - granted
        if spent + net > budget:
            break
        heapq.heappop(heap)
        accepted = latent_u[iid][entry.alt_id] + amount >= entitled
        if accepted:
            spent += net
            # same accumulation order as the deterministic solver
            gain += entry.social - held_social
            holding[iid] = (entry.alt_id, amount, latent_u[iid][entry.alt_id] + amount,
                            entry.social)
        proposals.append(Proposal(iid, entry.alt_id, amount, accepted))
        if pos + 1 < len(chain.entries):
            heapq.heappush(heap, (-chain.entries[pos + 1].incr_efficiency, iid, pos + 1))

    granted = {iid: (alt, amt) for iid, (alt, amt, _, _) in holding.items()}
    return SimulationReport(tuple(proposals), spent, gain, granted)


def conditional_gumbel_draws(utilities: Sequence[float], observed_default: int, mu: float,
                             seed=None, batch: int = 4096,
                             max_rejections: int = MAX_REJECTIONS) -> np.ndarray:
    """Gumbel draws conditioned on ``observed_default`` being the strict argmax.

    ``observed_default`` is a position in ``utilities``.  Rejection sampling:
    whole vectors are redrawn until the constraint holds.
    """
    if not mu > 0:
        raise NonPositiveScaleError(f"scale must be positive, got {mu}")
    v = np.asarray(utilities, dtype=float)
    n = v.size
    if not 0 <= observed_default < n:
        raise IndexError(f"default position {observed_default} outside 0..{n - 1}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    others = np.arange(n) != observed_default
    rejected = 0
    while rejected < max_rejections:
        size = min(batch, max_rejections - rejected)
        eps = rng.gumbel(0.0, mu, size=(size, n))
        total = v + eps
        ok = np.all(total[:, [observed_default]] > total[:, others], axis=1)
        hits = np.flatnonzero(ok)
        if hits.size:
            return eps[hits[0]]
        rejected += size
    raise ImprobableDefaultError(
        f"no draw made position {observed_default} the argmax after {max_rejections} tries")
