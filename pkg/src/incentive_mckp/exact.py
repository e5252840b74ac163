"""Exact optima for small instances, used as test oracles.

Both oracles work on the original alternative sets, not on LP-extreme
chains, so they stay independent of the concavization code they check.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import InstanceTooLargeError, NegativeBudgetError, NonGridWeightsError
from .model import Instance, default_alternative, inducing_weight

MAX_ASSIGNMENTS = 10**7
MAX_DP_CELLS = 10**8


def _weights_and_gains(instance: Instance):
    weights, gains, ids = [], [], []
    for ind in instance.individuals:
        d = ind.alternative(default_alternative(ind))
        weights.append(np.array([inducing_weight(d.utility, a.utility) for a in ind.alternatives]))
        gains.append(np.array([a.social - d.social for a in ind.alternatives]))
        ids.append([a.alt_id for a in ind.alternatives])
    return weights, gains, ids


class Enumerator:
    """Tabulates cost and gain of every assignment once, then answers budgets.

    Assignments are laid out in lexicographic order of per-individual
    alternative positions, so the first maximiser is the lexicographically
    smallest one.
    """

    def __init__(self, instance: Instance):
        sizes = [len(ind.alternatives) for ind in instance.individuals]
        total = math.prod(sizes)
        if total > MAX_ASSIGNMENTS:
            raise InstanceTooLargeError(f"{total} assignments exceed {MAX_ASSIGNMENTS}")
        self.instance = instance
        self.sizes = sizes
        weights, gains, self.ids = _weights_and_gains(instance)
        cost = np.zeros(1)
        gain = np.zeros(1)
        for w, g in zip(weights, gains):
            cost = (cost[:, None] + w[None, :]).ravel()
            gain = (gain[:, None] + g[None, :]).ravel()
        self.cost = cost
        self.gain = gain

    def optimum(self, budget: float) -> tuple[float, dict[int, int]]:
        if budget < 0:
            raise NegativeBudgetError(f"budget must be non-negative, got {budget}")
        masked = np.where(self.cost <= budget, self.gain, -np.inf)
        flat = int(np.argmax(masked))
        positions = np.unravel_index(flat, self.sizes) if self.sizes else ()
        assignment = {
            ind.individual_id: self.ids[n][int(p)]
            for n, (ind, p) in enumerate(zip(self.instance.individuals, positions))
        }
        return float(masked[flat]), assignment

    def welfare(self, budget: float) -> float:
        return self.optimum(budget)[0]


def enumerate_optimal(instance: Instance, budget: float) -> tuple[float, dict[int, int]]:
    """Best welfare gain (and an assignment reaching it) under ``budget``."""
    return Enumerator(instance).optimum(budget)


def dp_optimal(instance: Instance, budget: float, grid: float = 1.0) -> float:
    """Multiple-choice knapsack dynamic program on weights rounded to ``grid``."""
    if budget < 0:
        raise NegativeBudgetError(f"budget must be non-negative, got {budget}")
    weights, gains, _ = _weights_and_gains(instance)
    capacity = int(math.floor(budget / grid + 1e-9))
    if (capacity + 1) * max(len(instance.individuals), 1) > MAX_DP_CELLS:
        raise InstanceTooLargeError(f"capacity {capacity} too large for the DP")
    best = np.zeros(capacity + 1)
    for w, g in zip(weights, gains):
        units = np.rint(w / grid)
        if np.any(np.abs(units * grid - w) > 1e-9):
            raise NonGridWeightsError(f"weights {w.tolist()} are not multiples of {grid}")
        new = np.full(capacity + 1, -np.inf)
        for u, gj in zip(units.astype(int), g):
            if u > capacity:
                continue
            shifted = np.full(capacity + 1, -np.inf)
            shifted[u:] = best[: capacity + 1 - u] + gj
            np.maximum(new, shifted, out=new)
        best = new
    return float(best[capacity])
