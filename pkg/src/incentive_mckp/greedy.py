"""Greedy solver for the budget-constrained incentive problem.

Chain items of all individuals are consumed in globally decreasing
incremental efficiency.  A max-heap holds the next unconsumed item of each
individual; since efficiencies strictly decrease along a chain, popping the
heap respects chain order.  The first item that does not fit in the
remaining budget is the split item and terminates the run.
"""
from __future__ import annotations

import bisect
import csv
import heapq
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

from .concavize import LpExtremeChain, build_chains
from .errors import (
    BudgetDecreasedError,
    IterationOutOfRangeError,
    NegativeBudgetError,
    SpendOutOfRangeError,
)
from .model import Instance, Policy


class Criterion(Enum):
    OVERALL = "overall"
    INCREMENTAL = "incremental"


@dataclass(frozen=True, slots=True)
class LogEntry:
    k: int
    individual_id: int
    alt_id: int
    incr_weight: float
    incr_social: float
    incr_efficiency: float
    tot_incentive: float
    welfare_gain: float


@dataclass(frozen=True)
class WelfareCurve:
    """Step function: value at ``spend`` is the gain of the last breakpoint <= spend."""

    breakpoints: tuple[tuple[float, float], ...]

    def __call__(self, spend: float) -> float:
        spends = [b[0] for b in self.breakpoints]
        idx = bisect.bisect_right(spends, spend) - 1
        return self.breakpoints[max(idx, 0)][1]


@dataclass(frozen=True)
class GreedyResult:
    budget: float
    positions: dict[int, int]
    iteration_log: tuple[LogEntry, ...]
    budget_used: float
    welfare_gain: float
    split_item: tuple[int, int] | None
    split_incr_efficiency: float | None
    split_incr_weight: float | None
    max_step_size: float
    chains: tuple[LpExtremeChain, ...] = field(repr=False, compare=False)

    @property
    def characteristic_incr_efficiency(self) -> float | None:
        return self.split_incr_efficiency

    @property
    def assignment(self) -> dict[int, int]:
        """Individual id -> induced alternative, for individuals moved off the default."""
        by_id = self._chain_index()
        return {i: by_id[i].entries[p].alt_id for i, p in self.positions.items()}

    @property
    def incentive_policy(self) -> Policy:
        by_id = self._chain_index()
        transfers = {}
        for i, p in self.positions.items():
            entry = by_id[i].entries[p]
            transfers[(i, entry.alt_id)] = entry.weight
        return Policy(transfers)

    @property
    def curve(self) -> WelfareCurve:
        pts = [(0.0, 0.0)] + [(e.tot_incentive, e.welfare_gain) for e in self.iteration_log]
        return WelfareCurve(tuple(pts))

    def _chain_index(self) -> dict[int, LpExtremeChain]:
        return {c.individual_id: c for c in self.chains}


def _heap_key(chain: LpExtremeChain, pos: int):
    entry = chain.entries[pos]
    return (-entry.incr_efficiency, chain.individual_id, pos)


def _run(chains: Sequence[LpExtremeChain], budget: float, positions: dict[int, int],
         log: list[LogEntry], tot: float, gain: float, max_step: float,
         accept: Callable[[float, float, float, float], bool]) -> GreedyResult:
    """Continue the greedy loop from a given state.

    ``accept(tot, gain, incr_weight, incr_social)`` decides whether the next
    item may be taken; the first refused item becomes the split item.
    """
    by_id = {c.individual_id: c for c in chains}
    heap = []
    for c in chains:
        nxt = positions.get(c.individual_id, 0) + 1
        if nxt < len(c.entries):
            heap.append((*_heap_key(c, nxt), c.individual_id))
    heapq.heapify(heap)

    split = split_eff = split_w = None
    while heap:
        neg_eff, _, pos, iid = heap[0]
        chain = by_id[iid]
        entry = chain.entries[pos]
        dw, ds = entry.incr_weight, entry.incr_social
        assert dw > 0 and ds > 0
        if not accept(tot, gain, dw, ds):
            split, split_eff, split_w = (iid, entry.alt_id), entry.incr_efficiency, dw
            max_step = max(max_step, dw)
            break
        heapq.heappop(heap)
        tot += dw
        gain += ds
        max_step = max(max_step, dw)
        positions[iid] = pos
        log.append(LogEntry(len(log) + 1, iid, entry.alt_id, dw, ds,
                            entry.incr_efficiency, tot, gain))
        if pos + 1 < len(chain.entries):
            heapq.heappush(heap, (*_heap_key(chain, pos + 1), iid))

    return GreedyResult(
        budget=budget,
        positions=positions,
        iteration_log=tuple(log),
        budget_used=tot,
        welfare_gain=gain,
        split_item=split,
        split_incr_efficiency=split_eff,
        split_incr_weight=split_w,
        max_step_size=max_step,
        chains=tuple(chains),
    )


def _budget_rule(budget):
    return lambda tot, gain, dw, ds: tot + dw <= budget


def solve_chains(chains: Sequence[LpExtremeChain], budget: float) -> GreedyResult:
    if budget < 0:
        raise NegativeBudgetError(f"budget must be non-negative, got {budget}")
    return _run(chains, budget, {}, [], 0.0, 0.0, 0.0, _budget_rule(budget))


def solve(instance: Instance, budget: float) -> GreedyResult:
    """Run the greedy allocation with the given incentive budget."""
    if budget < 0:
        raise NegativeBudgetError(f"budget must be non-negative, got {budget}")
    return solve_chains(build_chains(instance), budget)


def resume(result: GreedyResult, instance: Instance | None, new_budget: float) -> GreedyResult:
    """Extend a previous run to a larger budget without starting over.

    The chains stored in ``result`` are reused; ``instance`` is accepted for
    symmetry with :func:`solve` and only used if the result carries no chains.
    """
    if new_budget < result.budget:
        raise BudgetDecreasedError(
            f"new budget {new_budget} is below the previous budget {result.budget}")
    chains = result.chains if result.chains else tuple(build_chains(instance))
    # the split item's step is re-added if it is taken or becomes the split again
    max_step = max((e.incr_weight for e in result.iteration_log), default=0.0)
    return _run(chains, new_budget, dict(result.positions), list(result.iteration_log),
                result.budget_used, result.welfare_gain, max_step, _budget_rule(new_budget))


def solve_until_inverse_efficiency(instance: Instance, target_inverse: float,
                                   criterion: Criterion | str = Criterion.INCREMENTAL
                                   ) -> GreedyResult:
    """Greedy run with unlimited budget, stopped on an inverse-efficiency target.

    Stops before the first item whose inverse incremental efficiency
    (``INCREMENTAL``) or whose resulting inverse overall efficiency
    (``OVERALL``) would exceed ``target_inverse``.  The returned result has
    ``budget == budget_used``.
    """
    if not target_inverse > 0:
        raise ValueError("target_inverse must be positive")
    criterion = Criterion(criterion)
    if criterion is Criterion.INCREMENTAL:
        def accept(tot, gain, dw, ds):
            return dw <= target_inverse * ds
    else:
        def accept(tot, gain, dw, ds):
            return tot + dw <= target_inverse * (gain + ds)
    res = _run(build_chains(instance), math.inf, {}, [], 0.0, 0.0, 0.0, accept)
    return _with_budget(res, res.budget_used)


def _with_budget(result: GreedyResult, budget: float) -> GreedyResult:
    return GreedyResult(budget, result.positions, result.iteration_log, result.budget_used,
                        result.welfare_gain, result.split_item, result.split_incr_efficiency,
                        result.split_incr_weight, result.max_step_size, result.chains)


def optimality_gap_bound(result: GreedyResult, budget: float | None = None) -> float:
    """Upper bound on (optimal welfare - greedy welfare) at ``budget``."""
    budget = result.budget if budget is None else budget
    if result.split_incr_efficiency is None:
        return 0.0
    return result.split_incr_efficiency * (budget - result.budget_used)


def _efficiency_after(result: GreedyResult, k: int) -> float:
    log = result.iteration_log
    if k < len(log):
        return log[k].incr_efficiency
    return result.split_incr_efficiency or 0.0


def welfare_upper_bound_at(result: GreedyResult, k: int, budget: float) -> float:
    """Bound on the welfare reachable at ``budget`` when stopping after iteration ``k``."""
    log = result.iteration_log
    if not 0 <= k <= len(log):
        raise IterationOutOfRangeError(f"iteration {k} outside 0..{len(log)}")
    tot, gain = (0.0, 0.0) if k == 0 else (log[k - 1].tot_incentive, log[k - 1].welfare_gain)
    return gain + _efficiency_after(result, k) * (budget - tot)


def curve_query(result: GreedyResult, spend: float) -> float:
    if spend < 0 or spend > result.budget:
        raise SpendOutOfRangeError(f"spend {spend} outside [0, {result.budget}]")
    return result.curve(spend)


def policy_at_iteration(result: GreedyResult, k: int) -> Policy:
    """Incentive policy obtained by stopping the run after ``k`` iterations."""
    log = result.iteration_log
    if not 0 <= k <= len(log):
        raise IterationOutOfRangeError(f"iteration {k} outside 0..{len(log)}")
    by_id = {c.individual_id: c for c in result.chains}
    chosen = {}
    for e in log[:k]:
        chosen[e.individual_id] = e.alt_id
    transfers = {}
    for iid, alt_id in chosen.items():
        w = next(en.weight for en in by_id[iid].entries if en.alt_id == alt_id)
        transfers[(iid, alt_id)] = w
    return Policy(transfers)


def overall_efficiencies(result: GreedyResult) -> list[float]:
    return [e.welfare_gain / e.tot_incentive for e in result.iteration_log]


def write_curve_csv(result: GreedyResult, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["spend", "welfare_gain"])
        for spend, gain in result.curve.breakpoints:
            writer.writerow([repr(float(spend)), repr(float(gain))])


def read_curve_csv(path) -> WelfareCurve:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return WelfareCurve(tuple((float(r["spend"]), float(r["welfare_gain"])) for r in reader))


LOG_HEADER = ["k", "individual", "alternative", "incr_weight", "incr_social",
              "incr_efficiency", "tot_incentive", "welfare_gain"]


def write_log_csv(result: GreedyResult, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(LOG_HEADER)
        for e in result.iteration_log:
            writer.writerow([e.k, e.individual_id, e.alt_id, repr(e.incr_weight),
                             repr(e.incr_social), repr(e.incr_efficiency),
                             repr(e.tot_incentive), repr(e.welfare_gain)])
