"""Reduction of each individual's alternatives to the ordered LP-extreme chain.

The chain is the upper-left convex hull of the ``(weight, social)`` points,
starting at the default alternative ``(0, s_default)``.  Along the chain the
weights and socials strictly increase and the incremental efficiencies
strictly decrease.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Sequence

from .model import Individual, Instance, default_alternative, inducing_weight


@dataclass(frozen=True, slots=True)
class ChainEntry:
    alt_id: int
    weight: float
    social: float
    incr_weight: float
    incr_social: float
    incr_efficiency: float | None  # None for the default alternative


@dataclass(frozen=True, slots=True)
class LpExtremeChain:
    individual_id: int
    entries: tuple[ChainEntry, ...]

    def __len__(self):
        return len(self.entries)

    @property
    def default(self) -> ChainEntry:
        return self.entries[0]

    def alt_ids(self) -> list[int]:
        return [e.alt_id for e in self.entries]


def _points(individual: Individual) -> list[tuple[int, float, float]]:
    d = individual.alternative(default_alternative(individual))
    return [(a.alt_id, inducing_weight(d.utility, a.utility), a.social) for a in individual.alternatives]


def _to_chain(individual_id, pts) -> LpExtremeChain:
    entries = [ChainEntry(pts[0][0], pts[0][1], pts[0][2], 0.0, 0.0, None)]
    for prev, cur in zip(pts, pts[1:]):
        dw = cur[1] - prev[1]
        ds = cur[2] - prev[2]
        entries.append(ChainEntry(cur[0], cur[1], cur[2], dw, ds, ds / dw))
    return LpExtremeChain(individual_id, tuple(entries))


def hull_chain(individual_id: int, default_id: int,
               points: Sequence[tuple[int, float, float]]) -> LpExtremeChain:
    """Chain from raw ``(alt_id, weight, social)`` points.

    ``default_id`` must name a point of weight 0; it always heads the chain.
    Runs in O(n log n): sort, dominance sweep, then a monotone-chain scan.
    """
    pts = sorted(points, key=lambda p: (p[1], -p[2], p[0] != default_id, p[0]))
    head = pts[0]
    assert head[0] == default_id, "default alternative must have the smallest weight"
    hull = [head]
    top = head[2]
    for p in pts[1:]:
        if p[2] <= top:
            continue  # dominated: no more social for at least the same weight
        top = p[2]
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            # b is LP-dominated when slope(b, p) >= slope(a, b)
            if (p[2] - b[2]) * (b[1] - a[1]) >= (b[2] - a[2]) * (p[1] - b[1]):
                hull.pop()
            else:
                break
        hull.append(p)
    return _to_chain(individual_id, hull)


def lp_extremes(individual: Individual) -> LpExtremeChain:
    return hull_chain(individual.individual_id, default_alternative(individual),
                      _points(individual))


def brute_force_lp_extremes(individual: Individual) -> LpExtremeChain:
    """Definition-level reference: pairwise dominance, then LP-dominance triples."""
    default_id = default_alternative(individual)
    pts = _points(individual)

    def dominates(p, q):
        if p[2] >= q[2] and p[1] <= q[1]:
            if p[1] == q[1] and p[2] == q[2]:
                # identical points: keep the default, else the lowest id
                return p[0] == default_id or (q[0] != default_id and p[0] < q[0])
            return True
        return False

    alive = [q for q in pts if not any(p is not q and dominates(p, q) for p in pts)]

    changed = True
    while changed:
        changed = False
        for b in alive:
            for a in alive:
                for c in alive:
                    if not (a[2] < b[2] < c[2] and a[1] < b[1] < c[1]):
                        continue
                    if (c[2] - b[2]) / (c[1] - b[1]) >= (b[2] - a[2]) / (b[1] - a[1]):
                        alive.remove(b)
                        changed = True
                        break
                if changed:
                    break
            if changed:
                break

    alive.sort(key=lambda p: p[1])
    return _to_chain(individual.individual_id, alive)


def build_chains(instance: Instance) -> list[LpExtremeChain]:
    return [lp_extremes(ind) for ind in instance.individuals]


def dump_chains_csv(chains: Iterable[LpExtremeChain], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["individual", "alternative", "weight", "social", "incr_efficiency"])
        for chain in chains:
            for e in chain.entries:
                eff = "" if e.incr_efficiency is None else repr(e.incr_efficiency)
                writer.writerow([chain.individual_id, e.alt_id, repr(e.weight),
                                 repr(e.social), eff])
