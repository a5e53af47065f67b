"""Meyerson's online facility location with one distance query per point."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .metric import MetricInstance, PreferenceProfile, QueryLedger, Solution, distance_to_set


@dataclass(frozen=True)
class FacilityConfig:
    f: float
    permutation_seed: int | None = None

    def __post_init__(self):
        if not self.f > 0:
            raise ValueError(f"opening cost must be positive, got {self.f}")


def meyerson(instance: MetricInstance, profile: PreferenceProfile, config: FacilityConfig,
             ledger: QueryLedger | None = None, rng: np.random.Generator | None = None) -> Solution:
    """Process points in random order; open ``x`` with probability ``min(1, d(x, C) / f)``.

    The nearest open facility comes from ``x``'s ranking, so each point after
    the first costs one query. Points already open are skipped.
    """
    ledger = QueryLedger() if ledger is None else ledger
    if rng is None:
        rng = np.random.default_rng(config.permutation_seed)
    order = rng.permutation(instance.n)
    C = [int(order[0])]
    for x in order[1:]:
        x = int(x)
        if x in C:
            continue
        d, _ = distance_to_set(ledger, profile, instance, x, C)
        if d > 0 and rng.random() < min(1.0, d / config.f):
            C.append(x)
    return Solution(tuple(C), "facility", ledger.count, {"f": config.f, "order": order.tolist()})
