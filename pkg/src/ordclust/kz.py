"""(k,z)-clustering from ordinal information: ring partitions and adaptive sampling.

A cluster (minus its center) is split into rings by distance rank from the
center: the farthest point alone, then the next 2, 4, ... farthest points,
and everything closer in one innermost ring. Sampling uniformly inside a ring
gives every point at least its D++_z probability without knowing distances.
With one query per ring the ring costs can be overestimated, which is enough to
emulate D++ sampling to within a factor of two.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kcenter import kcenter_2k_query, kcenter_zero_query
from .metric import (
    MetricInstance,
    PreferenceProfile,
    QueryLedger,
    Solution,
    assign,
    distinct_in_order,
    induced_clustering,
    point_costs,
    query_distance,
)
from .oracle import brute_force_opt


@dataclass(frozen=True)
class RingPartition:
    """Rings of ``S`` around ``center``, innermost first; the last ring is the farthest point."""

    center: int
    rings: tuple[np.ndarray, ...]

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(r) for r in self.rings)

    def __len__(self) -> int:
        return len(self.rings)


def _outer_sizes(m: int) -> list[int]:
    ell = m.bit_length() - 1
    if ell == 0:
        return []
    if ell == 1:
        return [1]
    return [2 ** (ell - j) for j in range(ell, 1, -1)]


def ring_partition(profile: PreferenceProfile, c: int, S) -> RingPartition:
    S = np.asarray(list(S) if not isinstance(S, np.ndarray) else S, dtype=np.int64)
    if S.size == 0:
        raise ValueError("cannot partition an empty set")
    ordered = S[np.argsort(profile.rank[c, S], kind="stable")]
    rings = []
    end = len(ordered)
    for size in _outer_sizes(len(ordered)):
        rings.append(ordered[end - size:end])
        end -= size
    rings.append(ordered[:end])
    return RingPartition(int(c), tuple(reversed(rings)))


def cluster_rings(profile: PreferenceProfile, centers) -> list[RingPartition]:
    """Ring partitions of every cluster induced by ``centers`` (centers excluded)."""
    out = []
    for c, members in induced_clustering(profile, centers).items():
        rest = members[members != c]
        if rest.size:
            out.append(ring_partition(profile, c, rest))
    return out


def draws_per_ring(k: int, log_base: float = 2.0) -> int:
    return max(1, math.ceil(7 * math.log(k, log_base))) if k > 1 else 1


def dppz_probabilities(instance: MetricInstance, centers, z: float = 1.0) -> np.ndarray | None:
    """Exact D++_z distribution given the centers, or None when every point is covered."""
    d = point_costs(instance, centers)
    m = float(d.max())
    if m == 0:
        return None
    w = (d / m) ** z
    return w / w.sum()


def sample_dppz(instance: MetricInstance, centers, z: float, rng: np.random.Generator) -> int | None:
    p = dppz_probabilities(instance, centers, z)
    if p is None:
        return None
    return int(rng.choice(instance.n, p=p))


def ring_inclusion_probabilities(profile: PreferenceProfile, centers) -> np.ndarray:
    """Probability that one uniform draw from its ring hits each point (0 on centers)."""
    out = np.zeros(profile.n)
    for part in cluster_rings(profile, centers):
        for ring in part.rings:
            out[ring] = 1.0 / len(ring)
    return out


def zero_query_sampler_pass(instance: MetricInstance, profile: PreferenceProfile, centers,
                            rng: np.random.Generator, k: int, draws: int | None = None,
                            log_base: float = 2.0) -> list[int]:
    """One adaptive pass: ``draws`` uniform picks (with replacement) from every ring."""
    draws = draws_per_ring(k, log_base) if draws is None else draws
    picked = []
    for part in cluster_rings(profile, centers):
        for ring in part.rings:
            picked.extend(ring[rng.integers(0, len(ring), size=draws)].tolist())
    have = set(int(c) for c in centers)
    return [p for p in distinct_in_order(picked) if p not in have]


def _augment(instance, profile, k, augment, ledger):
    if augment == "zero":
        return list(kcenter_zero_query(instance, profile, k).centers)
    if augment == "2k":
        if k < 2:
            return [0]
        return list(kcenter_2k_query(instance, profile, min(k, instance.n), ledger).centers)
    raise ValueError(f"unknown augmentation {augment!r}")


def _sampler_run(instance, profile, k, rng, passes, draws, log_base, trace, tag):
    C = [int(rng.integers(instance.n))]
    for p in range(passes):
        if trace is not None:
            trace.append({"run": tag, "pass": p, "centers": list(C)})
        C += zero_query_sampler_pass(instance, profile, C, rng, k, draws, log_base)
    return C


def kz_zero_query(instance: MetricInstance, profile: PreferenceProfile, k: int, z: float,
                  rng: np.random.Generator, *, passes: int | None = None, augment: str = "zero",
                  ledger: QueryLedger | None = None, log_base: float = 2.0,
                  trace: list | None = None) -> Solution:
    """Bicriteria (k,z) sampler that uses no queries (with ``augment='zero'``).

    Starts from a uniform point, runs ``passes`` (default ``k-1``) ring-sampling
    passes and finally adds a k-center solution to bound the worst case.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    n = instance.n
    if n == 1:
        return Solution((0,), "kz", meta={"z": z})
    ledger = QueryLedger() if ledger is None else ledger
    passes = k - 1 if passes is None else passes
    C = _sampler_run(instance, profile, k, rng, passes, None, log_base, trace, 0)
    C = distinct_in_order(C + _augment(instance, profile, k, augment, ledger))
    return Solution(tuple(C), "kz", ledger.count, {"z": z, "passes": passes})


def kz_zero_query_amplified(instance: MetricInstance, profile: PreferenceProfile, k: int, z: float,
                            rng: np.random.Generator, *, passes: int | None = None,
                            repetitions: int | None = None, augment: str = "zero",
                            ledger: QueryLedger | None = None, log_base: float = 2.0,
                            trace: list | None = None) -> Solution:
    """Union of ``log n`` independent sampler runs plus the k-center augmentation."""
    if k < 2:
        raise ValueError("k must be at least 2")
    n = instance.n
    if n == 1:
        return Solution((0,), "kz", meta={"z": z})
    ledger = QueryLedger() if ledger is None else ledger
    passes = k - 1 if passes is None else passes
    reps = max(1, math.ceil(math.log(n, log_base))) if repetitions is None else repetitions
    C: list[int] = []
    for r in range(reps):
        C += _sampler_run(instance, profile, k, rng, passes, None, log_base, trace, r)
    C = distinct_in_order(C + _augment(instance, profile, k, augment, ledger))
    return Solution(tuple(C), "kz", ledger.count, {"z": z, "passes": passes, "repetitions": reps})


def estimated_ring_cost(ledger: QueryLedger, profile: PreferenceProfile, instance: MetricInstance,
                        part: RingPartition, j: int, z: float = 1.0) -> float:
    """``|ring j| * d(center, nearest point of ring j+1)**z`` with one query.

    The outermost ring has no outer neighbour and uses its own farthest point,
    so every estimate bounds the ring's true cost from above.
    """
    rings = part.rings
    ring = rings[j]
    if ring.size == 0:
        raise ValueError("empty ring")
    c = part.center
    if j + 1 < len(rings):
        nxt = rings[j + 1]
        probe = int(nxt[np.argmin(profile.rank[c, nxt])])
    else:
        probe = int(ring[np.argmax(profile.rank[c, ring])])
    return len(ring) * query_distance(ledger, instance, c, probe) ** z


def estimated_probabilities(ledger: QueryLedger, profile: PreferenceProfile, instance: MetricInstance,
                            centers, z: float = 1.0):
    """Emulated D++ distribution: ring estimate spread uniformly inside the ring.

    Returns ``(p_hat, ring_costs)`` or ``(None, ring_costs)`` when every
    estimate is zero. ``ring_costs`` lists ``(center, ring sizes, estimates)``.
    """
    p_hat = np.zeros(instance.n)
    ring_costs = []
    for part in cluster_rings(profile, centers):
        ests = [estimated_ring_cost(ledger, profile, instance, part, j, z) for j in range(len(part))]
        ring_costs.append((part.center, part.sizes, ests))
        for ring, est in zip(part.rings, ests):
            p_hat[ring] = est / len(ring)
    total = p_hat.sum()
    if total == 0:
        return None, ring_costs
    return p_hat / total, ring_costs


def default_rounds(n: int, k: int, log_base: float = 2.0) -> int:
    return max(1, math.ceil(40 * k * math.log(max(n, 2), log_base)))


def kmedian_low_query(instance: MetricInstance, profile: PreferenceProfile, k: int, z: float,
                      ledger: QueryLedger | None, rng: np.random.Generator, T: int | None = None,
                      *, reduce: bool = True, log_base: float = 2.0, trace: list | None = None) -> Solution:
    """(k,z)-clustering with few queries by emulating D++ sampling for ``T`` rounds.

    Starts from the 2k-query k-center solution plus a uniform point. In each
    round every point joins with probability ``min(1, T * p_hat)``. With
    ``reduce`` the sampled set is weighted by cluster sizes and re-solved
    exactly to ``k`` centers; the pairwise distances this needs are queried.
    """
    n = instance.n
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}")
    T = default_rounds(n, k, log_base) if T is None else T
    if T <= 0:
        raise ValueError("T must be positive")
    ledger = QueryLedger() if ledger is None else ledger
    C = list(kcenter_2k_query(instance, profile, k, ledger).centers) if k >= 2 else [0]
    init_queries = ledger.count
    C = distinct_in_order(C + [int(rng.integers(n))])
    rounds = 0
    for t in range(T):
        if len(C) == n:
            break
        p_hat, ring_costs = estimated_probabilities(ledger, profile, instance, C, z)
        if p_hat is None:
            break
        rounds += 1
        if trace is not None:
            trace.append({"round": t, "centers": list(C), "p_hat": p_hat.tolist(),
                          "ring_costs": [[c, list(s), e] for c, s, e in ring_costs]})
        hit = rng.random(n) < np.minimum(1.0, T * p_hat)
        have = set(C)
        C += [int(x) for x in np.flatnonzero(hit) if int(x) not in have]
    sampling_queries = ledger.count - init_queries
    bicriteria = tuple(C)
    meta = {"z": z, "T": T, "rounds": rounds, "bicriteria": bicriteria,
            "init_queries": init_queries, "sampling_queries": sampling_queries}
    if not reduce or len(C) <= k:
        return Solution(bicriteria, "kz", ledger.count, meta)
    weights = np.bincount(assign(profile, C), minlength=len(C))
    for i, a in enumerate(C):
        for b in C[i + 1:]:
            query_distance(ledger, instance, a, b)
    reduced, _ = brute_force_opt(instance, k, z, weights=weights, candidates=C)
    meta["reduction_queries"] = ledger.count - init_queries - sampling_queries
    return Solution(reduced.centers, "kz", ledger.count, meta)


def covered_clusters(instance: MetricInstance, centers, opt_centers, z: float = 1.0,
                     factor: float = 10.0) -> dict[int, bool]:
    """For each optimal center, whether ``centers`` serve its cluster within ``factor`` of optimal.

    Costs are compared as ``z``-th power sums, so ``factor`` applies to the
    cluster cost itself rather than its ``z``-th power.
    """
    opt = np.asarray(opt_centers, dtype=np.int64)
    d = instance.dist
    label = np.argmin(d[:, opt], axis=1)
    cur = point_costs(instance, centers) ** z
    best = d[np.arange(instance.n), opt[label]] ** z
    out = {}
    for i, c in enumerate(opt.tolist()):
        members = label == i
        out[c] = bool(cur[members].sum() <= factor**z * best[members].sum())
    return out


def uncovered_mass(instance: MetricInstance, centers, opt_centers, z: float = 1.0,
                   factor: float = 10.0) -> float:
    """D++_z probability of drawing a point from a cluster that is not yet covered."""
    p = dppz_probabilities(instance, centers, z)
    if p is None:
        return 0.0
    opt = np.asarray(opt_centers, dtype=np.int64)
    label = np.argmin(instance.dist[:, opt], axis=1)
    cov = covered_clusters(instance, centers, opt_centers, z, factor)
    bad = np.array([not cov[int(opt[i])] for i in label])
    return float(p[bad].sum())
