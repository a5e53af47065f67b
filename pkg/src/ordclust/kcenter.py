"""Ordinal k-center via farthest-first traversal.

Three variants: one query per cluster per round (2-distortion), no queries but
``2**(k-1)`` centers (2-distortion bicriteria), and an approximate traversal that
keeps a query set of (center, farthest point) pairs and needs at most ``2k``
queries (4-distortion).
"""
from __future__ import annotations

from .metric import (
    MetricInstance,
    PreferenceProfile,
    QueryLedger,
    Solution,
    farthest_in_set,
    induced_clustering,
    query_distance,
)


def _check_k(k: int, n: int, lo: int = 1) -> None:
    if k < lo:
        raise ValueError(f"k must be at least {lo}")
    if k > n:
        raise ValueError(f"k={k} exceeds the number of points n={n}")


def kcenter_quadratic(instance: MetricInstance, profile: PreferenceProfile, k: int,
                      ledger: QueryLedger | None = None) -> Solution:
    """Farthest-first traversal with one distance query per cluster and round."""
    _check_k(k, instance.n)
    ledger = QueryLedger() if ledger is None else ledger
    C = [0]
    for _ in range(k - 1):
        best = None
        for c, members in induced_clustering(profile, C).items():
            z = farthest_in_set(profile, c, members)
            delta = query_distance(ledger, instance, c, z)
            if z in C:
                continue
            # equal radii go to the smaller center id
            if best is None or delta > best[0] or (delta == best[0] and c < best[1]):
                best = (delta, c, z)
        C.append(best[2])
    return Solution(tuple(C), "kcenter", ledger.count, {"calls": ledger.calls})


def kcenter_zero_query(instance: MetricInstance, profile: PreferenceProfile, k: int) -> Solution:
    """Add the farthest point of every cluster, ``k-1`` times; no queries."""
    if k < 1:
        raise ValueError("k must be at least 1")
    n = profile.n
    target = min(2 ** (k - 1), n)
    if target == n:
        return Solution(tuple(range(n)), "kcenter")
    C = [0]
    for _ in range(k - 1):
        C = C + _farthest_of_each_cluster(profile, C)
    # singleton clusters contribute nothing; top up with further passes
    while len(C) < target:
        C = C + _farthest_of_each_cluster(profile, C)[: target - len(C)]
    return Solution(tuple(C), "kcenter")


def _farthest_of_each_cluster(profile: PreferenceProfile, C: list[int]) -> list[int]:
    new = []
    for c, members in induced_clustering(profile, C).items():
        z = farthest_in_set(profile, c, members)
        if z != c:
            new.append(z)
    return new


def kcenter_2k_query(instance: MetricInstance, profile: PreferenceProfile, k: int,
                     ledger: QueryLedger | None = None, trace: list | None = None) -> Solution:
    """1/2-approximate farthest-first traversal with at most ``2k`` queries.

    ``Q`` holds the centers whose (center, farthest point) distance is known.
    A center stays outside ``Q`` while some ``p`` in ``Q`` dominates it: with
    ``q`` the farthest point of ``p`` and ``w`` the farthest point of ``u``,
    ``d(q, w) <= d(q, p)``. That test is ordinal (two ranks in ``q``'s list).

    When ``trace`` is a list, one dict per iteration is appended to it; see
    :func:`verify_invariant_34` and :func:`fft_ratios`.
    """
    _check_k(k, instance.n, lo=2)
    ledger = QueryLedger() if ledger is None else ledger
    rank = profile.rank
    C = [0]
    Q = [0]
    clusters = induced_clustering(profile, C)
    far = {0: farthest_in_set(profile, 0, clusters[0])}
    known = {0: query_distance(ledger, instance, 0, far[0])}

    for it in range(k - 1):
        # ties in the revealed radius go to the smaller center id
        v = min(Q, key=lambda y: (-known[y], y))
        z = far[v]
        if z in C:
            # every point sits at distance 0 from C; any new point will do
            z = next(x for x in range(profile.n) if x not in C)
        record = None
        if trace is not None:
            record = {"iteration": it, "centers": list(C), "query_set": list(Q),
                      "farthest": {int(y): int(far[y]) for y in Q},
                      "selected_center": int(v), "selected": int(z)}
        C.append(z)
        Q.remove(v)
        clusters = induced_clustering(profile, C)
        far = {c: farthest_in_set(profile, c, members) for c, members in clusters.items()}
        for u in sorted(c for c in C if c not in Q):
            w = far[u]
            dominated = any(rank[far[p], w] <= rank[far[p], p] for p in Q)
            if not dominated:
                Q.append(u)
        if it < k - 2:
            for y in Q:
                known[y] = query_distance(ledger, instance, y, far[y])
        if record is not None:
            record["farthest_after"] = {int(y): int(far[y]) for y in record["query_set"] if y in far}
            record["next_query_set"] = list(Q)
            record["queries"] = ledger.count
            trace.append(record)

    return Solution(tuple(C), "kcenter", ledger.count, {"calls": ledger.calls})


def verify_invariant_34(trace: list[dict]) -> bool:
    """Farthest points of query-set centers survive unless they were promoted.

    For every iteration and every ``y`` in the query set, if the farthest
    point of ``y``'s cluster did not become a center, it is still the
    farthest point of ``y``'s cluster after the new center was added.
    """
    for rec in trace:
        try:
            promoted = set(rec["centers"]) | {rec["selected"]}
            before = {int(y): int(z) for y, z in rec["farthest"].items()}
            after = {int(y): int(z) for y, z in rec["farthest_after"].items()}
            query_set = [int(y) for y in rec["query_set"]]
        except (KeyError, TypeError, AttributeError) as exc:
            raise ValueError(f"malformed trace record: {rec!r}") from exc
        for y in query_set:
            if y not in before:
                raise ValueError(f"trace lacks the farthest point of {y}")
            if before[y] in promoted:
                continue
            if after.get(y) != before[y]:
                return False
    return True


def fft_ratios(instance: MetricInstance, trace: list[dict]) -> list[float]:
    """``d(z, C_i) / max_x d(x, C_i)`` for each traced selection (1.0 when max is 0)."""
    out = []
    for rec in trace:
        C = rec["centers"]
        to_c = instance.dist[:, C].min(axis=1)
        top = float(to_c.max())
        out.append(1.0 if top == 0 else float(to_c[rec["selected"]]) / top)
    return out


__all__ = [
    "kcenter_quadratic",
    "kcenter_zero_query",
    "kcenter_2k_query",
    "verify_invariant_34",
    "fft_ratios",
]
