"""Brute-force full-information optima and distortion."""
from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np

from .metric import MetricInstance, Solution, cost, facility_cost

MAX_SUBSETS = 10**7
MAX_FACILITY_N = 20
_CHUNK = 1 << 16
TIE_RTOL = 1e-12
# near-ties re-evaluated when reporting the optimal value
MAX_TIES = 4096


class OracleBudgetExceeded(RuntimeError):
    pass


def _check_budget(n: int, k: int) -> None:
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    if math.comb(n, k) > MAX_SUBSETS:
        raise OracleBudgetExceeded(f"C({n},{k}) = {math.comb(n, k)} subsets exceeds {MAX_SUBSETS}")


def brute_force_opt(instance: MetricInstance, k: int, z: float = 1.0,
                    weights: Sequence[float] | None = None,
                    candidates: Sequence[int] | None = None) -> tuple[Solution, float]:
    """Exact optimum over all k-subsets of the input points.

    Ties resolve to the lexicographically smallest subset. ``weights`` turns the
    objective into a weighted one (one weight per point); ``candidates``
    restricts both the points and the possible centers to a sub-multiset, which
    is how a weighted center set is re-solved.
    """
    pts = np.arange(instance.n) if candidates is None else np.asarray(candidates, dtype=np.int64)
    n = len(pts)
    _check_budget(n, k)
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    D = instance.dist[np.ix_(pts, pts)]
    if math.isinf(z) and weights is None:
        local = _kcenter_exact(D, k)
        ties = [local]
    else:
        local, ties = _enumerate(D, k, z, w)
    centers = tuple(int(pts[i]) for i in local)
    # report the smallest evaluated cost among near-ties so OPT never exceeds a tied solution by an ulp
    if candidates is None and weights is None:
        value = min(cost(instance, [int(pts[i]) for i in t], z) for t in ties)
    else:
        value = min(power_cost_weighted(D[:, list(t)].min(axis=1), w, z) for t in ties)
    kind = "kcenter" if math.isinf(z) else "kz"
    return Solution(centers, kind, meta={"z": z}), value


def power_cost_weighted(values: np.ndarray, w: np.ndarray, z: float) -> float:
    if math.isinf(z):
        return float(values[w > 0].max(initial=0.0))
    m = float(values.max(initial=0.0))
    if m == 0:
        return 0.0
    if z == 1:
        return float(np.dot(w, values))
    return m * float(np.dot(w, (values / m) ** z)) ** (1.0 / z)


def _enumerate(D: np.ndarray, k: int, z: float, w: np.ndarray):
    """Lexicographically first optimal subset and every subset within ``TIE_RTOL`` of it."""
    n = D.shape[0]
    scale = float(D.max()) or 1.0
    Dz = D if math.isinf(z) else (D / scale) ** z
    best_val, best = math.inf, None
    ties: list[tuple[int, ...]] = []
    combos = itertools.combinations(range(n), k)
    while True:
        chunk = np.fromiter(itertools.chain.from_iterable(itertools.islice(combos, _CHUNK)),
                            dtype=np.int64)
        if chunk.size == 0:
            break
        chunk = chunk.reshape(-1, k)
        near = Dz[chunk[:, 0]]
        for j in range(1, k):
            near = np.minimum(near, Dz[chunk[:, j]])
        if math.isinf(z):
            vals = (near * (w > 0)).max(axis=1)
        else:
            vals = near @ w
        low = float(vals.min())
        # values within TIE_RTOL are ties; the earliest subset wins
        i = int(np.flatnonzero(vals <= low + TIE_RTOL * abs(low))[0])
        if best is None or vals[i] < best_val - TIE_RTOL * abs(best_val):
            best_val, best = float(vals[i]), tuple(int(c) for c in chunk[i])
        close = np.flatnonzero(vals <= best_val + TIE_RTOL * abs(best_val))
        ties += [(float(vals[j]), tuple(int(c) for c in chunk[j])) for j in close[:MAX_TIES - len(ties)]]
    limit = best_val + TIE_RTOL * abs(best_val)
    return best, [t for v, t in ties if v <= limit]


def _kcenter_exact(D: np.ndarray, k: int) -> tuple[int, ...]:
    """Bottleneck search over candidate radii, then lexicographic DFS at the optimum.

    Pruning only discards partial subsets that cannot be completed to a cover
    at the optimal radius, so the first complete subset found in
    lexicographic order is the one plain enumeration would return.
    """
    n = D.shape[0]
    radii = np.unique(D)

    def covers(r):
        return [sum(1 << int(j) for j in np.flatnonzero(D[i] <= r)) for i in range(n)]

    def feasible(cov, uncovered, budget, lo):
        if uncovered == 0:
            return True
        if budget == 0:
            return False
        p = (uncovered & -uncovered).bit_length() - 1
        return any(cov[c] >> p & 1 and feasible(cov, uncovered & ~cov[c], budget - 1, lo)
                   for c in range(lo, n))

    full = (1 << n) - 1
    lo, hi = 0, len(radii) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(covers(radii[mid]), full, k, 0):
            hi = mid
        else:
            lo = mid + 1
    cov = covers(radii[lo])

    def first(prefix, uncovered, start):
        if len(prefix) == k:
            return tuple(prefix) if uncovered == 0 else None
        for c in range(start, n - (k - len(prefix)) + 1):
            rest = uncovered & ~cov[c]
            if feasible(cov, rest, k - len(prefix) - 1, c + 1):
                found = first(prefix + [c], rest, c + 1)
                if found is not None:
                    return found
        return None

    return first([], full, 0)


def brute_force_facility_opt(instance: MetricInstance, f: float) -> tuple[Solution, float]:
    """Exact facility-location optimum over all nonempty center subsets."""
    n = instance.n
    if n > MAX_FACILITY_N:
        raise OracleBudgetExceeded(f"facility oracle limited to n <= {MAX_FACILITY_N}")
    if f <= 0:
        raise ValueError("opening cost must be positive")
    D = instance.dist
    best_val, best_mask = math.inf, None
    bits = np.arange(n)
    step = max(1, (1 << 22) // (n * n))
    for start in range(1, 1 << n, step):
        masks = np.arange(start, min(start + step, 1 << n), dtype=np.int64)
        member = (masks[:, None] >> bits[None, :]) & 1 == 1
        near = np.where(member[:, :, None], D[None, :, :], np.inf).min(axis=1)
        vals = near.sum(axis=1) + f * member.sum(axis=1)
        # ties: smallest mask value, i.e. earliest in this scan
        i = int(np.argmin(vals))
        if vals[i] < best_val:
            best_val, best_mask = float(vals[i]), int(masks[i])
    centers = tuple(j for j in range(n) if best_mask >> j & 1)
    return Solution(centers, "facility", meta={"f": f}), facility_cost(instance, centers, f)


def distortion(instance: MetricInstance, solution, k: int, z: float = 1.0,
               opt: float | None = None) -> float:
    """``cost(solution) / OPT(k)``; OPT uses the target ``k`` even for bicriteria output."""
    centers = solution.centers if isinstance(solution, Solution) else tuple(solution)
    value = cost(instance, centers, z)
    if opt is None:
        opt = brute_force_opt(instance, k, z)[1]
    return ratio(value, opt)


def facility_distortion(instance: MetricInstance, solution, f: float, opt: float | None = None) -> float:
    centers = solution.centers if isinstance(solution, Solution) else tuple(solution)
    if opt is None:
        opt = brute_force_facility_opt(instance, f)[1]
    return ratio(facility_cost(instance, centers, f), opt)


def ratio(value: float, opt: float) -> float:
    if opt == 0:
        return 1.0 if value == 0 else math.inf
    return value / opt


__all__ = [
    "brute_force_opt",
    "brute_force_facility_opt",
    "distortion",
    "facility_distortion",
    "OracleBudgetExceeded",
]
