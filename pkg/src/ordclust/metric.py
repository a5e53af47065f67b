"""Metric instances, ordinal preference profiles and the query ledger.

Every algorithm in the package sees a :class:`PreferenceProfile` for free and
pays for cardinal information through :func:`query_distance`, which records
revealed pairs in a :class:`QueryLedger`.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

KCENTER = math.inf
# above this exponent the (k,z) cost is evaluated as the k-center cost
Z_CAP = 64.0
TRIANGLE_RTOL = 1e-9


class InstanceError(ValueError):
    pass


class QueryBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class MetricInstance:
    """Point set with exact pairwise distances.

    ``dist`` is a read-only symmetric ``(n, n)`` array with a zero diagonal.
    ``coords`` is kept when the instance was derived from coordinates.
    """

    dist: np.ndarray
    coords: np.ndarray | None = None
    norm: str | None = None
    name: str = ""

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    @classmethod
    def from_matrix(cls, matrix, *, waive_triangle_check: bool = False, name: str = ""):
        d = np.array(matrix, dtype=float)
        validate_matrix(d, check_triangle=not waive_triangle_check)
        d.setflags(write=False)
        return cls(dist=d, name=name)

    @classmethod
    def from_points(cls, points, norm: str = "l2", *, name: str = ""):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise InstanceError("points must be a nonempty 2-d array")
        diff = pts[:, None, :] - pts[None, :, :]
        if norm == "l2":
            d = np.sqrt((diff**2).sum(axis=-1))
        elif norm == "l1":
            d = np.abs(diff).sum(axis=-1)
        else:
            raise InstanceError(f"unknown norm {norm!r}")
        # exact symmetry regardless of summation order
        d = np.minimum(d, d.T)
        np.fill_diagonal(d, 0.0)
        d.setflags(write=False)
        pts.setflags(write=False)
        return cls(dist=d, coords=pts, norm=norm, name=name)

    def to_json(self) -> dict:
        if self.coords is not None:
            return {"points": self.coords.tolist(), "norm": self.norm}
        return {"matrix": self.dist.tolist()}


def validate_matrix(d: np.ndarray, check_triangle: bool = True) -> None:
    if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] == 0:
        raise InstanceError("distance matrix must be square and nonempty")
    if not np.all(np.isfinite(d)):
        raise InstanceError("distance matrix has non-finite entries")
    if np.any(d < 0):
        raise InstanceError("distance matrix has negative entries")
    if np.any(np.diag(d) != 0):
        raise InstanceError("distance matrix must have a zero diagonal")
    if not np.array_equal(d, d.T):
        raise InstanceError("distance matrix is not symmetric")
    if check_triangle:
        scale = max(float(d.max()), 1.0)
        tol = TRIANGLE_RTOL * scale
        for y in range(d.shape[0]):
            via = d[:, y][:, None] + d[y, :][None, :]
            if np.any(d > via + tol):
                raise InstanceError(f"triangle inequality violated through point {y}")


def load_instance(path) -> MetricInstance:
    """Read the instance JSON format (``points``+``norm`` or ``matrix``)."""
    data = json.loads(Path(path).read_text())
    waive = bool(data.get("waive_triangle_check", False))
    if "points" in data:
        return MetricInstance.from_points(data["points"], data.get("norm", "l2"), name=str(path))
    if "matrix" in data:
        return MetricInstance.from_matrix(data["matrix"], waive_triangle_check=waive, name=str(path))
    raise InstanceError("instance file needs a 'points' or 'matrix' entry")


def save_instance(instance: MetricInstance, path, *, waive_triangle_check: bool = False) -> None:
    data = instance.to_json()
    if waive_triangle_check:
        data["waive_triangle_check"] = True
    Path(path).write_text(json.dumps(data))


@dataclass(frozen=True)
class PreferenceProfile:
    """Rankings ``order[x]`` (closest first) and their inverse ``rank[x, y]``."""

    order: np.ndarray
    rank: np.ndarray

    @property
    def n(self) -> int:
        return self.order.shape[0]

    @classmethod
    def from_rankings(cls, rankings, instance: MetricInstance | None = None):
        order = np.array(rankings, dtype=np.int32)
        n = order.shape[0]
        if order.shape != (n, n):
            raise InstanceError("rankings must be an n x n array")
        rank = np.empty_like(order)
        rows = np.arange(n)[:, None]
        rank[rows, order] = np.arange(n, dtype=np.int32)[None, :]
        if not np.array_equal(np.sort(order, axis=1), np.broadcast_to(np.arange(n), (n, n))):
            raise InstanceError("each ranking must be a permutation")
        if np.any(order[:, 0] != np.arange(n)):
            raise InstanceError("each point must rank itself first")
        if instance is not None:
            along = np.take_along_axis(instance.dist, order, axis=1)
            if np.any(np.diff(along, axis=1) < 0):
                raise InstanceError("rankings are inconsistent with the distances")
        order.setflags(write=False)
        rank.setflags(write=False)
        return cls(order=order, rank=rank)

    def to_json(self) -> dict:
        return {"rankings": self.order.tolist()}


def build_profile(instance: MetricInstance) -> PreferenceProfile:
    """Rank every point by distance; ties go to the point itself, then to lower ids."""
    d = instance.dist
    n = instance.n
    ids = np.broadcast_to(np.arange(n), (n, n))
    not_self = ids != np.arange(n)[:, None]
    # lexsort: last key is primary
    order = np.lexsort((ids, not_self, d), axis=1)
    return PreferenceProfile.from_rankings(order)


def _as_array(S) -> np.ndarray:
    arr = np.fromiter(S, dtype=np.int64) if not isinstance(S, np.ndarray) else S.astype(np.int64, copy=False)
    if arr.size == 0:
        raise ValueError("point set must be nonempty")
    return arr


def restrict(profile: PreferenceProfile, x: int, S) -> list[int]:
    arr = _as_array(S)
    return arr[np.argsort(profile.rank[x, arr], kind="stable")].tolist()


def nearest_in_set(profile: PreferenceProfile, x: int, S) -> int:
    arr = _as_array(S)
    return int(arr[np.argmin(profile.rank[x, arr])])


def farthest_in_set(profile: PreferenceProfile, x: int, S) -> int:
    arr = _as_array(S)
    return int(arr[np.argmax(profile.rank[x, arr])])


@dataclass
class QueryLedger:
    """Set of revealed unordered pairs.

    ``count`` is the number of distinct pairs (the query complexity);
    ``calls`` counts every :func:`query_distance` invocation, repeats included.
    """

    budget: int | None = None
    revealed: set = field(default_factory=set)
    calls: int = 0

    @property
    def count(self) -> int:
        return len(self.revealed)

    def __contains__(self, pair) -> bool:
        x, y = pair
        return (min(x, y), max(x, y)) in self.revealed

    def reveal(self, x: int, y: int) -> bool:
        self.calls += 1
        if x == y:
            return False
        key = (min(x, y), max(x, y))
        if key in self.revealed:
            return False
        if self.budget is not None and len(self.revealed) >= self.budget:
            raise QueryBudgetExceeded(f"query budget of {self.budget} exhausted")
        self.revealed.add(key)
        return True


def query_distance(ledger: QueryLedger, instance: MetricInstance, x: int, y: int) -> float:
    ledger.reveal(int(x), int(y))
    return float(instance.dist[x, y])


def distance_to_set(ledger, profile, instance, x: int, S) -> tuple[float, int]:
    z = nearest_in_set(profile, x, S)
    return query_distance(ledger, instance, x, z), z


def assign(profile: PreferenceProfile, centers: Sequence[int]) -> np.ndarray:
    """Index into ``centers`` of each point's highest-ranked center."""
    C = _as_array(centers)
    return np.argmin(profile.rank[:, C], axis=1)


def induced_clustering(profile: PreferenceProfile, centers: Sequence[int]) -> dict[int, np.ndarray]:
    C = _as_array(centers)
    labels = assign(profile, C)
    return {int(c): np.flatnonzero(labels == i) for i, c in enumerate(C)}


def point_costs(instance: MetricInstance, centers) -> np.ndarray:
    C = _as_array(centers)
    return instance.dist[:, C].min(axis=1)


def power_cost(values: np.ndarray, z: float) -> float:
    """``(sum v**z)**(1/z)``, max-normalised; z above :data:`Z_CAP` means max."""
    if values.size == 0:
        return 0.0
    m = float(values.max())
    if m == 0.0:
        return 0.0
    if math.isinf(z) or z > Z_CAP:
        return m
    if z == 1:
        return float(values.sum())
    return m * float(np.sum((values / m) ** z)) ** (1.0 / z)


def cost(instance: MetricInstance, centers, z: float = 1.0) -> float:
    """Full-information (k,z) cost of ``centers``; ``z=inf`` is k-center."""
    return power_cost(point_costs(instance, centers), z)


def facility_cost(instance: MetricInstance, centers, f: float) -> float:
    C = _as_array(centers)
    return float(point_costs(instance, C).sum()) + f * len(set(C.tolist()))


def parse_objective(value) -> float:
    """Map ``kcenter``/``kmedian``/``kmeans``/numbers/``inf`` to an exponent."""
    if isinstance(value, (int, float)):
        z = float(value)
    else:
        key = str(value).strip().lower()
        named = {"kcenter": KCENTER, "k-center": KCENTER, "inf": KCENTER,
                 "kmedian": 1.0, "k-median": 1.0, "kmeans": 2.0, "k-means": 2.0}
        z = named[key] if key in named else float(key)
    if not z >= 1:
        raise ValueError(f"objective exponent must be >= 1, got {value!r}")
    return z


@dataclass(frozen=True)
class Solution:
    centers: tuple[int, ...]
    kind: str
    queries: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.centers:
            raise ValueError("a solution needs at least one center")
        if len(set(self.centers)) != len(self.centers):
            raise ValueError("centers must be distinct")

    def __len__(self) -> int:
        return len(self.centers)


def random_euclidean(n: int, rng: np.random.Generator, dim: int = 2, scale: float = 1.0) -> MetricInstance:
    return MetricInstance.from_points(rng.uniform(0.0, scale, size=(n, dim)), "l2")


def distinct_in_order(points: Iterable[int]) -> list[int]:
    return list(dict.fromkeys(int(p) for p in points))
