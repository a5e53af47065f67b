"""Lower-bound instance families whose rankings do not depend on the random draw.

Every generator returns ``(instance, profile, descriptor)``. The profile is
built from the combinatorial structure alone, so two draws with different
seeds share it byte for byte while the hidden choice changes the metric.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .metric import MetricInstance, PreferenceProfile, cost, facility_cost, save_instance, validate_matrix

MAX_TREE_K = 13
# triangle check is cubic; skip it above this size
TRIANGLE_CHECK_MAX_N = 512


@dataclass(frozen=True)
class TreeInstanceSpec:
    k: int
    D: float = 1e3


@dataclass(frozen=True)
class BundleInstanceSpec:
    k: int
    alpha: int = 1
    n_prime: int = 8
    D: float = 1e3
    eps: float = 1e-6


@dataclass(frozen=True)
class FacilityHardSpec:
    n: int
    s: int
    N: float | None = None
    eps: float = 1e-6
    f: float = 1.0

    @property
    def big(self) -> float:
        return 10.0 * (self.n / self.s + self.s) if self.N is None else float(self.N)


def _freeze(d: np.ndarray, name: str) -> MetricInstance:
    validate_matrix(d, check_triangle=d.shape[0] <= TRIANGLE_CHECK_MAX_N)
    d.setflags(write=False)
    return MetricInstance(dist=d, name=name)


def _profile_from_keys(*keys: np.ndarray) -> PreferenceProfile:
    """Rank by the given keys (first is primary); the point itself always comes first."""
    n = keys[0].shape[0]
    ids = np.broadcast_to(np.arange(n), (n, n))
    not_self = ids != np.arange(n)[:, None]
    order = np.lexsort((ids,) + tuple(reversed(keys)) + (not_self,), axis=1)
    return PreferenceProfile.from_rankings(order)


def _ancestor_depth(leaves: np.ndarray, height: int) -> np.ndarray:
    """Depth of the lowest common ancestor of every pair of leaves of a complete binary tree."""
    return height - _bitlen(leaves[:, None] ^ leaves[None, :])


def gen_kcenter_tree(spec: TreeInstanceSpec, rng: np.random.Generator):
    """Leaves of a depth ``k-1`` binary tree; a random root-to-leaf path carries ``D``.

    Two leaves are at the value of their lowest common ancestor: ``D`` on the
    path to the hidden leaf ``r`` and 1 elsewhere.
    """
    k = spec.k
    if k < 2:
        raise ValueError("k must be at least 2")
    if k > MAX_TREE_K:
        raise ValueError(f"k={k} exceeds the supported maximum {MAX_TREE_K}")
    if not spec.D >= 1:
        raise ValueError("D must be at least 1")
    h = k - 1
    n = 2**h
    leaves = np.arange(n)
    depth = _ancestor_depth(leaves, h)
    r = int(rng.integers(n))
    prefix_r = h - _bitlen(leaves ^ r)
    # the ancestor of p and q is on the path iff it is also an ancestor of r
    on_path = np.minimum(prefix_r[:, None], prefix_r[None, :]) >= depth
    d = np.where(on_path, spec.D, 1.0)
    np.fill_diagonal(d, 0.0)
    instance = _freeze(d, f"tree-k{k}")
    profile = _profile_from_keys(-depth)
    path = [_node_label(r >> (h - t), t) for t in range(h + 1)]
    opt_centers = _tree_opt_centers(r, h)
    descriptor = {
        "family": "tree",
        "spec": asdict(spec),
        "hidden_leaf": r,
        "path": path,
        "opt_centers": opt_centers,
        "opt": cost(instance, opt_centers, math.inf),
    }
    return instance, profile, descriptor


def _bitlen(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    nz = x > 0
    out[nz] = np.floor(np.log2(x[nz])).astype(x.dtype) + 1
    return out


def _node_label(prefix: int, depth: int) -> str:
    return format(prefix, f"0{depth}b") if depth else "root"


def _tree_opt_centers(r: int, h: int) -> list[int]:
    """One leaf in the off-path subtree of every path node, plus ``r``."""
    centers = []
    for t in range(h):
        # sibling subtree at depth t+1: flip bit t of r's prefix, lowest leaf below it
        prefix = (r >> (h - t - 1)) ^ 1
        centers.append(prefix << (h - t - 1))
    return sorted(centers + [r])


def gen_kmedian_bundles(spec: BundleInstanceSpec, rng: np.random.Generator):
    """Binary tree of depth ``k-2`` with a bundled 2-median gadget below each leaf.

    Gadget bundles ``B_0..B_m`` have ``(alpha+1)**i`` points, ``m = log_{alpha+1} n'``.
    Outside the hidden gadget every gadget distance is ``eps``. Inside it a
    hidden level ``l`` makes bundles below ``l`` spread out (distance 1).
    """
    k, a1 = spec.k, spec.alpha + 1
    if k < 2:
        raise ValueError("k must be at least 2")
    if spec.alpha < 1 or a1 & (a1 - 1) or spec.n_prime < 2 or spec.n_prime & (spec.n_prime - 1):
        raise ValueError("n' and alpha+1 must be powers of 2")
    m = round(math.log(spec.n_prime, a1))
    if a1**m != spec.n_prime or m < 1:
        raise ValueError("n' must be a positive power of alpha+1")
    if not 0 < spec.eps < 1 or spec.D < 1:
        raise ValueError("need 0 < eps < 1 <= D")
    h = k - 2
    gadgets = 2**h
    bundle = np.repeat(np.arange(m + 1), [a1**i for i in range(m + 1)])
    g = bundle.size
    n = gadgets * g
    if n > 4096:
        raise ValueError(f"instance would have {n} points")
    gadget = np.repeat(np.arange(gadgets), g)
    b = np.tile(bundle, gadgets)
    r = int(rng.integers(gadgets))
    ell = int(rng.integers(m))

    gdepth = _ancestor_depth(np.arange(gadgets), h)[gadget[:, None], gadget[None, :]]
    prefix_r = (h - _bitlen(np.arange(gadgets) ^ r))[gadget]
    on_path = np.minimum(prefix_r[:, None], prefix_r[None, :]) >= gdepth
    d = np.where(on_path, spec.D, spec.eps)
    same = gadget[:, None] == gadget[None, :]
    d[same] = spec.eps
    inside = np.flatnonzero(gadget == r)
    bi = bundle
    lo = np.minimum(bi[:, None], bi[None, :])
    same_b = bi[:, None] == bi[None, :]
    local = np.where(same_b, np.where(bi[:, None] < ell, 1.0, spec.eps), np.where(lo <= ell, 1.0, spec.eps))
    d[np.ix_(inside, inside)] = local
    np.fill_diagonal(d, 0.0)
    instance = _freeze(d, f"bundles-k{k}")

    own = (gadget[:, None] == gadget[None, :]) & (b[:, None] == b[None, :])
    gkey = np.where(same, -h - 1, -gdepth)
    profile = _profile_from_keys(gkey, ~own, np.broadcast_to(-b, (n, n)))

    opt_centers = _bundle_opt_centers(r, h, g, bundle, ell)
    descriptor = {
        "family": "bundles",
        "spec": asdict(spec),
        "hidden_gadget": r,
        "hidden_level": ell,
        "bundle_sizes": [a1**i for i in range(m + 1)],
        "opt_centers": opt_centers,
        "opt": cost(instance, opt_centers, 1.0),
        "opt_closed_form": (a1**ell - 1) // spec.alpha,
    }
    return instance, profile, descriptor


def _bundle_opt_centers(r, h, g, bundle, ell):
    centers = [leaf * g for leaf in _tree_opt_centers(r, h) if leaf != r]
    first = [int(np.flatnonzero(bundle == j)[0]) for j in (ell, ell + 1)]
    return sorted(centers + [r * g + i for i in first])


def gen_facility_hard(spec: FacilityHardSpec, rng: np.random.Generator):
    """``n/s`` clusters of ``s`` points; one hidden cluster is either tight or spread to ``N``."""
    n, s = spec.n, spec.s
    if s < 2 or n % s:
        raise ValueError("need s >= 2 dividing n")
    N = spec.big
    if not N > n / s + s - 1:
        raise ValueError("N must exceed n/s + s - 1")
    if not 0 < spec.eps < N:
        raise ValueError("need 0 < eps < N")
    cluster = np.arange(n) // s
    i = int(rng.integers(n // s))
    spread = bool(rng.integers(2))
    same = cluster[:, None] == cluster[None, :]
    d = np.where(same, spec.eps, 10.0 * N)
    if spread:
        block = cluster == i
        d[np.ix_(block, block)] = N
    np.fill_diagonal(d, 0.0)
    instance = _freeze(d, f"facility-n{n}-s{s}")
    profile = _profile_from_keys(np.where(same, -1, cluster[None, :]))
    opt_centers = [c * s for c in range(n // s)]
    if spread:
        opt_centers = sorted(set(opt_centers) | set(range(i * s, (i + 1) * s)))
    descriptor = {
        "family": "facility",
        "spec": asdict(spec),
        "hidden_cluster": i,
        "spread": spread,
        "opt_centers": opt_centers,
        "opt": facility_cost(instance, opt_centers, spec.f),
        "opt_closed_form": n / s + (s - 1 if spread else 0),
    }
    return instance, profile, descriptor


GENERATORS = {
    "tree": (TreeInstanceSpec, gen_kcenter_tree),
    "bundles": (BundleInstanceSpec, gen_kmedian_bundles),
    "facility": (FacilityHardSpec, gen_facility_hard),
}


def write_generated(instance: MetricInstance, profile: PreferenceProfile, descriptor: dict, path) -> Path:
    """Write the instance JSON (with rankings) and a ``.descriptor.json`` sidecar."""
    path = Path(path)
    save_instance(instance, path)
    data = json.loads(path.read_text())
    data.update(profile.to_json())
    path.write_text(json.dumps(data))
    sidecar = path.with_suffix(".descriptor.json")
    sidecar.write_text(json.dumps(descriptor, indent=2))
    return sidecar
