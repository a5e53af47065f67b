import numpy as np

from ordclust.metric import MetricInstance, build_profile, random_euclidean


def euclid(seed, n, dim=2):
    inst = random_euclidean(n, np.random.default_rng(seed), dim)
    return inst, build_profile(inst)


def l1_points(seed, n, dim=2):
    pts = np.random.default_rng(seed).integers(0, 20, size=(n, dim))
    inst = MetricInstance.from_points(pts, "l1")
    return inst, build_profile(inst)
