"""Batch driver: run an algorithm over seeded trials and collect one record per trial.

Trial ``i`` of master seed ``s`` uses ``SeedSequence(s, spawn_key=(i,))``; its
first child seeds the instance draw and its second the algorithm, both through
Philox generators. Rows come out in trial order whatever the job count.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import adversarial
from .facility import FacilityConfig, meyerson
from .kcenter import kcenter_2k_query, kcenter_quadratic, kcenter_zero_query
from .kz import kmedian_low_query, kz_zero_query, kz_zero_query_amplified
from .metric import (
    KCENTER,
    MetricInstance,
    PreferenceProfile,
    QueryLedger,
    build_profile,
    cost,
    facility_cost,
    load_instance,
    random_euclidean,
)
from .oracle import OracleBudgetExceeded, brute_force_facility_opt, brute_force_opt, ratio

ALGORITHMS = (
    "kcenter-quadratic",
    "kcenter-zero",
    "kcenter-2k",
    "kz-zero",
    "kz-amplified",
    "kz-lowquery",
    "meyerson",
)
FAMILIES = ("random",) + tuple(adversarial.GENERATORS)


class ConfigError(ValueError):
    pass


@dataclass
class BatchConfig:
    algorithm: str
    k: int = 2
    z: float = 1.0
    f: float = 1.0
    trials: int = 1
    seed: int = 0
    instance: str | None = None
    generate: str | None = None
    n: int = 30
    T: int | None = None
    oracle: str = "auto"
    augment: str = "zero"
    rings_log_base: float = 2.0
    threshold: float | None = None
    timing: bool = False
    jobs: int = 1
    trace: bool = False
    family_params: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; choose from {', '.join(ALGORITHMS)}")
        if (self.instance is None) == (self.generate is None):
            raise ConfigError("give exactly one of --instance or --generate")
        if self.generate is not None and self.generate not in FAMILIES:
            raise ConfigError(f"unknown family {self.generate!r}; choose from {', '.join(FAMILIES)}")
        if self.trials < 0:
            raise ConfigError("--trials must be nonnegative")
        if self.k < 1:
            raise ConfigError("--k must be positive")
        if self.algorithm in ("kcenter-2k", "kz-zero", "kz-amplified") and self.k < 2:
            raise ConfigError(f"{self.algorithm} needs k >= 2")
        if not self.z >= 1:
            raise ConfigError("--z must be at least 1")
        if not self.f > 0:
            raise ConfigError("--f must be positive")
        if self.T is not None and self.T <= 0:
            raise ConfigError("--T must be positive")
        if self.oracle not in ("auto", "skip"):
            raise ConfigError("--oracle must be auto or skip")
        if self.augment not in ("zero", "2k"):
            raise ConfigError("--augment must be zero or 2k")
        if not self.rings_log_base > 1:
            raise ConfigError("--rings-log-base must exceed 1")
        if self.jobs < 1:
            raise ConfigError("--jobs must be positive")

    @property
    def objective(self) -> float:
        return KCENTER if self.algorithm.startswith("kcenter") else self.z


@dataclass
class TrialRecord:
    instance: str
    algorithm: str
    seed: int
    trial: int
    n: int
    k: int
    z: str
    f: str
    num_centers: int
    centers: str
    queries: int
    cost: float
    opt: str
    distortion: str
    wall_time: str = ""


COLUMNS = [f.name for f in fields(TrialRecord)]


def trial_generators(master: int, i: int) -> tuple[np.random.Generator, np.random.Generator]:
    inst_ss, alg_ss = np.random.SeedSequence(master, spawn_key=(i,)).spawn(2)
    return np.random.Generator(np.random.Philox(inst_ss)), np.random.Generator(np.random.Philox(alg_ss))


def load_profile(path, instance: MetricInstance) -> PreferenceProfile:
    """Rankings stored next to the instance, or the distance-derived ones."""
    data = json.loads(Path(path).read_text())
    if "rankings" in data:
        return PreferenceProfile.from_rankings(data["rankings"], instance)
    return build_profile(instance)


def _draw_instance(config: BatchConfig, rng: np.random.Generator):
    if config.generate == "random":
        inst = random_euclidean(config.n, rng)
        return inst, build_profile(inst), None
    spec_cls, gen = adversarial.GENERATORS[config.generate]
    params = dict(config.family_params)
    if config.generate in ("tree", "bundles"):
        params.setdefault("k", config.k)
    else:
        params.setdefault("n", config.n)
        params.setdefault("f", config.f)
    try:
        spec = spec_cls(**params)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return gen(spec, rng)


def _descriptor_opt(config: BatchConfig, descriptor: dict | None):
    if not descriptor:
        return None
    fam, spec = descriptor["family"], descriptor["spec"]
    if fam == "tree" and config.algorithm.startswith("kcenter") and spec["k"] == config.k:
        return descriptor["opt"]
    if fam == "bundles" and config.algorithm.startswith("kz") and config.z == 1 and spec["k"] == config.k:
        return descriptor["opt"]
    if fam == "facility" and config.algorithm == "meyerson" and spec["f"] == config.f:
        return descriptor["opt"]
    return None


def compute_opt(config: BatchConfig, instance: MetricInstance, descriptor=None):
    if config.oracle == "skip":
        return None
    known = _descriptor_opt(config, descriptor)
    if known is not None:
        return known
    try:
        if config.algorithm == "meyerson":
            return brute_force_facility_opt(instance, config.f)[1]
        return brute_force_opt(instance, min(config.k, instance.n), config.objective)[1]
    except OracleBudgetExceeded:
        return None


def run_algorithm(config: BatchConfig, instance, profile, rng, ledger, trace):
    a, k = config.algorithm, config.k
    base = config.rings_log_base
    if a == "kcenter-quadratic":
        return kcenter_quadratic(instance, profile, k, ledger)
    if a == "kcenter-zero":
        return kcenter_zero_query(instance, profile, k)
    if a == "kcenter-2k":
        return kcenter_2k_query(instance, profile, k, ledger, trace)
    if a == "kz-zero":
        return kz_zero_query(instance, profile, k, config.z, rng, augment=config.augment,
                             ledger=ledger, log_base=base, trace=trace)
    if a == "kz-amplified":
        return kz_zero_query_amplified(instance, profile, k, config.z, rng, augment=config.augment,
                                       ledger=ledger, log_base=base, trace=trace)
    if a == "kz-lowquery":
        return kmedian_low_query(instance, profile, k, config.z, ledger, rng, config.T,
                                 log_base=base, trace=trace)
    if a == "meyerson":
        return meyerson(instance, profile, FacilityConfig(config.f), ledger, rng)
    raise ConfigError(f"unknown algorithm {a!r}")


def _fmt(x) -> str:
    return "skipped" if x is None else repr(float(x))


def run_trial(config: BatchConfig, i: int, fixed=None):
    """Run trial ``i``; ``fixed`` is ``(instance, profile, opt)`` for a file instance."""
    inst_rng, alg_rng = trial_generators(config.seed, i)
    if fixed is not None:
        instance, profile, opt = fixed
        name = instance.name
    else:
        instance, profile, descriptor = _draw_instance(config, inst_rng)
        opt = compute_opt(config, instance, descriptor)
        name = f"{config.generate}:{config.seed}:{i}"
    if config.algorithm != "meyerson" and config.k > instance.n:
        raise ConfigError(f"k={config.k} exceeds n={instance.n}")
    ledger = QueryLedger()
    trace = [] if config.trace else None
    start = time.perf_counter()
    sol = run_algorithm(config, instance, profile, alg_rng, ledger, trace)
    elapsed = time.perf_counter() - start
    if config.algorithm == "meyerson":
        value = facility_cost(instance, sol.centers, config.f)
    else:
        value = cost(instance, sol.centers, config.objective)
    record = TrialRecord(
        instance=name,
        algorithm=config.algorithm,
        seed=config.seed,
        trial=i,
        n=instance.n,
        k=config.k,
        z="inf" if math.isinf(config.objective) else repr(config.objective),
        f=repr(config.f) if config.algorithm == "meyerson" else "",
        num_centers=len(sol.centers),
        centers=" ".join(str(c) for c in sol.centers),
        queries=ledger.count,
        cost=value,
        opt=_fmt(opt),
        distortion="skipped" if opt is None else _fmt(ratio(value, opt)),
        wall_time=f"{elapsed:.6f}" if config.timing else "",
    )
    return record, trace


def _run_trial_star(args):
    return run_trial(*args)


def run_batch(config: BatchConfig):
    """All trials of ``config`` as ``(records, traces)`` in trial order."""
    config.validate()
    fixed = None
    if config.instance is not None:
        try:
            instance = load_instance(config.instance)
            profile = load_profile(config.instance, instance)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot load {config.instance}: {exc}") from exc
        if config.algorithm != "meyerson" and config.k > instance.n:
            raise ConfigError(f"k={config.k} exceeds n={instance.n}")
        opt = compute_opt(config, instance) if config.trials else None
        fixed = (instance, profile, opt)
    jobs = [(config, i, fixed) for i in range(config.trials)]
    if config.jobs > 1 and config.trials > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(_run_trial_star, jobs))
    else:
        results = [run_trial(*j) for j in jobs]
    return [r for r, _ in results], [t for _, t in results]


def records_to_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in records:
        writer.writerow(asdict(r))
    return buf.getvalue()


def summarize(records, threshold: float | None = None) -> dict:
    dist = np.array([float(r.distortion) for r in records if r.distortion != "skipped"])
    queries = np.array([r.queries for r in records], dtype=float)
    out = {"trials": len(records), "with_opt": int(dist.size)}
    if dist.size:
        out.update(mean_distortion=float(dist.mean()), median_distortion=float(np.median(dist)),
                   max_distortion=float(dist.max()))
    if queries.size:
        out["query_quantiles"] = {str(q): float(np.quantile(queries, q)) for q in (0.0, 0.5, 0.9, 1.0)}
        out["mean_centers"] = float(np.mean([r.num_centers for r in records]))
    if threshold is not None and dist.size:
        out["threshold"] = threshold
        out["success_rate"] = float(np.mean(dist <= threshold))
    return out


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.generic):
        return x.item()
    return x


def traces_to_jsonl(records, traces) -> str:
    lines = []
    for r, trace in zip(records, traces):
        for step in trace or []:
            lines.append(json.dumps({"trial": r.trial, "algorithm": r.algorithm, **_jsonable(step)}))
    return "".join(line + "\n" for line in lines)
