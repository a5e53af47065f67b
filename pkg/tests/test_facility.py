import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import euclid
from ordclust.facility import FacilityConfig, meyerson
from ordclust.metric import MetricInstance, QueryLedger, build_profile, facility_cost
from ordclust.oracle import brute_force_facility_opt


def test_config_rejects_nonpositive_cost():
    with pytest.raises(ValueError):
        FacilityConfig(0.0)


def test_single_point():
    inst = MetricInstance.from_matrix([[0.0]])
    sol = meyerson(inst, build_profile(inst), FacilityConfig(2.0), QueryLedger(), np.random.default_rng(0))
    assert sol.centers == (0,) and sol.queries == 0
    assert facility_cost(inst, sol.centers, 2.0) == 2.0


def test_tiny_opening_cost_opens_everything(line):
    inst, prof = line
    sol = meyerson(inst, prof, FacilityConfig(1e-12), QueryLedger(), np.random.default_rng(0))
    assert sorted(sol.centers) == [0, 1, 2, 3]
    assert facility_cost(inst, sol.centers, 1e-12) == pytest.approx(4e-12)


def test_duplicates_are_never_opened_twice():
    inst = MetricInstance.from_points([[0.0]] * 4 + [[5.0]], "l1")
    prof = build_profile(inst)
    for seed in range(20):
        sol = meyerson(inst, prof, FacilityConfig(1e-9), QueryLedger(), np.random.default_rng(seed))
        assert len(sol.centers) == 2


def test_permutation_seed_is_reproducible(line):
    inst, prof = line
    a = meyerson(inst, prof, FacilityConfig(2.0, permutation_seed=4))
    b = meyerson(inst, prof, FacilityConfig(2.0, permutation_seed=4))
    assert a.centers == b.centers and a.meta["order"] == b.meta["order"]


def test_line_mean_within_factor_eight(line):
    inst, prof = line
    opt = brute_force_facility_opt(inst, 2.0)[1]
    assert opt == 7.0
    rng = np.random.default_rng(0)
    costs = [facility_cost(inst, meyerson(inst, prof, FacilityConfig(2.0), QueryLedger(), rng).centers, 2.0)
             for _ in range(2000)]
    assert np.mean(costs) / opt <= 8


@given(st.integers(0, 10_000), st.integers(1, 14), st.sampled_from([0.5, 2.0, 10.0]), st.integers(0, 2**31))
def test_one_query_per_point(seed, n, f, alg_seed):
    inst, prof = euclid(seed, n)
    ledger = QueryLedger()
    sol = meyerson(inst, prof, FacilityConfig(f), ledger, np.random.default_rng(alg_seed))
    assert sol.queries == ledger.count <= n - 1
    assert ledger.calls <= n - 1
    assert sol.meta["order"][0] == sol.centers[0]
