import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import A, B, C, D
from ordclust.metric import (
    InstanceError,
    MetricInstance,
    PreferenceProfile,
    QueryBudgetExceeded,
    QueryLedger,
    Solution,
    assign,
    build_profile,
    cost,
    distance_to_set,
    facility_cost,
    farthest_in_set,
    induced_clustering,
    load_instance,
    nearest_in_set,
    parse_objective,
    power_cost,
    query_distance,
    restrict,
    save_instance,
)

coords = st.lists(st.tuples(st.integers(-20, 20), st.integers(-20, 20)), min_size=1, max_size=10)


def test_line_rankings(line):
    inst, prof = line
    assert prof.order[A].tolist() == [A, B, C, D]
    assert prof.order[C].tolist() == [C, B, A, D]
    assert prof.order[D].tolist() == [D, C, B, A]


def test_line_clustering_and_costs(line):
    inst, prof = line
    clusters = induced_clustering(prof, [A, D])
    assert clusters[A].tolist() == [A, B, C]
    assert clusters[D].tolist() == [D]
    assert cost(inst, [B, D], 1.0) == 3.0
    assert cost(inst, [A, D], math.inf) == 3.0
    assert cost(inst, [B, D], 2.0) == pytest.approx(math.sqrt(5.0))
    assert facility_cost(inst, [B, D], 2.0) == 7.0


def test_ties_prefer_self_then_lower_id():
    inst = MetricInstance.from_matrix([[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    prof = build_profile(inst)
    assert prof.order.tolist() == [[0, 1, 2], [1, 0, 2], [2, 0, 1]]


def test_zero_distance_points_rank_self_first():
    inst = MetricInstance.from_points([[0.0], [0.0], [1.0]], "l1")
    prof = build_profile(inst)
    assert prof.order[1].tolist() == [1, 0, 2]


def test_ordinal_helpers(line):
    _, prof = line
    assert restrict(prof, C, [A, D, B]) == [B, A, D]
    assert nearest_in_set(prof, D, [A, B]) == B
    assert farthest_in_set(prof, B, [A, C, D]) == D
    with pytest.raises(ValueError):
        nearest_in_set(prof, A, [])
    assert assign(prof, [D, A]).tolist() == [1, 1, 1, 0]


@pytest.mark.parametrize("matrix", [
    [[0, 1], [2, 0]],
    [[0, -1], [-1, 0]],
    [[1, 1], [1, 0]],
    [[0, 1, 5], [1, 0, 1], [5, 1, 0]],
    [[0, float("nan")], [float("nan"), 0]],
    [[0, 1, 2]],
])
def test_invalid_matrices_rejected(matrix):
    with pytest.raises(InstanceError):
        MetricInstance.from_matrix(matrix)


def test_triangle_check_can_be_waived():
    inst = MetricInstance.from_matrix([[0, 1, 5], [1, 0, 1], [5, 1, 0]], waive_triangle_check=True)
    assert inst.n == 3


def test_profile_validation(line):
    inst, _ = line
    with pytest.raises(InstanceError):
        PreferenceProfile.from_rankings([[0, 1], [0, 1]])
    with pytest.raises(InstanceError):
        PreferenceProfile.from_rankings([[0, 0], [1, 0]])
    with pytest.raises(InstanceError):
        PreferenceProfile.from_rankings([[0, 3, 2, 1]] + build_profile(inst).order[1:].tolist(), inst)


def test_ledger_dedup_and_budget(line):
    inst, prof = line
    ledger = QueryLedger(budget=2)
    assert query_distance(ledger, inst, A, D) == 7.0
    query_distance(ledger, inst, D, A)
    query_distance(ledger, inst, B, B)
    assert ledger.count == 1 and ledger.calls == 3
    assert (D, A) in ledger
    d, z = distance_to_set(ledger, prof, inst, C, [A, D])
    assert (d, z) == (3.0, A)
    with pytest.raises(QueryBudgetExceeded):
        query_distance(ledger, inst, B, C)
    assert ledger.count == 2


def test_instance_json_roundtrip(tmp_path, line):
    inst, _ = line
    path = tmp_path / "line.json"
    save_instance(inst, path)
    back = load_instance(path)
    assert np.array_equal(back.dist, inst.dist)
    path.write_text(json.dumps({"matrix": [[0, 1, 5], [1, 0, 1], [5, 1, 0]], "waive_triangle_check": True}))
    assert load_instance(path).dist[0, 2] == 5
    path.write_text(json.dumps({"nothing": 1}))
    with pytest.raises(InstanceError):
        load_instance(path)


@pytest.mark.parametrize("value,z", [("kcenter", math.inf), ("kmedian", 1.0), ("kmeans", 2.0), ("3", 3.0), (1, 1.0)])
def test_parse_objective(value, z):
    assert parse_objective(value) == z


def test_parse_objective_rejects_small_exponent():
    with pytest.raises(ValueError):
        parse_objective("0.5")


def test_power_cost_limits():
    v = np.array([3.0, 4.0])
    assert power_cost(v, 2.0) == pytest.approx(5.0)
    assert power_cost(v, math.inf) == 4.0
    assert power_cost(v, 100.0) == 4.0
    assert power_cost(np.zeros(3), 2.0) == 0.0


def test_solution_validation():
    with pytest.raises(ValueError):
        Solution((), "kz")
    with pytest.raises(ValueError):
        Solution((1, 1), "kz")


@given(coords)
def test_profile_is_consistent_with_distances(pts):
    inst = MetricInstance.from_points(pts, "l1")
    prof = build_profile(inst)
    along = np.take_along_axis(inst.dist, prof.order.astype(np.int64), axis=1)
    assert np.all(np.diff(along, axis=1) >= 0)
    assert np.array_equal(prof.order[:, 0], np.arange(inst.n))


@given(coords, st.data())
def test_cost_monotone_under_adding_centers(pts, data):
    inst = MetricInstance.from_points(pts, "l2")
    n = inst.n
    C = data.draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=n, unique=True))
    extra = data.draw(st.integers(0, n - 1))
    for z in (1.0, 2.0, math.inf):
        assert cost(inst, C + [extra] if extra not in C else C, z) <= cost(inst, C, z) + 1e-12


@given(coords)
def test_points_instances_pass_triangle_check(pts):
    for norm in ("l1", "l2"):
        inst = MetricInstance.from_points(pts, norm)
        MetricInstance.from_matrix(inst.dist)
