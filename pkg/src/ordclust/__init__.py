"""Clustering with ordinal preferences and a metered budget of distance queries."""
from .metric import (
    InstanceError,
    MetricInstance,
    PreferenceProfile,
    QueryBudgetExceeded,
    QueryLedger,
    Solution,
    build_profile,
    cost,
    facility_cost,
    load_instance,
    query_distance,
    random_euclidean,
)
from .kcenter import kcenter_2k_query, kcenter_quadratic, kcenter_zero_query
from .kz import kmedian_low_query, kz_zero_query, kz_zero_query_amplified
from .facility import FacilityConfig, meyerson
from .oracle import brute_force_facility_opt, brute_force_opt, distortion

__version__ = "0.1.0"

__all__ = [
    "InstanceError",
    "MetricInstance",
    "PreferenceProfile",
    "QueryBudgetExceeded",
    "QueryLedger",
    "Solution",
    "build_profile",
    "cost",
    "facility_cost",
    "load_instance",
    "query_distance",
    "random_euclidean",
    "kcenter_2k_query",
    "kcenter_quadratic",
    "kcenter_zero_query",
    "kmedian_low_query",
    "kz_zero_query",
    "kz_zero_query_amplified",
    "FacilityConfig",
    "meyerson",
    "brute_force_facility_opt",
    "brute_force_opt",
    "distortion",
]
