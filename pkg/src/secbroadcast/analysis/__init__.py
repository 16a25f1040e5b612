from .regions import (RatePoint, RegionSpec, common_message_region, naive_region,
                      nosecurity_region, partial_secrecy_region, region_boundary, region_contains,
                      secrecy_region)
from .leakage import exact_leakage, leakage_bound
from .stats import concentration_check, empirical_rates

__all__ = [
    "RatePoint", "RegionSpec", "common_message_region", "naive_region", "nosecurity_region",
    "partial_secrecy_region", "region_boundary", "region_contains", "secrecy_region",
    "exact_leakage", "leakage_bound", "concentration_check", "empirical_rates",
]
