"""Python surface of the tiled 360-degree streaming simulator core."""

from ._core import (
    advantage,
    afer_bps,
    average_rate_bps,
    brute_force_schedule,
    compute_reward,
    dbm_to_watts,
    instantaneous_rate_bps,
    normalized_reward,
    reduce_grid,
    schedule,
    tier_value,
)

__all__ = [
    "advantage",
    "afer_bps",
    "average_rate_bps",
    "brute_force_schedule",
    "compute_reward",
    "dbm_to_watts",
    "instantaneous_rate_bps",
    "normalized_reward",
    "reduce_grid",
    "schedule",
    "tier_value",
]
