"""Flight-viability monitoring: battery and base-station link health."""

from __future__ import annotations

from .types import BehaviorContext, ViabilityVerdict


def check_flight_viability(ctx: BehaviorContext) -> ViabilityVerdict:
    """Most severe verdict across the battery and heartbeat monitors."""
    lim = ctx.limits
    verdict = ViabilityVerdict.OK
    if ctx.battery_fraction < lim.battery_return_home:
        verdict = max(verdict, ViabilityVerdict.RETURN_HOME)
    if ctx.battery_fraction < lim.battery_land_now:
        verdict = max(verdict, ViabilityVerdict.LAND_NOW)
    if ctx.heartbeat_age_s > lim.heartbeat_hold_s:
        verdict = max(verdict, ViabilityVerdict.HOLD)
    if ctx.heartbeat_age_s > lim.heartbeat_land_s:
        verdict = max(verdict, ViabilityVerdict.LAND_NOW)
    return verdict
