from .engine import SIM_DT, Simulator
from .laser import NO_RETURN, LaserConfig, LaserScan, cast_laser_scan, raw_ranges
from .sensors import ImuSample, SensorFrame, SensorSampler
from .vehicle import (
    DynamicsParams,
    InnerLoopLimits,
    InnerLoopSetpoint,
    VehicleTruth,
    step_dynamics,
)
from .world import (
    BatterySpec,
    Box,
    SensorNoise,
    Wall,
    WindSpec,
    WorldError,
    WorldModel,
    load_world,
    parse_world,
)

__all__ = [
    "SIM_DT",
    "Simulator",
    "NO_RETURN",
    "LaserConfig",
    "LaserScan",
    "cast_laser_scan",
    "raw_ranges",
    "ImuSample",
    "SensorFrame",
    "SensorSampler",
    "DynamicsParams",
    "InnerLoopLimits",
    "InnerLoopSetpoint",
    "VehicleTruth",
    "step_dynamics",
    "BatterySpec",
    "Box",
    "SensorNoise",
    "Wall",
    "WindSpec",
    "WorldError",
    "WorldModel",
    "load_world",
    "parse_world",
]
