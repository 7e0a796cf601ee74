"""Wake-steering wind farm control with multi-agent PPO on wind turbine aggregators."""
from .farm import (FarmLayout, FarmState, WtaPartition, build_partition, effective_velocities,
                   farm_power_direct, farm_power_wta)
from .kernels import BACKEND
from .power import PowerModel, turbine_power
from .wake import Ambient, DomainError, Setpoint, TurbineSpec, wake_geometry, wake_velocity_at

__version__ = "0.1.0"

__all__ = [
    "Ambient", "BACKEND", "DomainError", "FarmLayout", "FarmState", "PowerModel", "Setpoint",
    "TurbineSpec", "WtaPartition", "build_partition", "effective_velocities", "farm_power_direct",
    "farm_power_wta", "turbine_power", "wake_geometry", "wake_velocity_at",
]
