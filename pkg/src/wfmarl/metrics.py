"""Blade damage-equivalent-load (DEL) summaries driven by yaw."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .farm import FarmState, farm_power_direct
from .power import PowerModel
from .wake import DomainError


def del_components(gamma_deg: float) -> tuple[float, float]:
    """In-plane and out-of-plane DEL for a yaw angle given in degrees."""
    if abs(gamma_deg) > 45.0 + 1e-9:
        raise DomainError(f"yaw {gamma_deg} deg outside +-45 deg")
    g = gamma_deg
    return 0.01 * g * g - 0.59 * g + 585.6, -0.07 * g * g + 3.99 * g + 76.69


@dataclass
class DelReport:
    del_y: np.ndarray
    del_x: np.ndarray
    farm_power_w: float

    @property
    def magnitudes(self) -> np.ndarray:
        return np.hypot(self.del_y, self.del_x)

    @property
    def total(self) -> float:
        return float(self.magnitudes.sum())

    @property
    def avg_del_per_power(self) -> float | None:
        """Summed DEL magnitude per W of farm power; ``None`` when the farm produces nothing."""
        if self.farm_power_w <= 0.0:
            return None
        return self.total / self.farm_power_w

    def as_dict(self) -> dict:
        return {
            "del_y": [float(v) for v in self.del_y],
            "del_x": [float(v) for v in self.del_x],
            "magnitude": [float(v) for v in self.magnitudes],
            "total": self.total,
            "farm_power_w": self.farm_power_w,
            "avg_del_per_power": self.avg_del_per_power,
        }


def del_report(state: FarmState, power_model: PowerModel | None = None,
               farm_power_w: float | None = None) -> DelReport:
    comps = [del_components(math.degrees(sp.gamma)) for sp in state.setpoints]
    if farm_power_w is None:
        farm_power_w, _ = farm_power_direct(state, power_model)
    return DelReport(np.array([c[0] for c in comps]), np.array([c[1] for c in comps]), farm_power_w)


def avg_del_per_power(state: FarmState, power_model: PowerModel | None = None) -> float | None:
    return del_report(state, power_model).avg_del_per_power
