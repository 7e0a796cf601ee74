"""Per-turbine power with induction, yaw and tilt coefficient curves."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .wake import ALPHA_MAX, BETA_MAX, GAMMA_MAX, DomainError, Setpoint, TurbineSpec

AIR_DENSITY = 1.225

# cubic in yaw (degrees), highest power first
YAW_FIT = (-0.0003, -0.000025, 0.997, 0.0)
# (constant, [(cos, sin, frequency), ...]) in tilt (degrees)
TILT_FIT = (
    -0.185,
    (
        (0.285, 0.014, 0.105),
        (-0.144, -0.017, 0.209),
        (0.06, 0.011, 0.314),
        (-0.016, -0.005, 0.419),
    ),
)


def power_coefficient(alpha: float) -> float:
    if not 0.0 <= alpha <= ALPHA_MAX + 1e-12:
        raise DomainError(f"axial induction {alpha} outside [0, 1/3]")
    return 4.0 * alpha * (1.0 - alpha) ** 2


def _cubic(coefficients, x):
    out = 0.0
    for c in coefficients:
        out = out * x + c
    return out


def _fourier(series, x):
    const, terms = series
    return const + sum(a * math.cos(w * x) + b * math.sin(w * x) for a, b, w in terms)


@dataclass(frozen=True)
class CoefficientModel:
    """Misalignment power coefficient ``C(angle)``, clamped to ``[0, 1]``.

    ``kind="cosine"`` evaluates ``cos(angle) ** exponent``. ``kind="fitted"``
    evaluates the field-data fit (angle in degrees) shifted by a constant so
    that ``C(0) == 1``.
    """

    kind: str = "cosine"
    exponent: float = 3.0
    fit: str = "yaw"  # which printed fit to use in fitted mode

    def __post_init__(self):
        if self.kind not in ("cosine", "fitted"):
            raise ValueError(f"unknown coefficient model kind {self.kind!r}")
        if self.fit not in ("yaw", "tilt"):
            raise ValueError(f"unknown fit {self.fit!r}")

    def _raw(self, deg: float) -> float:
        if self.fit == "yaw":
            return _cubic(YAW_FIT, deg)
        return _fourier(TILT_FIT, deg)

    @property
    def normalization_offset(self) -> float:
        if self.kind == "cosine":
            return 0.0
        return 1.0 - self._raw(0.0)

    def __call__(self, angle: float) -> float:
        if self.kind == "cosine":
            value = math.cos(angle) ** self.exponent
        else:
            value = self._raw(math.degrees(angle)) + self.normalization_offset
        return min(max(value, 0.0), 1.0)


@dataclass(frozen=True)
class PowerModel:
    yaw: CoefficientModel = field(default_factory=lambda: CoefficientModel("cosine", 3.0, "yaw"))
    tilt: CoefficientModel = field(default_factory=lambda: CoefficientModel("cosine", 3.0, "tilt"))
    air_density: float = AIR_DENSITY

    @classmethod
    def named(cls, name: str, air_density: float = AIR_DENSITY) -> "PowerModel":
        if name == "cosine":
            return cls(air_density=air_density)
        if name == "fitted":
            return cls(CoefficientModel("fitted", fit="yaw"), CoefficientModel("fitted", fit="tilt"),
                       air_density)
        raise ValueError(f"unknown power model {name!r} (expected 'cosine' or 'fitted')")


def yaw_coefficient(model: CoefficientModel, gamma: float) -> float:
    if abs(gamma) > GAMMA_MAX + 1e-12:
        raise DomainError(f"yaw {math.degrees(gamma):.3f} deg outside +-45 deg")
    return model(gamma)


def tilt_coefficient(model: CoefficientModel, beta: float) -> float:
    if abs(beta) > BETA_MAX + 1e-12:
        raise DomainError(f"tilt {math.degrees(beta):.3f} deg outside +-15 deg")
    return model(beta)


def turbine_power(spec: TurbineSpec, setpoint: Setpoint, u: float, air_density: float | None = None,
                  model: PowerModel | None = None) -> float:
    """Steady power in W, capped at the rated power.

    ``air_density`` overrides the density carried by ``model``.
    """
    model = model or PowerModel()
    if air_density is None:
        air_density = model.air_density
    if u < 0:
        raise DomainError(f"effective velocity must be non-negative, got {u}")
    p = (0.5 * power_coefficient(setpoint.alpha) * yaw_coefficient(model.yaw, setpoint.gamma)
         * tilt_coefficient(model.tilt, setpoint.beta) * air_density * spec.rotor_area * u ** 3)
    return min(p, spec.rated_power)
