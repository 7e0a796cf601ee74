"""Single-turbine Gaussian wake with yaw deflection and tilt-modified rotor inflow.

All angles are radians. Downstream distances are measured from the rotor
plane of the wake-generating turbine, in metres, in the wind-aligned frame.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

K_ALPHA = 0.58
K_BETA = 0.077
WAKE_WINDOW = 15.0  # rotor diameters
MIN_TI_DISTANCE = 0.1  # rotor diameters

ALPHA_MAX = 1.0 / 3.0
GAMMA_MAX = math.radians(45.0)
BETA_MAX = math.radians(15.0)


class DomainError(ValueError):
    """Input outside the region where a model formula is defined."""


@dataclass(frozen=True)
class TurbineSpec:
    rotor_diameter: float = 126.0
    hub_height: float = 90.0
    rated_power: float = 5.0e6

    def __post_init__(self):
        if self.rotor_diameter <= 0:
            raise DomainError(f"rotor_diameter must be positive, got {self.rotor_diameter}")
        if self.rated_power <= 0:
            raise DomainError(f"rated_power must be positive, got {self.rated_power}")

    @property
    def rotor_area(self) -> float:
        return math.pi * self.rotor_diameter ** 2 / 4.0


@dataclass(frozen=True)
class Setpoint:
    """Control triple of one turbine: axial induction, yaw and tilt (radians)."""

    alpha: float = ALPHA_MAX
    gamma: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        check_setpoint(self.alpha, self.gamma, self.beta)

    @classmethod
    def from_degrees(cls, alpha: float, gamma_deg: float = 0.0, beta_deg: float = 0.0) -> "Setpoint":
        return cls(alpha, math.radians(gamma_deg), math.radians(beta_deg))


def check_setpoint(alpha: float, gamma: float, beta: float) -> None:
    # small slack so values produced by exact degree->radian conversion pass
    tol = 1e-12
    if not (-tol <= alpha <= ALPHA_MAX + tol):
        raise DomainError(f"axial induction {alpha} outside [0, 1/3]")
    if abs(gamma) > GAMMA_MAX + tol:
        raise DomainError(f"yaw {math.degrees(gamma):.3f} deg outside +-45 deg")
    if abs(beta) > BETA_MAX + tol:
        raise DomainError(f"tilt {math.degrees(beta):.3f} deg outside +-15 deg")


@dataclass(frozen=True)
class Ambient:
    u_inf: float = 8.0
    wind_direction: float = math.radians(270.0)  # meteorological, radians
    I0: float = 0.1

    def __post_init__(self):
        if self.u_inf < 0:
            raise DomainError(f"u_inf must be non-negative, got {self.u_inf}")
        if not 0.0 < self.I0 < 1.0:
            raise DomainError(f"ambient turbulence intensity {self.I0} outside (0, 1)")


@dataclass(frozen=True)
class WakeGeometry:
    """Distance-independent wake quantities of one turbine."""

    diameter: float
    hub_height: float
    u_inf: float
    I0: float
    alpha: float
    c_t: float
    x0: float
    theta_c0: float
    sigma_y0: float
    sigma_z0: float
    u0: float
    u_r: float

    @property
    def m0(self) -> float:
        c0 = deficit_ratio(self)
        return c0 * (2.0 - c0)

    @property
    def e0(self) -> float:
        c0 = deficit_ratio(self)
        return c0 ** 2 - 3.0 * math.exp(1.0 / 12.0) * c0 + 3.0 * math.exp(1.0 / 3.0)


def thrust_coefficient(alpha: float) -> float:
    """Actuator-disc thrust coefficient ``4a(1-a)``."""
    if not 0.0 <= alpha <= ALPHA_MAX + 1e-12:
        raise DomainError(f"axial induction {alpha} outside [0, 1/3]")
    return 4.0 * alpha * (1.0 - alpha)


def core_velocity(ambient: Ambient, c_t: float) -> float:
    if not 0.0 <= c_t < 1.0:
        raise DomainError(f"thrust coefficient {c_t} outside [0, 1)")
    return ambient.u_inf * math.sqrt(1.0 - c_t)


def turbulence_intensity(ambient: Ambient, alpha: float, downstream_distance: float,
                         spec: TurbineSpec) -> float:
    """Ambient plus wake-added turbulence intensity at a downstream distance."""
    if downstream_distance < 0:
        raise DomainError("downstream_distance must be non-negative")
    if alpha <= 0.0:
        return ambient.I0
    xn = max(downstream_distance / spec.rotor_diameter, MIN_TI_DISTANCE)
    added = 0.9 * alpha ** 0.8 * ambient.I0 ** 0.1 * xn ** -0.32
    return math.sqrt(ambient.I0 ** 2 + added ** 2)


def potential_core_length(spec: TurbineSpec, gamma: float, c_t: float, I_ambient: float) -> float:
    cg = math.cos(gamma)
    if c_t * cg >= 1.0 or c_t >= 1.0:
        raise DomainError("C_T cos(gamma) must be below 1")
    num = spec.rotor_diameter * cg * (1.0 + math.sqrt(1.0 - c_t * cg))
    den = math.sqrt(2.0) * (4.0 * K_ALPHA * I_ambient + 2.0 * K_BETA * math.sqrt(1.0 - c_t))
    return num / den


def near_wake_skew(gamma: float, c_t: float) -> float:
    cg = math.cos(gamma)
    if c_t * cg >= 1.0:
        raise DomainError("C_T cos(gamma) must be below 1")
    return 0.3 * gamma / cg * (1.0 - math.sqrt(1.0 - c_t * cg))


def rotor_velocity(u_inf: float, c_t: float, gamma: float, beta: float) -> float:
    ctgb = c_t * math.cos(gamma) * math.cos(beta)
    if ctgb >= 1.0:
        raise DomainError("C_T cos(gamma) cos(beta) must be below 1")
    # x / (2(1 - sqrt(1-x))) == (1 + sqrt(1-x)) / 2: no 0/0 at x = 0, no cancellation near it
    return u_inf * (1.0 + math.sqrt(1.0 - ctgb)) / 2.0


def initial_wake_widths(spec: TurbineSpec, ambient: Ambient, gamma: float, beta: float,
                        alpha: float, c_t: float) -> tuple[float, float]:
    u_r = rotor_velocity(ambient.u_inf, c_t, gamma, beta)
    u0 = ambient.u_inf * math.sqrt(1.0 - c_t)
    if ambient.u_inf + u0 == 0.0:
        # zero inflow: ratio is the tilt-free limit u_R/(u_inf + u0) at u_inf -> 0
        ratio = rotor_velocity(1.0, c_t, gamma, beta) / (1.0 + math.sqrt(1.0 - c_t))
    else:
        ratio = u_r / (ambient.u_inf + u0)
    sigma_z0 = 0.5 * spec.rotor_diameter * math.sqrt(ratio)
    # cos(alpha) of the induction factor, as the model is stated
    sigma_y0 = sigma_z0 * math.cos(gamma) * math.cos(alpha)
    return sigma_y0, sigma_z0


def wake_geometry(spec: TurbineSpec, setpoint: Setpoint, ambient: Ambient) -> WakeGeometry:
    c_t = thrust_coefficient(setpoint.alpha)
    u0 = core_velocity(ambient, c_t)
    sy0, sz0 = initial_wake_widths(spec, ambient, setpoint.gamma, setpoint.beta, setpoint.alpha, c_t)
    return WakeGeometry(
        diameter=spec.rotor_diameter,
        hub_height=spec.hub_height,
        u_inf=ambient.u_inf,
        I0=ambient.I0,
        alpha=setpoint.alpha,
        c_t=c_t,
        x0=potential_core_length(spec, setpoint.gamma, c_t, ambient.I0),
        theta_c0=near_wake_skew(setpoint.gamma, c_t),
        sigma_y0=sy0,
        sigma_z0=sz0,
        u0=u0,
        u_r=rotor_velocity(ambient.u_inf, c_t, setpoint.gamma, setpoint.beta),
    )


def deficit_ratio(geometry: WakeGeometry) -> float:
    """Speed drop ratio ``1 - u0/u_inf`` (independent of u_inf)."""
    return 1.0 - math.sqrt(1.0 - geometry.c_t)


def growth_rate(I_local: float) -> float:
    return 0.38 * I_local + 0.004


def local_turbulence(geometry: WakeGeometry, downstream_distance: float) -> float:
    if geometry.alpha <= 0.0:
        return geometry.I0
    xn = max(downstream_distance / geometry.diameter, MIN_TI_DISTANCE)
    added = 0.9 * geometry.alpha ** 0.8 * geometry.I0 ** 0.1 * xn ** -0.32
    return math.sqrt(geometry.I0 ** 2 + added ** 2)


def wake_widths(geometry: WakeGeometry, downstream_distance: float, I_local: float) -> tuple[float, float]:
    """Linear far-wake growth; widths are frozen at their initial values inside the core."""
    if downstream_distance < 0:
        raise DomainError("downstream_distance must be non-negative")
    if downstream_distance <= geometry.x0:
        return geometry.sigma_y0, geometry.sigma_z0
    k = growth_rate(I_local)
    grown = k * (downstream_distance - geometry.x0)
    return grown + geometry.sigma_y0, grown + geometry.sigma_z0


def far_wake_deflection(geometry: WakeGeometry, downstream_distance: float,
                        sigma_y: float, sigma_z: float, k: float | None = None) -> float:
    """Lateral wake-centre offset.

    ``k`` is the local growth rate; when omitted it is recomputed from the
    local turbulence intensity at ``downstream_distance``.
    """
    x = downstream_distance
    th = geometry.theta_c0
    if x <= geometry.x0:
        return th * x
    m0 = geometry.m0
    if m0 <= 0.0 or th == 0.0:
        return th * geometry.x0
    if k is None:
        k = growth_rate(local_turbulence(geometry, x))
    sm = math.sqrt(m0)
    s0 = geometry.sigma_y0 * geometry.sigma_z0
    r = math.sqrt(sigma_y * sigma_z / s0)
    log_term = math.log((1.6 + sm) * (1.6 * r - sm) / ((1.6 - sm) * (1.6 * r + sm)))
    return th * geometry.e0 / 5.2 * math.sqrt(s0 / (k * k * m0)) * log_term + th * geometry.x0


def deficit_amplitude(geometry: WakeGeometry, sigma_y: float, sigma_z: float) -> float:
    rad = 1.0 - geometry.sigma_y0 * geometry.sigma_z0 * geometry.m0 / (sigma_y * sigma_z)
    rad = min(max(rad, 0.0), 1.0)
    return 1.0 - math.sqrt(rad)


def wake_velocity_at(turbine_position: tuple[float, float], spec: TurbineSpec, setpoint: Setpoint,
                     ambient: Ambient, query_point: tuple[float, float, float],
                     geometry: WakeGeometry | None = None) -> tuple[float, float]:
    """Wake velocity and skew angle of one turbine at a point (wind-aligned frame).

    Returns ``(u, theta)``; ``u = u_inf`` and ``theta = 0`` upstream of the
    rotor or beyond the 15 D wake window.
    """
    if geometry is None:
        geometry = wake_geometry(spec, setpoint, ambient)
    x = query_point[0] - turbine_position[0]
    if x <= 0.0 or x > WAKE_WINDOW * geometry.diameter:
        return ambient.u_inf, 0.0
    I_local = local_turbulence(geometry, x)
    sy, sz = wake_widths(geometry, x, I_local)
    delta = far_wake_deflection(geometry, x, sy, sz, growth_rate(I_local))
    dy = query_point[1] - turbine_position[1] - delta
    dz = query_point[2] - geometry.hub_height
    shape_z = math.exp(-dz * dz / (2.0 * sz * sz))
    c = deficit_amplitude(geometry, sy, sz)
    u = ambient.u_inf * (1.0 - c * math.exp(-dy * dy / (2.0 * sy * sy)) * shape_z)
    skew = geometry.theta_c0 * math.exp(-(dy + sy) ** 2 / (2.0 * sy * sy)) * shape_z
    return min(max(u, 0.0), ambient.u_inf), skew
