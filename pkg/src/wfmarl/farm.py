"""Farm assembly: frame rotation, wake superposition, farm power and WTA groups."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .power import PowerModel, turbine_power
from .wake import (WAKE_WINDOW, Ambient, Setpoint, TurbineSpec, wake_geometry,
                   wake_velocity_at)

DOWNWIND_DIRECTION = math.radians(270.0)  # wind from the west blows along +x


class PartitionError(ValueError):
    """Turbine groups that do not tile the farm with single-turbine overlaps."""


@dataclass
class FarmLayout:
    specs: list[TurbineSpec]
    positions: np.ndarray  # (n, 2) metres, x east / y north
    ambient: Ambient = field(default_factory=Ambient)

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float).reshape(-1, 2)
        if len(self.specs) != len(self.positions):
            raise ValueError("one TurbineSpec per position required")
        if len(self.positions) > 1:
            diff = self.positions[:, None, :] - self.positions[None, :, :]
            dist = np.hypot(diff[..., 0], diff[..., 1])
            np.fill_diagonal(dist, np.inf)
            if dist.min() == 0.0:
                raise ValueError("turbine positions must be pairwise distinct")

    @property
    def n_turbines(self) -> int:
        return len(self.specs)

    @classmethod
    def row(cls, n: int, spacing_diameters: float = 7.0, spec: TurbineSpec | None = None,
            ambient: Ambient | None = None) -> "FarmLayout":
        spec = spec or TurbineSpec()
        xs = np.arange(n) * spacing_diameters * spec.rotor_diameter
        return cls([spec] * n, np.column_stack([xs, np.zeros(n)]), ambient or Ambient())


@dataclass
class FarmState:
    layout: FarmLayout
    setpoints: list[Setpoint]

    def __post_init__(self):
        if len(self.setpoints) != self.layout.n_turbines:
            raise ValueError(f"expected {self.layout.n_turbines} setpoints, got {len(self.setpoints)}")

    @classmethod
    def greedy(cls, layout: FarmLayout) -> "FarmState":
        return cls(layout, [Setpoint() for _ in range(layout.n_turbines)])

    def with_setpoints(self, setpoints) -> "FarmState":
        return FarmState(self.layout, list(setpoints))


@dataclass(frozen=True)
class WtaPartition:
    """Overlapping turbine groups (0-based indices); neighbours share one turbine."""

    groups: tuple[tuple[int, ...], ...]

    @property
    def high_level_ids(self) -> tuple[int, ...]:
        return tuple(g[-1] for g in self.groups[:-1])

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    @property
    def group_size(self) -> int:
        return len(self.groups[0])

    def validate(self, n_turbines: int) -> None:
        if not self.groups or any(len(g) == 0 for g in self.groups):
            raise PartitionError("partition needs at least one non-empty group")
        for g in self.groups:
            if any(b <= a for a, b in zip(g, g[1:])):
                raise PartitionError(f"group {g} is not strictly increasing")
        for prev, nxt in zip(self.groups, self.groups[1:]):
            shared = set(prev) & set(nxt)
            if len(shared) != 1 or prev[-1] != nxt[0]:
                raise PartitionError(
                    f"groups {prev} and {nxt} must share exactly one boundary turbine")
        covered = set().union(*map(set, self.groups))
        if covered != set(range(n_turbines)):
            raise PartitionError(f"groups do not cover turbines 0..{n_turbines - 1}")

    def describe(self) -> list[list[int]]:
        """Groups as 1-based turbine IDs."""
        return [[i + 1 for i in g] for g in self.groups]


def build_partition(layout: FarmLayout | int, group_size: int = 4) -> WtaPartition:
    """Consecutive groups of ``group_size`` turbines, each sharing its last turbine."""
    n = layout if isinstance(layout, int) else layout.n_turbines
    if group_size < 1:
        raise PartitionError("group_size must be at least 1")
    if group_size == 1:
        if n != 1:
            raise PartitionError("group_size 1 only tiles a single-turbine farm")
        return WtaPartition(((0,),))
    step = group_size - 1
    if n < group_size or (n - 1) % step:
        lo = (max(n - 1, step) // step) * step + 1
        raise PartitionError(
            f"{n} turbines cannot be tiled by overlapping groups of {group_size}; "
            f"turbine count must be 1 + k*{step} (e.g. {lo} or {lo + step})")
    return WtaPartition(tuple(tuple(range(s, s + group_size)) for s in range(0, n - 1, step)))


def _to_wind_frame(xy: np.ndarray, wind_direction: float) -> np.ndarray:
    s, c = math.sin(wind_direction), math.cos(wind_direction)
    rot = np.array([[-s, -c], [c, -s]])
    return np.asarray(xy, dtype=float) @ rot.T


def rotate_to_wind_frame(layout: FarmLayout) -> FarmLayout:
    """Rigidly rotate coordinates so the wind blows along +x."""
    positions = _to_wind_frame(layout.positions, layout.ambient.wind_direction)
    return FarmLayout(list(layout.specs), positions,
                      replace(layout.ambient, wind_direction=DOWNWIND_DIRECTION))


def _wake_arrays(state: FarmState, xy: np.ndarray):
    amb = state.layout.ambient
    geos = [wake_geometry(s, sp, amb) for s, sp in zip(state.layout.specs, state.setpoints)]
    return dict(
        tx=np.ascontiguousarray(xy[:, 0]),
        ty=np.ascontiguousarray(xy[:, 1]),
        hub=np.array([g.hub_height for g in geos]),
        diam=np.array([g.diameter for g in geos]),
        x0=np.array([g.x0 for g in geos]),
        theta=np.array([g.theta_c0 for g in geos]),
        sy0=np.array([g.sigma_y0 for g in geos]),
        sz0=np.array([g.sigma_z0 for g in geos]),
        m0=np.array([g.m0 for g in geos]),
        e0=np.array([g.e0 for g in geos]),
        alpha=np.array([sp.alpha for sp in state.setpoints], dtype=float),
    )


def _superpose(state: FarmState, xy_turbines, px, py, pz, kernel=None):
    kernel = kernel or kernels.superposed_velocity
    amb = state.layout.ambient
    if state.layout.n_turbines == 0:
        return np.full(len(px), float(amb.u_inf))
    arr = _wake_arrays(state, xy_turbines)
    return kernel(np.ascontiguousarray(px, dtype=float), np.ascontiguousarray(py, dtype=float),
                  np.ascontiguousarray(pz, dtype=float), arr["tx"], arr["ty"], arr["hub"],
                  arr["diam"], arr["x0"], arr["theta"], arr["sy0"], arr["sz0"], arr["m0"],
                  arr["e0"], arr["alpha"], float(amb.u_inf), float(amb.I0), WAKE_WINDOW)


def effective_velocities(state: FarmState, kernel=None) -> np.ndarray:
    """Hub-height effective velocity of every turbine (linear deficit superposition)."""
    xy = _to_wind_frame(state.layout.positions, state.layout.ambient.wind_direction)
    hubs = np.array([s.hub_height for s in state.layout.specs], dtype=float)
    return _superpose(state, xy, xy[:, 0], xy[:, 1], hubs, kernel)


def effective_velocities_reference(state: FarmState) -> np.ndarray:
    """Scalar evaluation through :func:`wake_velocity_at`; slow, used for checking kernels."""
    rotated = rotate_to_wind_frame(state.layout)
    amb = rotated.ambient
    out = np.empty(rotated.n_turbines)
    for n, (spec_n, pos_n) in enumerate(zip(rotated.specs, rotated.positions)):
        q = (pos_n[0], pos_n[1], spec_n.hub_height)
        deficit = 0.0
        for i, (spec_i, pos_i) in enumerate(zip(rotated.specs, rotated.positions)):
            if i != n:
                u_i, _ = wake_velocity_at(tuple(pos_i), spec_i, state.setpoints[i], amb, q)
                deficit += amb.u_inf - u_i
        out[n] = min(max(amb.u_inf - deficit, 0.0), amb.u_inf)
    return out


def turbine_powers(state: FarmState, power_model: PowerModel | None = None,
                   velocities: np.ndarray | None = None) -> np.ndarray:
    model = power_model or PowerModel()
    u = effective_velocities(state) if velocities is None else velocities
    return np.array([turbine_power(s, sp, float(v), model=model)
                     for s, sp, v in zip(state.layout.specs, state.setpoints, u)])


def farm_power_direct(state: FarmState, power_model: PowerModel | None = None,
                      velocities: np.ndarray | None = None) -> tuple[float, np.ndarray]:
    powers = turbine_powers(state, power_model, velocities)
    return float(powers.sum()), powers


def farm_power_wta(state: FarmState, partition: WtaPartition,
                   power_model: PowerModel | None = None) -> float:
    """Group power sums minus the shared turbines counted twice."""
    partition.validate(state.layout.n_turbines)
    _, powers = farm_power_direct(state, power_model)
    total = sum(powers[list(g)].sum() for g in partition.groups)
    return float(total - sum(powers[g[0]] for g in partition.groups[1:]))


def rasterize_flow(state: FarmState, x_range: tuple[float, float], y_range: tuple[float, float],
                   resolution: int | tuple[int, int], z: float | None = None, kernel=None):
    """Superposed velocity on a regular grid in layout coordinates.

    Returns ``(xs, ys, u)`` with ``u`` of shape ``(ny, nx)``.
    """
    nx, ny = (resolution, resolution) if np.isscalar(resolution) else resolution
    if nx < 1 or ny < 1:
        raise ValueError("resolution must be positive")
    xs = np.linspace(x_range[0], x_range[1], int(nx))
    ys = np.linspace(y_range[0], y_range[1], int(ny))
    gx, gy = np.meshgrid(xs, ys)
    if z is None:
        z = state.layout.specs[0].hub_height if state.layout.n_turbines else TurbineSpec().hub_height
    wd = state.layout.ambient.wind_direction
    pts = _to_wind_frame(np.column_stack([gx.ravel(), gy.ravel()]), wd)
    txy = _to_wind_frame(state.layout.positions, wd)
    u = _superpose(state, txy, pts[:, 0], pts[:, 1], np.full(len(pts), float(z)), kernel)
    return xs, ys, u.reshape(ny, nx)
