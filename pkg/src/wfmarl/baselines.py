"""Reference controllers: greedy, PID yaw regulation, coordinated grid search."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .farm import FarmLayout, FarmState, _to_wind_frame, farm_power_direct
from .power import PowerModel
from .wake import GAMMA_MAX, Setpoint, check_setpoint


def greedy_baseline(farm: FarmLayout) -> FarmState:
    """Every turbine at the isolated optimum (Betz induction, no misalignment)."""
    return FarmState.greedy(farm)


@dataclass(frozen=True)
class PidGains:
    kp: float = 0.5
    ki: float = 0.1
    kd: float = 0.0


@dataclass(frozen=True)
class PidState:
    integral: float = 0.0
    prev_error: float = 0.0


def pid_yaw_step(current_gamma: float, target_gamma: float, gains: PidGains = PidGains(),
                 state: PidState = PidState(), dt: float = 1.0) -> tuple[float, PidState]:
    """One positional PID update of the yaw angle (radians), clamped to +-45 deg."""
    error = target_gamma - current_gamma
    integral = state.integral + error * dt
    derivative = (error - state.prev_error) / dt
    correction = gains.kp * error + gains.ki * integral + gains.kd * derivative
    new_gamma = min(max(current_gamma + correction * dt, -GAMMA_MAX), GAMMA_MAX)
    return new_gamma, PidState(integral, error)


def pid_baseline(farm: FarmLayout, initial_yaw: float | list[float] = 0.0, steps: int = 50,
                 gains: PidGains = PidGains(), dt: float = 1.0) -> FarmState:
    """Univariate yaw regulation toward wind alignment from an initial misalignment."""
    n = farm.n_turbines
    yaw = list(np.broadcast_to(np.asarray(initial_yaw, dtype=float), (n,)))
    states = [PidState() for _ in range(n)]
    for _ in range(steps):
        for i in range(n):
            yaw[i], states[i] = pid_yaw_step(yaw[i], 0.0, gains, states[i], dt)
    return FarmState(farm, [Setpoint(1.0 / 3.0, g, 0.0) for g in yaw])


@dataclass(frozen=True)
class GridSearchConfig:
    gamma_deg: tuple[float, ...] = (-30.0, -20.0, -10.0, 0.0, 10.0, 20.0, 30.0)
    beta_deg: tuple[float, ...] = (-15.0, -7.5, 0.0, 7.5, 15.0)
    alpha: tuple[float, ...] = (0.20, 0.25, 0.30, 1.0 / 3.0)
    passes: int = 3
    order: str = "upstream"  # or "index"

    def __post_init__(self):
        if self.passes < 1:
            raise ValueError("passes must be >= 1")
        for a, g, b in self.levels():
            check_setpoint(a, g, b)

    def levels(self) -> list[tuple[float, float, float]]:
        return [(a, math.radians(g), math.radians(b))
                for a, g, b in itertools.product(self.alpha, self.gamma_deg, self.beta_deg)]


@dataclass
class GridSearchResult:
    state: FarmState
    power: float
    pass_powers: list[float] = field(default_factory=list)
    evaluations: int = 0


def sweep_order(farm: FarmLayout, order: str = "upstream") -> list[int]:
    if order == "index":
        return list(range(farm.n_turbines))
    xw = _to_wind_frame(farm.positions, farm.ambient.wind_direction)[:, 0]
    return sorted(range(farm.n_turbines), key=lambda i: (xw[i], i))


def coordinated_grid_search(farm: FarmLayout, config: GridSearchConfig = GridSearchConfig(),
                            power_model: PowerModel | None = None,
                            start: FarmState | None = None) -> GridSearchResult:
    """Coordinate descent over turbines, exhaustive over the level grid per turbine.

    A move is accepted only when it strictly raises farm power, so power is
    non-decreasing across passes.
    """
    state = start or greedy_baseline(farm)
    setpoints = list(state.setpoints)
    best, _ = farm_power_direct(state, power_model)
    candidates = [Setpoint(a, g, b) for a, g, b in config.levels()]
    result = GridSearchResult(state, best)
    for _ in range(config.passes):
        for i in sweep_order(farm, config.order):
            keep = setpoints[i]
            for cand in candidates:
                setpoints[i] = cand
                p, _ = farm_power_direct(FarmState(farm, setpoints), power_model)
                result.evaluations += 1
                if p > best:
                    best, keep = p, cand
            setpoints[i] = keep
        result.pass_powers.append(best)
    result.state = FarmState(farm, list(setpoints))
    result.power = best
    return result


def exhaustive_joint_search(farm: FarmLayout, config: GridSearchConfig = GridSearchConfig(),
                            power_model: PowerModel | None = None) -> GridSearchResult:
    """Brute force over the full joint grid; only feasible for tiny farms."""
    candidates = [Setpoint(a, g, b) for a, g, b in config.levels()]
    best_p, best_sp, count = -1.0, None, 0
    for combo in itertools.product(candidates, repeat=farm.n_turbines):
        p, _ = farm_power_direct(FarmState(farm, list(combo)), power_model)
        count += 1
        if p > best_p:
            best_p, best_sp = p, combo
    return GridSearchResult(FarmState(farm, list(best_sp)), best_p, [best_p], count)
