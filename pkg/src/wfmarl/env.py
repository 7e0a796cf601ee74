"""Multi-agent steady-state wind-farm environment with hierarchical messaging.

Each agent controls one WTA (group of ``N`` turbines). Observations follow the
order x's, y's, u's, wd's, then received messages; actions follow α's, β's,
γ's. The outgoing messages are the turbines' own (u, wd) and are routed by the
environment rather than learned.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .farm import (FarmLayout, FarmState, WtaPartition, build_partition, effective_velocities,
                   farm_power_direct)
from .power import PowerModel
from .wake import ALPHA_MAX, BETA_MAX, GAMMA_MAX, Setpoint

MESSAGE_SLOTS = 2  # upstream and downstream neighbour
MESSAGE_WIDTH = 2  # (u, wd)


@dataclass(frozen=True)
class EnvConfig:
    group_size: int = 4
    episode_length: int = 25
    jitter: bool = False
    jitter_fraction: float = 0.1
    coord_scale: float = 5000.0
    speed_scale: float = 10.0
    squash: bool = True  # tanh on raw policy samples before the affine map

    def __post_init__(self):
        if self.group_size < 1 or self.episode_length < 1:
            raise ValueError("group_size and episode_length must be >= 1")
        if not 0.0 <= self.jitter_fraction < 1.0:
            raise ValueError("jitter_fraction must be in [0, 1)")
        if self.coord_scale <= 0 or self.speed_scale <= 0:
            raise ValueError("normalization scales must be positive")


def route_messages(partition: WtaPartition, velocities: np.ndarray,
                   directions: np.ndarray) -> list[np.ndarray]:
    """Per-agent received messages after the three communication phases.

    1. each group's (u, wd) is averaged at its high-level turbine(s);
    2. high-level turbines exchange aggregates with adjacent groups only;
    3. received aggregates are copied to every turbine of the group, so the
       agent-level vector is the concatenation ``[upstream (u, wd), downstream (u, wd)]``
       with zeros for a missing neighbour.
    """
    velocities = np.asarray(velocities, dtype=float)
    directions = np.asarray(directions, dtype=float)
    aggregates = [np.array([velocities[list(g)].mean(), directions[list(g)].mean()])
                  for g in partition.groups]
    out = []
    for m in range(partition.n_groups):
        zeta = np.zeros(MESSAGE_SLOTS * MESSAGE_WIDTH)
        if m > 0:
            zeta[0:2] = aggregates[m - 1]
        if m < partition.n_groups - 1:
            zeta[2:4] = aggregates[m + 1]
        out.append(zeta)
    return out


def build_observation(state: FarmState, partition: WtaPartition, agent: int,
                      messages: list[np.ndarray], velocities: np.ndarray | None = None) -> np.ndarray:
    if not 0 <= agent < partition.n_groups:
        raise IndexError(f"agent {agent} outside 0..{partition.n_groups - 1}")
    idx = list(partition.groups[agent])
    u = effective_velocities(state) if velocities is None else np.asarray(velocities)
    pos = state.layout.positions[idx]
    wd = np.full(len(idx), state.layout.ambient.wind_direction)
    return np.concatenate([pos[:, 0], pos[:, 1], u[idx], wd, messages[agent]])


def normalize_observation(obs: np.ndarray, group_size: int, config: EnvConfig) -> np.ndarray:
    """Network input scaling; coordinates are taken relative to the group's first turbine."""
    n = group_size
    out = np.array(obs, dtype=float)
    out[0:n] = (out[0:n] - out[0]) / config.coord_scale
    out[n:2 * n] = (out[n:2 * n] - out[n]) / config.coord_scale
    out[2 * n:3 * n] /= config.speed_scale
    out[3 * n:4 * n] /= 2.0 * math.pi
    msg = out[4 * n:].reshape(-1, MESSAGE_WIDTH)
    msg[:, 0] /= config.speed_scale
    msg[:, 1] /= 2.0 * math.pi
    return np.clip(out, -1.0, 1.0)


def squash_to_setpoint(a_alpha: float, a_beta: float, a_gamma: float) -> Setpoint:
    """Affine map of ``[-1, 1]`` values onto the admissible setpoint box."""
    a_alpha, a_beta, a_gamma = (min(max(float(v), -1.0), 1.0) for v in (a_alpha, a_beta, a_gamma))
    return Setpoint(alpha=(a_alpha + 1.0) / 2.0 * ALPHA_MAX, gamma=GAMMA_MAX * a_gamma,
                    beta=BETA_MAX * a_beta)


def apply_action(state: FarmState, partition: WtaPartition, actions) -> tuple[FarmState, float]:
    """Map per-agent actions in ``[-1, 1]^{3N}`` to setpoints.

    Shared turbines take the value of the lower-indexed group. Returns the new
    state and the largest per-channel disagreement on shared turbines.
    """
    actions = np.asarray(actions, dtype=float)
    if not np.all(np.isfinite(actions)):
        raise ValueError("non-finite action")
    n = partition.group_size
    if actions.shape != (partition.n_groups, 3 * n):
        raise ValueError(f"actions must have shape {(partition.n_groups, 3 * n)}, got {actions.shape}")
    setpoints: list[Setpoint | None] = [None] * state.layout.n_turbines
    chosen: dict[int, np.ndarray] = {}
    conflict = 0.0
    for m, group in enumerate(partition.groups):
        a = np.clip(actions[m], -1.0, 1.0)
        for j, t in enumerate(group):
            triple = np.array([a[j], a[n + j], a[2 * n + j]])
            if setpoints[t] is None:
                setpoints[t] = squash_to_setpoint(*triple)
                chosen[t] = triple
            else:
                conflict = max(conflict, float(np.max(np.abs(triple - chosen[t]))))
    return state.with_setpoints(setpoints), conflict


class WindFarmEnv:
    """Quasi-steady episodic environment; one shared reward for all agents."""

    def __init__(self, layout: FarmLayout, config: EnvConfig = EnvConfig(),
                 power_model: PowerModel | None = None):
        self.base_layout = layout
        self.config = config
        self.power_model = power_model or PowerModel()
        self.partition = build_partition(layout, config.group_size)
        self.n_agents = self.partition.n_groups
        self.group_size = self.partition.group_size
        self.obs_dim = 4 * self.group_size + MESSAGE_SLOTS * MESSAGE_WIDTH
        self.action_dim = 3 * self.group_size
        self.rated_total = sum(s.rated_power for s in layout.specs)
        self.state = FarmState.greedy(layout)
        self.velocities = np.full(layout.n_turbines, layout.ambient.u_inf)
        self.t = 0
        self.done = True
        self.trajectory: list[dict] = []

    @property
    def state_dim(self) -> int:
        return self.n_agents * self.obs_dim

    def reset(self, seed: int | None = None) -> list[np.ndarray]:
        layout = self.base_layout
        if self.config.jitter:
            rng = np.random.default_rng(seed)
            scale = 1.0 + self.config.jitter_fraction * rng.uniform(-1.0, 1.0)
            amb = layout.ambient
            layout = FarmLayout(layout.specs, layout.positions,
                                type(amb)(amb.u_inf * scale, amb.wind_direction, amb.I0))
        self.state = FarmState.greedy(layout)
        self.velocities = effective_velocities(self.state)
        self.t = 0
        self.done = False
        self.trajectory = []
        return self.observations()

    def messages(self) -> list[np.ndarray]:
        wd = np.full(self.state.layout.n_turbines, self.state.layout.ambient.wind_direction)
        return route_messages(self.partition, self.velocities, wd)

    def observations(self) -> list[np.ndarray]:
        msgs = self.messages()
        return [build_observation(self.state, self.partition, m, msgs, self.velocities)
                for m in range(self.n_agents)]

    def normalized(self, observations: list[np.ndarray]) -> np.ndarray:
        return np.stack([normalize_observation(o, self.group_size, self.config) for o in observations])

    def step(self, raw_actions):
        """Apply joint raw actions (shape ``(M, 3N)``); returns ``(obs, reward, done, info)``."""
        if self.done:
            raise RuntimeError("episode finished; call reset()")
        raw = np.asarray(raw_actions, dtype=float)
        if not np.all(np.isfinite(raw)):
            raise ValueError("non-finite action")
        bounded = np.tanh(raw) if self.config.squash else raw
        self.state, conflict = apply_action(self.state, self.partition, bounded)
        self.velocities = effective_velocities(self.state)
        total, powers = farm_power_direct(self.state, self.power_model, self.velocities)
        reward = total / self.rated_total
        self.t += 1
        self.done = self.t >= self.config.episode_length
        self.trajectory.append({"step": self.t, "setpoints": list(self.state.setpoints),
                                "powers": powers, "reward": reward})
        info = {"power": total, "powers": powers, "conflict": conflict}
        return self.observations(), reward, self.done, info

    def write_trajectory(self, path: str | Path) -> None:
        n = self.state.layout.n_turbines
        header = ["step"]
        for i in range(1, n + 1):
            header += [f"alpha_{i}", f"gamma_deg_{i}", f"beta_deg_{i}"]
        header += [f"power_w_{i}" for i in range(1, n + 1)] + ["reward"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in self.trajectory:
                vals = [row["step"]]
                for sp in row["setpoints"]:
                    vals += [repr(sp.alpha), repr(math.degrees(sp.gamma)), repr(math.degrees(sp.beta))]
                vals += [repr(float(p)) for p in row["powers"]] + [repr(row["reward"])]
                w.writerow(vals)
