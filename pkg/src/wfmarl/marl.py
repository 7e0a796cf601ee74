"""Hierarchical-communication MAPPO: shared-reward actors with a centralized critic."""
from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .baselines import greedy_baseline
from .env import EnvConfig, WindFarmEnv
from .farm import FarmLayout, farm_power_direct
from .neural import MLP, GaussianHead, RMSprop, load_checkpoint, save_checkpoint, tanh_log_det

log = logging.getLogger(__name__)

CURVE_COLUMNS = ["episode", "mean_reward", "mean_power_w", "actor_loss", "critic_loss", "entropy"]


class TrainingDiverged(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    episodes: int = 2000
    episode_length: int = 25
    discount: float = 0.99
    gae_lambda: float = 0.95
    clip_eps: float = 0.2
    lr_actor: float = 5e-4
    lr_critic: float = 5e-4
    rms_decay: float = 0.99
    rms_eps: float = 1e-5
    entropy_coef: float = 0.01
    actor_update_steps: int = 15
    critic_update_steps: int = 15
    minibatches: int = 10
    episodes_per_batch: int = 10
    hidden: tuple[int, ...] = (64, 64)
    actor_output_gain: float = 0.01
    init_log_std: float = 0.0
    shared_actor: bool = True
    normalize_advantages: bool = True
    # log-probs of the squashed action; the term depends only on the sample, so PPO ratios are unchanged
    squash_correction: bool = False
    divergence_threshold: float = 10.0
    checkpoint_every: int = 0  # batches; 0 disables
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.discount <= 1.0:
            raise ValueError("discount must be in (0, 1]")
        if not 0.0 <= self.gae_lambda <= 1.0:
            raise ValueError("gae_lambda must be in [0, 1]")
        if self.clip_eps <= 0:
            raise ValueError("clip_eps must be positive")
        if self.episodes < 0 or self.episodes_per_batch < 1:
            raise ValueError("episodes must be >= 0 and episodes_per_batch >= 1")


def compute_gae(rewards, values, bootstrap_value: float, discount: float, lam: float):
    """Generalized advantage estimates and returns for one episode."""
    rewards = np.asarray(rewards, dtype=float)
    values = np.asarray(values, dtype=float)
    if rewards.shape != values.shape:
        raise ValueError("rewards and values must have equal length")
    adv = np.zeros_like(rewards)
    next_value, running = float(bootstrap_value), 0.0
    for t in reversed(range(len(rewards))):
        delta = rewards[t] + discount * next_value - values[t]
        running = delta + discount * lam * running
        adv[t] = running
        next_value = values[t]
    return adv, adv + values


def normalize(adv: np.ndarray) -> np.ndarray:
    std = adv.std()
    return (adv - adv.mean()) / (std + 1e-8)


def _clip_terms(log_probs_new, log_probs_old, advantages, eps):
    ratio = np.exp(np.asarray(log_probs_new, dtype=float) - np.asarray(log_probs_old, dtype=float))
    adv = np.asarray(advantages, dtype=float)
    finite = np.isfinite(ratio)
    ratio = np.where(finite, ratio, 1.0)
    unclipped = ratio * adv
    clipped = np.clip(ratio, 1.0 - eps, 1.0 + eps) * adv
    return ratio, finite, unclipped, clipped


def ppo_actor_loss(log_probs_new, log_probs_old, advantages, eps: float, entropy: float,
                   entropy_coef: float) -> float:
    """Negative clipped surrogate minus the entropy bonus; non-finite ratios are dropped."""
    _, finite, unclipped, clipped = _clip_terms(log_probs_new, log_probs_old, advantages, eps)
    if not finite.any():
        return -entropy_coef * entropy
    surrogate = np.minimum(unclipped, clipped)[finite].mean()
    return float(-surrogate - entropy_coef * entropy)


def ppo_actor_loss_grad(log_probs_new, log_probs_old, advantages, eps: float):
    """d loss / d log_prob_new per sample, and the number of excluded samples."""
    ratio, finite, unclipped, clipped = _clip_terms(log_probs_new, log_probs_old, advantages, eps)
    n = max(int(finite.sum()), 1)
    active = (unclipped <= clipped) & finite
    grad = np.where(active, -np.asarray(advantages, dtype=float) * ratio / n, 0.0)
    return grad, int((~finite).sum())


def critic_loss(values_pred, returns) -> float:
    diff = np.asarray(values_pred, dtype=float) - np.asarray(returns, dtype=float)
    return float(0.5 * np.mean(diff * diff))


class Policy:
    """Actor network(s) with Gaussian heads plus the centralized critic."""

    def __init__(self, obs_dim: int, action_dim: int, state_dim: int, n_agents: int,
                 config: TrainConfig = TrainConfig(), rng: np.random.Generator | None = None):
        rng = rng if rng is not None else np.random.default_rng(config.seed)
        self.obs_dim, self.action_dim, self.state_dim = obs_dim, action_dim, state_dim
        self.n_agents = n_agents
        self.shared = config.shared_actor
        self.squash_correction = config.squash_correction
        n_actor = 1 if self.shared else n_agents
        sizes = [obs_dim, *config.hidden, action_dim]
        self.actors = [MLP(sizes, rng, output_gain=config.actor_output_gain) for _ in range(n_actor)]
        self.heads = [GaussianHead(action_dim, config.init_log_std) for _ in range(n_actor)]
        self.critic = MLP([state_dim, *config.hidden, 1], rng, output_gain=1.0)
        opt = dict(decay=config.rms_decay, eps=config.rms_eps)
        self.actor_opts = [RMSprop(config.lr_actor, **opt) for _ in range(n_actor)]
        self.critic_opt = RMSprop(config.lr_critic, **opt)

    def actor_index(self, agent: int) -> int:
        return 0 if self.shared else agent

    def means(self, obs: np.ndarray) -> np.ndarray:
        if obs.shape[-1] != self.obs_dim:
            raise ValueError(f"observation dim {obs.shape[-1]} != actor input {self.obs_dim}")
        if self.shared:
            return self.actors[0].forward(obs)[0]
        return np.stack([self.actors[m].forward(obs[m])[0] for m in range(len(obs))])

    def act(self, obs: np.ndarray, rng: np.random.Generator | None = None,
            deterministic: bool = False):
        mean = self.means(obs)
        if deterministic:
            return mean, np.zeros(len(obs))
        actions, logp = [], []
        for m in range(len(obs)):
            a, lp = self.heads[self.actor_index(m)].sample(mean[m], rng)
            actions.append(a)
            logp.append(lp)
        return np.stack(actions), np.array(logp)

    def value(self, state: np.ndarray) -> np.ndarray:
        if state.shape[-1] != self.state_dim:
            raise ValueError(f"state dim {state.shape[-1]} != critic input {self.state_dim}")
        return self.critic.forward(state)[0][..., 0]

    def save(self, path, meta: dict | None = None) -> None:
        nets = {f"actor{i}": a for i, a in enumerate(self.actors)}
        nets["critic"] = self.critic
        opts = {f"actor{i}": o for i, o in enumerate(self.actor_opts)}
        opts["critic"] = self.critic_opt
        meta = dict(meta or {}, obs_dim=self.obs_dim, action_dim=self.action_dim,
                    state_dim=self.state_dim, n_agents=self.n_agents, shared=self.shared,
                    squash_correction=self.squash_correction)
        save_checkpoint(path, nets, {f"actor{i}": h for i, h in enumerate(self.heads)}, opts, meta)

    @classmethod
    def load(cls, path) -> tuple["Policy", dict]:
        nets, heads, opts, meta = load_checkpoint(path)
        pol = cls.__new__(cls)
        pol.obs_dim, pol.action_dim = meta["obs_dim"], meta["action_dim"]
        pol.state_dim, pol.n_agents, pol.shared = meta["state_dim"], meta["n_agents"], meta["shared"]
        pol.squash_correction = meta.get("squash_correction", False)
        n_actor = 1 if pol.shared else pol.n_agents
        pol.actors = [nets[f"actor{i}"] for i in range(n_actor)]
        pol.heads = [heads[f"actor{i}"] for i in range(n_actor)]
        pol.actor_opts = [opts[f"actor{i}"] for i in range(n_actor)]
        pol.critic, pol.critic_opt = nets["critic"], opts["critic"]
        return pol, meta


@dataclass
class RolloutBuffer:
    """Episode-aligned arrays: leading axes are (episode, step[, agent])."""

    obs: np.ndarray
    states: np.ndarray
    actions: np.ndarray
    log_probs: np.ndarray
    rewards: np.ndarray
    values: np.ndarray
    dones: np.ndarray
    bootstrap: np.ndarray
    powers: np.ndarray

    def __len__(self) -> int:
        return int(self.rewards.size)


def _run_episode(env: WindFarmEnv, policy: Policy, seed: int, deterministic: bool,
                 use_critic: bool) -> dict:
    rng = np.random.default_rng(seed)
    T, M = env.config.episode_length, env.n_agents
    ep = {"obs": np.zeros((T, M, env.obs_dim)), "actions": np.zeros((T, M, env.action_dim)),
          "log_probs": np.zeros((T, M)), "rewards": np.zeros(T), "values": np.zeros(T),
          "dones": np.zeros(T, dtype=bool), "powers": np.zeros(T), "bootstrap": 0.0}
    o = env.normalized(env.reset(seed=int(rng.integers(2 ** 31))))
    for t in range(T):
        a, lp = policy.act(o, rng, deterministic)
        if policy.squash_correction and not deterministic:
            lp = lp - tanh_log_det(a)
        ep["obs"][t], ep["actions"][t], ep["log_probs"][t] = o, a, lp
        if use_critic:
            ep["values"][t] = policy.value(o.reshape(-1))
        nxt, r, done, info = env.step(a)
        ep["rewards"][t], ep["dones"][t], ep["powers"][t] = r, done, info["power"]
        o = env.normalized(nxt)
    # time-limit truncation: bootstrap from the value of the final observation
    if use_critic:
        ep["bootstrap"] = float(policy.value(o.reshape(-1)))
    return ep


def _episode_worker(args):
    env, policy, seed, deterministic, use_critic = args
    return _run_episode(env, policy, seed, deterministic, use_critic)


def collect_rollouts(env: WindFarmEnv, policy: Policy, episodes: int, rng: np.random.Generator,
                     deterministic: bool = False, use_critic: bool = True,
                     executor=None) -> RolloutBuffer:
    """Run ``episodes`` complete episodes; actors see only their local observations.

    Every episode draws its own seed from ``rng``, so passing a process pool as
    ``executor`` yields the same buffer as serial collection.
    """
    if (policy.obs_dim, policy.action_dim) != (env.obs_dim, env.action_dim):
        raise ValueError("policy and environment dimensions differ")
    if use_critic and policy.state_dim != env.state_dim:
        raise ValueError("critic input does not match the environment's global state")
    if not policy.shared and policy.n_agents != env.n_agents:
        raise ValueError("per-agent actors require the same number of agents")
    seeds = [int(s) for s in rng.integers(2 ** 63, size=episodes)]
    if executor is None:
        eps = [_run_episode(env, policy, s, deterministic, use_critic) for s in seeds]
    else:
        eps = list(executor.map(_episode_worker,
                                [(env, policy, s, deterministic, use_critic) for s in seeds]))
    if not eps:
        raise ValueError("episodes must be positive")
    stack = {k: np.stack([np.asarray(e[k]) for e in eps]) for k in eps[0]}
    obs = stack["obs"]
    return RolloutBuffer(obs, obs.reshape(episodes, obs.shape[1], -1), stack["actions"],
                         stack["log_probs"], stack["rewards"], stack["values"], stack["dones"],
                         np.asarray(stack["bootstrap"], dtype=float), stack["powers"])


def _update_actor(policy: Policy, k: int, obs, actions, old_logp, adv, cfg: TrainConfig,
                  rng: np.random.Generator):
    actor, head, opt = policy.actors[k], policy.heads[k], policy.actor_opts[k]
    n = len(obs)
    losses, excluded = [], 0
    for _ in range(cfg.actor_update_steps):
        order = rng.permutation(n) if cfg.minibatches > 1 else np.arange(n)
        epoch_dev = []
        for idx in np.array_split(order, cfg.minibatches):
            mean, cache = actor.forward(obs[idx])
            new_logp = head.log_prob(mean, actions[idx])
            if policy.squash_correction:
                new_logp = new_logp - tanh_log_det(actions[idx])
            ent = head.entropy()
            losses.append(ppo_actor_loss(new_logp, old_logp[idx], adv[idx], cfg.clip_eps, ent,
                                         cfg.entropy_coef))
            g_logp, bad = ppo_actor_loss_grad(new_logp, old_logp[idx], adv[idx], cfg.clip_eps)
            excluded += bad
            ratio = np.exp(np.clip(new_logp - old_logp[idx], -50, 50))
            epoch_dev.append(np.mean(np.abs(ratio - 1.0)))
            d_mean, d_logstd = head.log_prob_grads(mean, actions[idx])
            grads = actor.backward(cache, g_logp[:, None] * d_mean)
            g_std = (g_logp[:, None] * d_logstd).sum(axis=0) - cfg.entropy_coef
            opt.step(actor.params + [head.log_std], grads + [g_std])
        if np.mean(epoch_dev) > cfg.divergence_threshold:
            raise TrainingDiverged(
                f"mean |ratio - 1| = {np.mean(epoch_dev):.3g} over a full epoch "
                f"(threshold {cfg.divergence_threshold})")
    return float(np.mean(losses)), excluded


def _update_critic(policy: Policy, states, returns, cfg: TrainConfig, rng: np.random.Generator):
    losses = []
    n = len(states)
    for _ in range(cfg.critic_update_steps):
        order = rng.permutation(n) if cfg.minibatches > 1 else np.arange(n)
        for idx in np.array_split(order, cfg.minibatches):
            out, cache = policy.critic.forward(states[idx])
            v = out[:, 0]
            losses.append(critic_loss(v, returns[idx]))
            grads = policy.critic.backward(cache, ((v - returns[idx]) / len(idx))[:, None])
            policy.critic_opt.step(policy.critic.params, grads)
    return float(np.mean(losses))


def update(policy: Policy, buf: RolloutBuffer, cfg: TrainConfig, rng: np.random.Generator) -> dict:
    E, T, M = buf.log_probs.shape
    adv = np.zeros((E, T))
    ret = np.zeros((E, T))
    for e in range(E):
        adv[e], ret[e] = compute_gae(buf.rewards[e], buf.values[e], buf.bootstrap[e],
                                     cfg.discount, cfg.gae_lambda)
    flat_adv = adv.reshape(-1)
    if cfg.normalize_advantages:
        flat_adv = normalize(flat_adv)
    agent_adv = np.repeat(flat_adv[:, None], M, axis=1)  # shared objective: same A for each agent
    obs = buf.obs.reshape(E * T, M, -1)
    acts = buf.actions.reshape(E * T, M, -1)
    old = buf.log_probs.reshape(E * T, M)
    losses, excluded = [], 0
    if policy.shared:
        loss, bad = _update_actor(policy, 0, obs.reshape(E * T * M, -1), acts.reshape(E * T * M, -1),
                                  old.reshape(-1), agent_adv.reshape(-1), cfg, rng)
        losses.append(loss)
        excluded += bad
    else:
        for m in range(M):
            loss, bad = _update_actor(policy, m, obs[:, m], acts[:, m], old[:, m], agent_adv[:, m],
                                      cfg, rng)
            losses.append(loss)
            excluded += bad
    c_loss = _update_critic(policy, buf.states.reshape(E * T, -1), ret.reshape(-1), cfg, rng)
    return {"actor_loss": float(np.mean(losses)), "critic_loss": c_loss,
            "entropy": float(np.mean([h.entropy() for h in policy.heads])), "excluded": excluded}


@dataclass
class TrainResult:
    policy: Policy
    curve: list[dict] = field(default_factory=list)

    def write_curve(self, path) -> None:
        write_curve(path, self.curve)


def write_curve(path, curve: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CURVE_COLUMNS)
        for row in curve:
            w.writerow([row["episode"]] + [repr(float(row[c])) for c in CURVE_COLUMNS[1:]])


def train(config: TrainConfig, env: WindFarmEnv, policy: Policy | None = None,
          checkpoint_dir: str | Path | None = None, workers: int = 1) -> TrainResult:
    """Alternate rollout batches and PPO epochs; deterministic for a fixed seed.

    ``workers > 1`` collects episodes in a process pool. Per-episode seeding
    keeps results identical to serial runs on one platform.
    """
    if env.config.episode_length != config.episode_length:
        env.config = EnvConfig(**{**asdict(env.config), "episode_length": config.episode_length})
    if config.squash_correction and not env.config.squash:
        raise ValueError("squash_correction needs an environment that squashes actions")
    rng = np.random.default_rng(config.seed)
    policy = policy or Policy(env.obs_dim, env.action_dim, env.state_dim, env.n_agents, config, rng)
    result = TrainResult(policy)
    done_eps, batch = 0, 0
    executor = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        while done_eps < config.episodes:
            done_eps, batch = _train_batch(config, env, policy, rng, result, done_eps, batch,
                                           checkpoint_dir, executor)
    finally:
        if executor is not None:
            executor.shutdown()
    return result


def _train_batch(config, env, policy, rng, result, done_eps, batch, checkpoint_dir, executor):
    n = min(config.episodes_per_batch, config.episodes - done_eps)
    buf = collect_rollouts(env, policy, n, rng, executor=executor)
    stats = update(policy, buf, config, rng)
    for e in range(n):
        result.curve.append({"episode": done_eps + e + 1, "mean_reward": buf.rewards[e].mean(),
                             "mean_power_w": buf.powers[e].mean(), **stats})
    done_eps += n
    batch += 1
    if checkpoint_dir is not None and config.checkpoint_every and batch % config.checkpoint_every == 0:
        policy.save(Path(checkpoint_dir) / f"checkpoint_{done_eps:06d}.json",
                    {"episodes": done_eps, "seed": config.seed})
    if batch % 20 == 0:
        log.info("episode %d mean reward %.4f", done_eps, buf.rewards.mean())
    return done_eps, batch


def evaluate(policy: Policy, env: WindFarmEnv, seed: int = 0, steps: int | None = None) -> dict:
    """Decentralized execution with the deterministic actor means; the critic is not used."""
    rng = np.random.default_rng(seed)
    o = env.normalized(env.reset(seed=seed))
    steps = steps or env.config.episode_length
    info = {}
    for _ in range(steps):
        a, _ = policy.act(o, rng, deterministic=True)
        nxt, _, done, info = env.step(a)
        o = env.normalized(nxt)
        if done:
            break
    return {"power_w": float(info["power"]), "powers_w": [float(p) for p in info["powers"]],
            "setpoints": env.state.setpoints, "state": env.state,
            "actions": a, "n_groups": env.n_agents}


def evaluate_transfer(policy: Policy, layouts: dict[str, FarmLayout], env_config: EnvConfig,
                      power_model=None) -> dict:
    """Run one trained (shared) actor on every WTA of each farm, without retraining."""
    report = {}
    for name, layout in layouts.items():
        env = WindFarmEnv(layout, env_config, power_model)
        if (env.obs_dim, env.action_dim) != (policy.obs_dim, policy.action_dim):
            raise ValueError(f"{name}: per-agent dims {(env.obs_dim, env.action_dim)} differ from "
                             f"policy {(policy.obs_dim, policy.action_dim)}")
        if not policy.shared and env.n_agents != policy.n_agents:
            raise ValueError(f"{name}: per-agent actors cannot transfer to {env.n_agents} groups")
        res = evaluate(policy, env)
        greedy, _ = farm_power_direct(greedy_baseline(env.state.layout), env.power_model)
        report[name] = {"n_turbines": layout.n_turbines, "n_groups": env.n_agents,
                        "power_w": res["power_w"], "greedy_power_w": greedy,
                        "gain": res["power_w"] / greedy if greedy > 0 else math.nan,
                        "setpoints": res["setpoints"], "state": res["state"]}
    return report
