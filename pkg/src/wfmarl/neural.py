"""Small tanh MLP with hand-written backprop, diagonal Gaussian head and RMSprop."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

LOG_2PI = math.log(2.0 * math.pi)
CHECKPOINT_VERSION = 1


def orthogonal(shape: tuple[int, int], gain: float, rng: np.random.Generator) -> np.ndarray:
    rows, cols = shape
    a = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(a)
    q = q * np.sign(np.diag(r))
    if rows < cols:
        q = q.T
    return gain * q[:rows, :cols]


class MLP:
    """Fully connected network: tanh hidden layers, linear output.

    Weights are stored as ``(fan_in, fan_out)`` so a batch ``x`` of shape
    ``(B, fan_in)`` maps as ``x @ W + b``.
    """

    def __init__(self, sizes: list[int], rng: np.random.Generator | None = None,
                 output_gain: float = 1.0, hidden_gain: float = math.sqrt(2.0)):
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        self.sizes = list(sizes)
        rng = rng if rng is not None else np.random.default_rng(0)
        self.params: list[np.ndarray] = []
        for i, (fi, fo) in enumerate(zip(sizes, sizes[1:])):
            gain = output_gain if i == len(sizes) - 2 else hidden_gain
            self.params += [orthogonal((fi, fo), gain, rng), np.zeros(fo)]

    @property
    def n_layers(self) -> int:
        return len(self.sizes) - 1

    def forward(self, x: np.ndarray):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.sizes[0]:
            raise ValueError(f"input dim {x.shape[-1]} != {self.sizes[0]}")
        squeeze = x.ndim == 1
        h = x[None, :] if squeeze else x
        acts = [h]
        for i in range(self.n_layers):
            z = h @ self.params[2 * i] + self.params[2 * i + 1]
            h = z if i == self.n_layers - 1 else np.tanh(z)
            acts.append(h)
        out = h[0] if squeeze else h
        return out, (acts, squeeze)

    def backward(self, cache, grad_out: np.ndarray) -> list[np.ndarray]:
        """Parameter gradients given dLoss/dOutput (same shape as the output)."""
        if cache is None:
            raise RuntimeError("backward needs the cache returned by forward")
        acts, squeeze = cache
        g = np.asarray(grad_out, dtype=float)
        g = g[None, :] if squeeze else g
        grads: list[np.ndarray] = [None] * len(self.params)  # type: ignore[list-item]
        for i in reversed(range(self.n_layers)):
            if i < self.n_layers - 1:
                g = g * (1.0 - acts[i + 1] ** 2)
            grads[2 * i] = acts[i].T @ g
            grads[2 * i + 1] = g.sum(axis=0)
            if i > 0:
                g = g @ self.params[2 * i].T
        return grads

    def flat(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.params])

    def set_flat(self, vec: np.ndarray) -> None:
        i = 0
        for p in self.params:
            p[...] = np.asarray(vec[i:i + p.size]).reshape(p.shape)
            i += p.size


class GaussianHead:
    """Diagonal Gaussian with a state-independent learned log standard deviation."""

    def __init__(self, dim: int, init_log_std: float = 0.0):
        self.log_std = np.full(dim, float(init_log_std))

    @property
    def std(self) -> np.ndarray:
        return np.exp(self.log_std)

    def log_prob(self, mean: np.ndarray, action: np.ndarray) -> np.ndarray:
        z = (action - mean) / self.std
        return np.sum(-0.5 * z * z - self.log_std - 0.5 * LOG_2PI, axis=-1)

    def sample(self, mean: np.ndarray, rng: np.random.Generator):
        z = rng.standard_normal(np.shape(mean))
        action = mean + self.std * z
        logp = np.sum(-0.5 * z * z - self.log_std - 0.5 * LOG_2PI, axis=-1)
        return action, logp

    def entropy(self) -> float:
        return float(np.sum(0.5 + 0.5 * LOG_2PI + self.log_std))

    def log_prob_grads(self, mean: np.ndarray, action: np.ndarray):
        """d log_prob / d mean (per sample) and d log_prob / d log_std (per sample)."""
        var = self.std ** 2
        diff = action - mean
        return diff / var, diff * diff / var - 1.0


def sample_action(head: GaussianHead, mean: np.ndarray, rng: np.random.Generator):
    return head.sample(mean, rng)


def tanh_log_det(raw: np.ndarray) -> np.ndarray:
    """``sum log(1 - tanh(a)^2)`` over the last axis, stable for large ``|a|``."""
    raw = np.asarray(raw, dtype=float)
    return np.sum(2.0 * (math.log(2.0) - raw - np.logaddexp(0.0, -2.0 * raw)), axis=-1)


def entropy(head: GaussianHead) -> float:
    return head.entropy()


@dataclass
class RMSprop:
    lr: float = 5e-4
    decay: float = 0.99
    eps: float = 1e-5
    acc: list[np.ndarray] = field(default_factory=list)

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        """In-place update of ``params``; rejects non-finite gradients untouched."""
        if len(params) != len(grads):
            raise ValueError("params and grads differ in length")
        for p, g in zip(params, grads):
            if p.shape != np.shape(g):
                raise ValueError(f"gradient shape {np.shape(g)} != parameter shape {p.shape}")
            if not np.all(np.isfinite(g)):
                raise FloatingPointError("non-finite gradient; optimizer step rejected")
        if not self.acc:
            self.acc = [np.zeros_like(p) for p in params]
        for p, g, a in zip(params, grads, self.acc):
            a *= self.decay
            a += (1.0 - self.decay) * g * g
            p -= self.lr * g / (np.sqrt(a) + self.eps)


def optimizer_step(params: list[np.ndarray], grads: list[np.ndarray], state: RMSprop) -> list[np.ndarray]:
    state.step(params, grads)
    return params


def _encode(arr: np.ndarray) -> dict:
    return {"shape": list(arr.shape), "data": [float(v) for v in np.ravel(arr)]}


def _decode(obj: dict) -> np.ndarray:
    return np.array(obj["data"], dtype=float).reshape(obj["shape"])


def save_checkpoint(path: str | Path, networks: dict[str, MLP], heads: dict[str, GaussianHead],
                    optimizers: dict[str, RMSprop], meta: dict | None = None) -> None:
    """JSON container; float repr round-trips every float64 exactly."""
    doc = {
        "version": CHECKPOINT_VERSION,
        "meta": meta or {},
        "networks": {k: {"sizes": n.sizes, "params": [_encode(p) for p in n.params]}
                     for k, n in networks.items()},
        "heads": {k: _encode(h.log_std) for k, h in heads.items()},
        "optimizers": {k: {"lr": o.lr, "decay": o.decay, "eps": o.eps,
                           "acc": [_encode(a) for a in o.acc]} for k, o in optimizers.items()},
    }
    Path(path).write_text(json.dumps(doc))


def load_checkpoint(path: str | Path):
    doc = json.loads(Path(path).read_text())
    if doc.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {doc.get('version')!r}")
    networks = {}
    for k, spec in doc["networks"].items():
        net = MLP(spec["sizes"])
        net.params = [_decode(p) for p in spec["params"]]
        networks[k] = net
    heads = {}
    for k, enc in doc["heads"].items():
        head = GaussianHead(int(np.prod(enc["shape"])))
        head.log_std = _decode(enc)
        heads[k] = head
    optimizers = {k: RMSprop(o["lr"], o["decay"], o["eps"], [_decode(a) for a in o["acc"]])
                  for k, o in doc["optimizers"].items()}
    return networks, heads, optimizers, doc["meta"]
