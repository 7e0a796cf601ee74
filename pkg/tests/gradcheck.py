"""Central finite-difference check of MLP backprop."""
import numpy as np

from wfmarl.neural import MLP


def random_net(seed: int) -> tuple[MLP, np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    sizes = [int(rng.integers(2, 8)) for _ in range(int(rng.integers(2, 5)))]
    net = MLP(sizes, rng, output_gain=float(rng.uniform(0.1, 2.0)))
    for p in net.params:
        p += rng.normal(scale=0.3, size=p.shape)
    x = rng.normal(size=(int(rng.integers(1, 6)), sizes[0]))
    target = rng.normal(size=(len(x), sizes[-1]))
    return net, x, target


def loss_and_grad_out(net: MLP, x, target):
    out, cache = net.forward(x)
    # mixed quadratic and trigonometric loss so higher-order terms are exercised
    diff = out - target
    loss = 0.5 * np.sum(diff ** 2) + np.sum(np.sin(out))
    return loss, cache, diff + np.cos(out)


def max_relative_error(seed: int, h: float = 1e-5) -> float:
    net, x, target = random_net(seed)
    _, cache, g_out = loss_and_grad_out(net, x, target)
    analytic = np.concatenate([g.ravel() for g in net.backward(cache, g_out)])
    theta = net.flat()
    numeric = np.zeros_like(theta)
    for i in range(theta.size):
        for sign in (1.0, -1.0):
            t = theta.copy()
            t[i] += sign * h
            net.set_flat(t)
            numeric[i] += sign * loss_and_grad_out(net, x, target)[0]
        numeric[i] /= 2 * h
    net.set_flat(theta)
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-6)
    return float(np.max(np.abs(analytic - numeric) / scale))
