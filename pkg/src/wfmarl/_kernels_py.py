"""NumPy fallback for the superposition kernel, used when the extension is absent."""
import numpy as np


def superposed_velocity(px, py, pz, tx, ty, hub, diam, x0, theta, sy0, sz0, m0, e0, alpha,
                        u_inf, i0, window=15.0, min_ti=0.1):
    px, py, pz = (np.asarray(a, dtype=float)[:, None] for a in (px, py, pz))
    d = px - tx[None, :]
    active = (d > 0.0) & (d <= window * diam) & (alpha > 0.0)
    out = np.full(px.shape[0], float(u_inf))
    if not active.any():
        return out
    xn = np.maximum(d / diam, min_ti)
    added = 0.9 * alpha ** 0.8 * i0 ** 0.1 * xn ** -0.32
    k = 0.38 * np.sqrt(i0 ** 2 + added ** 2) + 0.004
    far = d > x0
    grown = np.where(far, k * (d - x0), 0.0)
    sy = grown + sy0
    sz = grown + sz0
    s0 = sy0 * sz0
    with np.errstate(divide="ignore", invalid="ignore"):
        sm = np.sqrt(m0)
        r = np.sqrt(sy * sz / s0)
        log_term = np.log((1.6 + sm) * (1.6 * r - sm) / ((1.6 - sm) * (1.6 * r + sm)))
        far_delta = theta * e0 / 5.2 * np.sqrt(s0 / (k * k * m0)) * log_term + theta * x0
    far_delta = np.where((m0 > 0.0) & (theta != 0.0), far_delta, theta * x0)
    delta = np.where(far, far_delta, theta * d)
    c = 1.0 - np.sqrt(np.clip(1.0 - s0 * m0 / (sy * sz), 0.0, 1.0))
    dy = py - ty - delta
    dz = pz - hub
    deficit = u_inf * c * np.exp(-dy * dy / (2.0 * sy * sy)) * np.exp(-dz * dz / (2.0 * sz * sz))
    out -= np.where(active, deficit, 0.0).sum(axis=1)
    return np.clip(out, 0.0, u_inf)
