"""Plot-ready file outputs: flow CSV, PPM heatmap, per-turbine power table."""
from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

FLOW_COLUMNS = ["x_m", "y_m", "u_ms"]
POWER_COLUMNS = ["turbine", "x_m", "y_m", "alpha", "gamma_deg", "beta_deg", "u_eff_ms", "power_w"]


def write_flow_csv(path, xs, ys, u) -> None:
    """Long format, one row per grid cell, x varying fastest."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(FLOW_COLUMNS)
        for j, y in enumerate(ys):
            for i, x in enumerate(xs):
                w.writerow([repr(float(x)), repr(float(y)), repr(float(u[j, i]))])


def read_flow_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    xs = np.unique(data[:, 0])
    ys = np.unique(data[:, 1])
    return xs, ys, data[:, 2].reshape(len(ys), len(xs))


def velocity_colors(u: np.ndarray, u_max: float) -> np.ndarray:
    """Affine blue (0 m/s) to red (``u_max``) ramp, uint8 RGB."""
    t = np.clip(np.asarray(u, dtype=float) / u_max, 0.0, 1.0) if u_max > 0 else np.zeros_like(u)
    rgb = np.stack([255.0 * t, np.zeros_like(t), 255.0 * (1.0 - t)], axis=-1)
    return np.rint(rgb).astype(np.uint8)


def write_ppm(path, u: np.ndarray, u_max: float) -> None:
    """Binary P6 image; the first image row is the largest y (north up)."""
    rgb = velocity_colors(np.asarray(u)[::-1], u_max)
    h, w = rgb.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(rgb.tobytes())


def read_ppm(path) -> np.ndarray:
    magic, size, _maxval, body = Path(path).read_bytes().split(b"\n", 3)
    if magic != b"P6":
        raise ValueError("not a binary PPM")
    w, h = (int(v) for v in size.split())
    return np.frombuffer(body[: w * h * 3], dtype=np.uint8).reshape(h, w, 3)


def write_power_csv(path, state, velocities, powers) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(POWER_COLUMNS)
        for i, (pos, sp) in enumerate(zip(state.layout.positions, state.setpoints)):
            w.writerow([i + 1, repr(float(pos[0])), repr(float(pos[1])), repr(sp.alpha),
                        repr(math.degrees(sp.gamma)), repr(math.degrees(sp.beta)),
                        repr(float(velocities[i])), repr(float(powers[i]))])
