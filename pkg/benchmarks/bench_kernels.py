"""Compare the compiled superposition kernel against the NumPy fallback.

    python benchmarks/bench_kernels.py [--repeat 20]
"""
import argparse
import math
import timeit

import numpy as np

from wfmarl import kernels
from wfmarl.farm import FarmLayout, FarmState, effective_velocities, rasterize_flow
from wfmarl.wake import Setpoint


def _state(n: int, seed: int = 0) -> FarmState:
    rng = np.random.default_rng(seed)
    layout = FarmLayout.row(n)
    sps = [Setpoint(rng.uniform(0.1, 1 / 3), math.radians(rng.uniform(-30, 30)),
                    math.radians(rng.uniform(-10, 10))) for _ in range(n)]
    return FarmState(layout, sps)


def _cases():
    for n in (13, 22):
        st = _state(n)
        yield f"hub velocities, {n} turbines", lambda k, st=st: effective_velocities(st, k)
    st = _state(13)
    x_hi = float(st.layout.positions[:, 0].max()) + 1000.0
    yield "raster 200x60, 13 turbines", lambda k: rasterize_flow(
        st, (-500.0, x_hi), (-400.0, 400.0), (200, 60), kernel=k)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    backends = {"python": kernels.python_superposed_velocity}
    if kernels.compiled_superposed_velocity is not None:
        backends["compiled"] = kernels.compiled_superposed_velocity
    else:
        print("compiled extension not built; timing the fallback only")
    print(f"{'case':32s} " + " ".join(f"{b:>14s}" for b in backends) + "   speedup")
    for name, fn in _cases():
        ref = None
        times = {}
        for b, k in backends.items():
            out = fn(k)
            out = out[2] if isinstance(out, tuple) else out
            if ref is None:
                ref = out
            elif not np.allclose(out, ref, rtol=1e-12, atol=1e-12):
                raise SystemExit(f"{name}: backends disagree")
            times[b] = min(timeit.repeat(lambda: fn(k), number=1, repeat=args.repeat))
        speed = times["python"] / times["compiled"] if "compiled" in times else float("nan")
        print(f"{name:32s} " + " ".join(f"{t * 1e3:11.3f} ms" for t in times.values())
              + f"   {speed:6.2f}x")


if __name__ == "__main__":
    main()
