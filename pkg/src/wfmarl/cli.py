"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 configuration error, 3 runtime error.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import config as cfg
from .baselines import coordinated_grid_search, greedy_baseline, pid_baseline
from .env import WindFarmEnv
from .farm import FarmState, effective_velocities, farm_power_direct, rasterize_flow
from .marl import Policy, evaluate, train
from .metrics import del_report
from .outputs import write_flow_csv, write_power_csv, write_ppm

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3
DEFAULT_DEL_FARMS = ("farm13", "farm16", "farm19", "farm22")

log = logging.getLogger("wfmarl")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common(p: argparse.ArgumentParser, farm_nargs=None) -> None:
    p.add_argument("--config", help="run configuration JSON")
    if farm_nargs:
        p.add_argument("--farm", nargs=farm_nargs, help="farm file(s) or bundled names")
    else:
        p.add_argument("--farm", help="farm file or bundled name (e.g. farm13)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--model", choices=["cosine", "fitted"], help="yaw/tilt coefficient model")


def _controller(p: argparse.ArgumentParser, default="greedy") -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--baseline", choices=["greedy", "pid", "grid"], default=None)
    g.add_argument("--checkpoint", help="trained policy checkpoint")
    p.set_defaults(default_baseline=default)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wfmarl", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("simulate", help="flow raster and per-turbine power")
    _common(p)
    _controller(p)
    p.add_argument("--nx", type=int)
    p.add_argument("--ny", type=int)
    p.add_argument("--margin", type=float, help="raster margin around the farm, rotor diameters")

    p = sub.add_parser("train", help="train the multi-agent policy")
    _common(p)
    p.add_argument("--episodes", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--checkpoint-every", type=int, help="checkpoint cadence in batches")

    p = sub.add_parser("evaluate", help="power/DEL report for a policy or baseline")
    _common(p)
    _controller(p)

    p = sub.add_parser("optimize", help="coordinated grid-search baseline")
    _common(p)

    p = sub.add_parser("del-report", help="damage-equivalent-load report across farms")
    _common(p, farm_nargs="+")
    _controller(p)
    return parser


def _run_config(args) -> dict:
    run = cfg.load_run_config(args.config) if args.config else {"schema_version": cfg.SCHEMA_VERSION}
    return run


def _farm_ref(args, run) -> str:
    ref = args.farm or run.get("farm")
    if ref is None:
        raise UsageError("a farm is required (--farm or 'farm' in --config)")
    return ref


def _out_dir(args, run) -> Path:
    out = Path(args.out or run.get("output_dir", "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _seed(args, run) -> int:
    return args.seed if args.seed is not None else int(run.get("seed", 0))


def _controlled_state(args, run, layout, group_size, model) -> tuple[FarmState, str]:
    if getattr(args, "checkpoint", None):
        path = Path(args.checkpoint)
        if not path.exists():
            raise cfg.ConfigError(f"checkpoint not found: {path}")
        try:
            policy, _ = Policy.load(path)
        except (KeyError, ValueError, json.JSONDecodeError) as exc:
            raise cfg.ConfigError(f"{path}: unreadable checkpoint ({exc})") from None
        env = WindFarmEnv(layout, cfg.env_config(run, group_size), model)
        if (env.obs_dim, env.action_dim) != (policy.obs_dim, policy.action_dim):
            raise cfg.ConfigError(f"{path}: policy dims {(policy.obs_dim, policy.action_dim)} do not "
                                  f"match farm dims {(env.obs_dim, env.action_dim)}")
        return evaluate(policy, env, seed=_seed(args, run))["state"], f"policy:{path}"
    name = getattr(args, "baseline", None) or getattr(args, "default_baseline", "greedy")
    if name == "greedy":
        return greedy_baseline(layout), name
    if name == "pid":
        return pid_baseline(layout, initial_yaw=math.radians(10.0)), name
    return coordinated_grid_search(layout, cfg.grid_config(run), model).state, name


def _turbine_table(state, model):
    u = effective_velocities(state)
    total, powers = farm_power_direct(state, model, u)
    return u, total, powers


def _report(farm_ref, controller, state, model) -> dict:
    u, total, powers = _turbine_table(state, model)
    dels = del_report(state, model, total)
    greedy, _ = farm_power_direct(greedy_baseline(state.layout), model)
    rows = []
    for i, sp in enumerate(state.setpoints):
        rows.append({"turbine": i + 1, "alpha": sp.alpha, "gamma_deg": math.degrees(sp.gamma),
                     "beta_deg": math.degrees(sp.beta), "u_eff_ms": float(u[i]),
                     "power_w": float(powers[i]), "del_y": float(dels.del_y[i]),
                     "del_x": float(dels.del_x[i])})
    return {"farm": str(farm_ref), "controller": controller, "n_turbines": state.layout.n_turbines,
            "P_WF_w": total, "greedy_P_WF_w": greedy,
            "gain_vs_greedy": total / greedy if greedy > 0 else None,
            "avg_del_per_power": dels.avg_del_per_power, "del_total": dels.total, "turbines": rows}


def cmd_simulate(args, run) -> int:
    ref = _farm_ref(args, run)
    layout, gs = cfg.load_farm(ref, Path(run.get("_base_dir", ".")))
    model = cfg.power_model(run, args.model)
    state, _ = _controlled_state(args, run, layout, gs, model)
    sim = run.get("simulate", {})
    nx = args.nx or sim.get("nx", 200)
    ny = args.ny or sim.get("ny", 60)
    margin = (args.margin if args.margin is not None else sim.get("margin_diameters", 3.0))
    d = max(s.rotor_diameter for s in layout.specs)
    lo = layout.positions.min(axis=0) - margin * d
    hi = layout.positions.max(axis=0) + margin * d
    xs, ys, u = rasterize_flow(state, (lo[0], hi[0]), (lo[1], hi[1]), (nx, ny))
    out = _out_dir(args, run)
    write_flow_csv(out / "flow.csv", xs, ys, u)
    write_ppm(out / "flow.ppm", u, layout.ambient.u_inf)
    vel, total, powers = _turbine_table(state, model)
    write_power_csv(out / "power.csv", state, vel, powers)
    print(json.dumps({"P_WF_w": total, "outputs": [str(out / f) for f in
                                                   ("flow.csv", "flow.ppm", "power.csv")]}))
    return EXIT_OK


def cmd_train(args, run) -> int:
    ref = _farm_ref(args, run)
    layout, gs = cfg.load_farm(ref, Path(run.get("_base_dir", ".")))
    model = cfg.power_model(run, args.model)
    tcfg = cfg.train_config(run, episodes=args.episodes, seed=_seed(args, run),
                            checkpoint_every=args.checkpoint_every)
    env = WindFarmEnv(layout, cfg.env_config(run, gs), model)
    out = _out_dir(args, run)
    ckpt = out / "checkpoints"
    ckpt.mkdir(exist_ok=True)
    result = train(tcfg, env, checkpoint_dir=ckpt, workers=args.workers)
    result.write_curve(out / "training_curve.csv")
    result.policy.save(out / "policy.json", {"episodes": tcfg.episodes, "seed": tcfg.seed,
                                             "farm": str(ref)})
    ev = evaluate(result.policy, env, seed=tcfg.seed)
    env.write_trajectory(out / "trajectory.csv")
    greedy, _ = farm_power_direct(greedy_baseline(layout), model)
    summary = {"episodes": tcfg.episodes, "final_power_w": ev["power_w"], "greedy_power_w": greedy,
               "curve": str(out / "training_curve.csv"), "checkpoint": str(out / "policy.json")}
    if result.curve:
        tail = result.curve[-100:]
        summary["final100_mean_power_w"] = float(np.mean([r["mean_power_w"] for r in tail]))
    print(json.dumps(summary))
    return EXIT_OK


def cmd_evaluate(args, run) -> int:
    ref = _farm_ref(args, run)
    layout, gs = cfg.load_farm(ref, Path(run.get("_base_dir", ".")))
    model = cfg.power_model(run, args.model)
    state, name = _controlled_state(args, run, layout, gs, model)
    report = _report(ref, name, state, model)
    out = _out_dir(args, run)
    (out / "report.json").write_text(json.dumps(report, indent=2))
    print(json.dumps(report))
    return EXIT_OK


def cmd_optimize(args, run) -> int:
    ref = _farm_ref(args, run)
    layout, _ = cfg.load_farm(ref, Path(run.get("_base_dir", ".")))
    model = cfg.power_model(run, args.model)
    res = coordinated_grid_search(layout, cfg.grid_config(run), model)
    report = _report(ref, "grid", res.state, model)
    report["pass_powers_w"] = res.pass_powers
    report["evaluations"] = res.evaluations
    out = _out_dir(args, run)
    (out / "optimize.json").write_text(json.dumps(report, indent=2))
    vel, _, powers = _turbine_table(res.state, model)
    write_power_csv(out / "power.csv", res.state, vel, powers)
    print(json.dumps(report))
    return EXIT_OK


def cmd_del_report(args, run) -> int:
    refs = args.farm or ([run["farm"]] if "farm" in run else list(DEFAULT_DEL_FARMS))
    model = cfg.power_model(run, args.model)
    farms = []
    for ref in refs:
        layout, gs = cfg.load_farm(ref, Path(run.get("_base_dir", ".")))
        state, name = _controlled_state(args, run, layout, gs, model)
        rep = _report(ref, name, state, model)
        farms.append({k: rep[k] for k in ("farm", "controller", "n_turbines", "P_WF_w",
                                           "avg_del_per_power", "del_total")})
    doc = {"farms": farms}
    out = _out_dir(args, run)
    (out / "del_report.json").write_text(json.dumps(doc, indent=2))
    print(json.dumps(doc))
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "train": cmd_train, "evaluate": cmd_evaluate,
            "optimize": cmd_optimize, "del-report": cmd_del_report}


def run_cli(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        run = _run_config(args)
        return COMMANDS[args.command](args, run)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except cfg.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - mapped to the runtime exit code
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
