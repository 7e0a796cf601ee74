"""JSON farm/run configuration: schemas, validation and loading."""
from __future__ import annotations

import json
import math
from dataclasses import fields
from importlib import resources
from pathlib import Path

import jsonschema

from .baselines import GridSearchConfig
from .env import EnvConfig
from .farm import FarmLayout
from .marl import TrainConfig
from .power import PowerModel
from .wake import Ambient, TurbineSpec

SCHEMA_VERSION = 1
BUNDLED_FARMS = ("farm1", "farm2", "farm13", "farm16", "farm19", "farm22")


class ConfigError(ValueError):
    """Malformed, missing or schema-violating configuration."""


_TURBINE = {
    "type": "object",
    "properties": {
        "rotor_diameter": {"type": "number", "exclusiveMinimum": 0},
        "hub_height": {"type": "number", "minimum": 0},
        "rated_power": {"type": "number", "exclusiveMinimum": 0},
    },
    "additionalProperties": False,
}

FARM_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "turbines"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "description": {"type": "string"},
        "group_size": {"type": "integer", "minimum": 1},
        "turbine": _TURBINE,
        "ambient": {
            "type": "object",
            "properties": {
                "u_inf": {"type": "number", "minimum": 0},
                "wind_direction_deg": {"type": "number"},
                "I0": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            },
            "additionalProperties": False,
        },
        "turbines": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["x", "y"],
                "properties": {"x": {"type": "number"}, "y": {"type": "number"},
                               "turbine": _TURBINE},
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}


def _section(cls) -> dict:
    props = {}
    for f in fields(cls):
        t = f.type if isinstance(f.type, str) else getattr(f.type, "__name__", str(f.type))
        if "tuple" in t:
            props[f.name] = {"type": "array", "items": {"type": "number"}}
        elif t == "bool":
            props[f.name] = {"type": "boolean"}
        elif t == "int":
            props[f.name] = {"type": "integer"}
        elif t == "str":
            props[f.name] = {"type": "string"}
        else:
            props[f.name] = {"type": "number"}
    return {"type": "object", "properties": props, "additionalProperties": False}


RUN_SCHEMA = {
    "type": "object",
    "required": ["schema_version"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "farm": {"type": "string"},
        "power_model": {"enum": ["cosine", "fitted"]},
        "air_density": {"type": "number", "exclusiveMinimum": 0},
        "seed": {"type": "integer"},
        "output_dir": {"type": "string"},
        "env": _section(EnvConfig),
        "train": _section(TrainConfig),
        "grid_search": _section(GridSearchConfig),
        "simulate": {
            "type": "object",
            "properties": {"nx": {"type": "integer", "minimum": 1},
                           "ny": {"type": "integer", "minimum": 1},
                           "margin_diameters": {"type": "number", "minimum": 0}},
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}


def _read_json(path: Path) -> dict:
    try:
        return json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None


def _validate(doc: dict, schema: dict, where: str) -> None:
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        loc = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {loc}: {exc.message}") from None


def bundled_farm_path(name: str) -> Path:
    stem = Path(name).stem
    return Path(str(resources.files("wfmarl") / "data" / f"{stem}.json"))


def resolve_farm_path(ref: str | Path, base: Path | None = None) -> Path:
    """A farm reference is a file path, or the name of a bundled layout (``farm13``)."""
    path = Path(ref)
    candidates = [path] if path.is_absolute() else [path] + ([base / path] if base else [])
    for c in candidates:
        if c.exists():
            return c
    if Path(ref).stem in BUNDLED_FARMS and path.parent == Path("."):
        return bundled_farm_path(str(ref))
    raise ConfigError(f"farm file not found: {ref}")


def farm_from_dict(doc: dict, where: str = "farm") -> tuple[FarmLayout, int]:
    _validate(doc, FARM_SCHEMA, where)
    base = TurbineSpec(**doc.get("turbine", {}))
    amb = doc.get("ambient", {})
    try:
        ambient = Ambient(u_inf=amb.get("u_inf", 8.0),
                          wind_direction=math.radians(amb.get("wind_direction_deg", 270.0)),
                          I0=amb.get("I0", 0.05))
        specs = [TurbineSpec(**{**vars(base), **t.get("turbine", {})}) for t in doc["turbines"]]
        layout = FarmLayout(specs, [[t["x"], t["y"]] for t in doc["turbines"]], ambient)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    return layout, int(doc.get("group_size", 4))


def load_farm(ref: str | Path, base: Path | None = None) -> tuple[FarmLayout, int]:
    """Layout and WTA group size from a farm file."""
    path = resolve_farm_path(ref, base)
    return farm_from_dict(_read_json(path), str(path))


def farm_to_dict(layout: FarmLayout, group_size: int = 4, name: str = "") -> dict:
    spec = layout.specs[0]
    return {
        "schema_version": SCHEMA_VERSION,
        "name": name,
        "group_size": group_size,
        "turbine": {"rotor_diameter": spec.rotor_diameter, "hub_height": spec.hub_height,
                    "rated_power": spec.rated_power},
        "ambient": {"u_inf": layout.ambient.u_inf,
                    "wind_direction_deg": math.degrees(layout.ambient.wind_direction),
                    "I0": layout.ambient.I0},
        "turbines": [{"x": float(x), "y": float(y)} for x, y in layout.positions],
    }


def load_run_config(path: str | Path) -> dict:
    path = Path(path)
    doc = _read_json(path)
    _validate(doc, RUN_SCHEMA, str(path))
    doc["_base_dir"] = str(path.parent)
    return doc


def _build(cls, section: dict | None, **overrides):
    kw = dict(section or {})
    for f in fields(cls):
        if f.name in kw and isinstance(kw[f.name], list):
            kw[f.name] = tuple(kw[f.name])
    kw.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return cls(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{cls.__name__}: {exc}") from None


def env_config(run: dict, group_size: int) -> EnvConfig:
    return _build(EnvConfig, run.get("env"), group_size=group_size)


def train_config(run: dict, **overrides) -> TrainConfig:
    return _build(TrainConfig, run.get("train"), **overrides)


def grid_config(run: dict) -> GridSearchConfig:
    return _build(GridSearchConfig, run.get("grid_search"))


def power_model(run: dict, name: str | None = None) -> PowerModel:
    return PowerModel.named(name or run.get("power_model", "cosine"), run.get("air_density", 1.225))
