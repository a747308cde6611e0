"""Versioned JSON run configuration with strict parsing.

Unknown or missing keys and ill-typed values raise
``ConfigError`` with the dotted path of the offending field; JSON syntax
errors report line and column.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .errors import ConfigError
from .fidelity import Macrofraction
from .geometry import Complement, FullSphere, PatchAround, PolarCap, Union
from .model import PhysicalScenario

SCHEMA_VERSION = 1


def _require_mapping(value, path):
    if not isinstance(value, dict):
        raise ConfigError(f"{path}: expected an object, got {type(value).__name__}")
    return value


def _number(value, path, *, positive=False, nonnegative=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    if not math.isfinite(value) and not (positive and value == math.inf):
        raise ConfigError(f"{path}: must be finite, got {value!r}")
    if positive and not value > 0:
        raise ConfigError(f"{path}: must be positive, got {value!r}")
    if nonnegative and not value >= 0:
        raise ConfigError(f"{path}: must be nonnegative, got {value!r}")
    return int(value) if integer else float(value)


def _vector(value, path):
    if not isinstance(value, list) or len(value) != 3:
        raise ConfigError(f"{path}: expected a list of three numbers")
    return tuple(_number(v, f"{path}[{i}]") for i, v in enumerate(value))


def _section(cls, data, path):
    """Build a flat dataclass section from a dict, rejecting unknown keys."""
    data = _require_mapping(data, path)
    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ConfigError(f"{path}.{unknown[0]}: unknown key")
    kwargs = {}
    for name, f in known.items():
        if name in data:
            kwargs[name] = data[name]
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# regions


def parse_region(data, path="unobserved"):
    data = _require_mapping(data, path)
    kind = data.get("type")
    allowed = {
        "FullSphere": set(),
        "PolarCap": {"theta_min", "theta_max", "phi_min", "phi_max"},
        "PatchAround": {"center", "solid_angle"},
        "Complement": {"region"},
        "Union": {"regions"},
    }
    if kind not in allowed:
        raise ConfigError(f"{path}.type: expected one of {sorted(allowed)}, got {kind!r}")
    extra = sorted(set(data) - allowed[kind] - {"type"})
    if extra:
        raise ConfigError(f"{path}.{extra[0]}: unknown key for {kind}")
    try:
        if kind == "FullSphere":
            return FullSphere()
        if kind == "PolarCap":
            kw = {k: _number(data[k], f"{path}.{k}") for k in allowed[kind] if k in data}
            return PolarCap(**kw)
        if kind == "PatchAround":
            return PatchAround(_vector(data["center"], f"{path}.center"), _number(data["solid_angle"], f"{path}.solid_angle", positive=True))
        if kind == "Complement":
            return Complement(parse_region(data["region"], f"{path}.region"))
        items = data["regions"]
        if not isinstance(items, list):
            raise ConfigError(f"{path}.regions: expected a list")
        return Union(tuple(parse_region(r, f"{path}.regions[{i}]") for i, r in enumerate(items)))
    except KeyError as exc:
        raise ConfigError(f"{path}.{exc.args[0]}: missing") from None
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def region_to_dict(region) -> dict:
    if isinstance(region, FullSphere):
        return {"type": "FullSphere"}
    if isinstance(region, PolarCap):
        return {"type": "PolarCap", **asdict(region)}
    if isinstance(region, PatchAround):
        return {"type": "PatchAround", "center": list(region.center), "solid_angle": region.solid_angle}
    if isinstance(region, Complement):
        return {"type": "Complement", "region": region_to_dict(region.region)}
    if isinstance(region, Union):
        return {"type": "Union", "regions": [region_to_dict(r) for r in region.regions]}
    raise TypeError(f"cannot serialize region {region!r}")


# ---------------------------------------------------------------------------
# sections


@dataclass(frozen=True)
class ScenarioSpec:
    coupling_alpha: float
    cutoff_over_thermal: float
    velocity_beta: float = 0.0
    momentum_spread: float = 0.05

    def build(self) -> PhysicalScenario:
        return PhysicalScenario(self.coupling_alpha, self.cutoff_over_thermal, self.velocity_beta, self.momentum_spread)


@dataclass(frozen=True)
class MacrofractionSpec:
    center: tuple = (0.0, 1.0, 0.0)
    solid_angle_fraction: float = 0.05
    polarization_index: int = 2

    def build(self) -> Macrofraction:
        return Macrofraction(self.center, 4 * math.pi * self.solid_angle_fraction, self.polarization_index)


@dataclass(frozen=True)
class MomentaSpec:
    p: tuple = (0.05, 0.0, 0.0)
    p_prime: tuple = (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class TimeGrid:
    s_min: float = 1e-2
    s_max: float = 1e3
    points: int = 200

    def values(self) -> np.ndarray:
        return np.geomspace(self.s_min, self.s_max, self.points)


@dataclass(frozen=True)
class GridSpec:
    mean_p: tuple = (0.0, 0.0, 0.0)
    cells_per_axis: int = 15


@dataclass(frozen=True)
class TilingSpec:
    patches: int = 32


@dataclass(frozen=True)
class Thresholds:
    decoherence: float = 0.1
    fidelity: float = 0.1


@dataclass(frozen=True)
class OracleSpec:
    truncation: int = 60


@dataclass(frozen=True)
class RunConfig:
    scenario: ScenarioSpec
    unobserved: object = field(default_factory=lambda: PolarCap(0.0, math.pi / 4))
    macrofraction: MacrofractionSpec = MacrofractionSpec()
    momenta: MomentaSpec = MomentaSpec()
    time_grid: TimeGrid = TimeGrid()
    grid: GridSpec = GridSpec()
    tiling: TilingSpec = TilingSpec()
    thresholds: Thresholds = Thresholds()
    oracle: OracleSpec = OracleSpec()
    name: str = "custom"

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "scenario": asdict(self.scenario),
            "unobserved": region_to_dict(self.unobserved),
            "macrofraction": {**asdict(self.macrofraction), "center": list(self.macrofraction.center)},
            "momenta": {"p": list(self.momenta.p), "p_prime": list(self.momenta.p_prime)},
            "time_grid": asdict(self.time_grid),
            "grid": {**asdict(self.grid), "mean_p": list(self.grid.mean_p)},
            "tiling": asdict(self.tiling),
            "thresholds": asdict(self.thresholds),
            "oracle": asdict(self.oracle),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


_TOP_KEYS = {
    "schema_version",
    "name",
    "scenario",
    "unobserved",
    "macrofraction",
    "momenta",
    "time_grid",
    "grid",
    "tiling",
    "thresholds",
    "oracle",
}


def _parse_scenario(data) -> ScenarioSpec:
    path = "scenario"
    for name in ("coupling_alpha", "cutoff_over_thermal"):
        if name not in _require_mapping(data, path):
            raise ConfigError(f"{path}.{name}: missing")
    parsed = _section(ScenarioSpec, data, path)
    return ScenarioSpec(
        _number(parsed.coupling_alpha, f"{path}.coupling_alpha", nonnegative=True),
        _number(parsed.cutoff_over_thermal, f"{path}.cutoff_over_thermal", positive=True),
        _number(parsed.velocity_beta, f"{path}.velocity_beta", nonnegative=True),
        _number(parsed.momentum_spread, f"{path}.momentum_spread", positive=True),
    )


def config_from_dict(data: dict) -> RunConfig:
    data = _require_mapping(data, "<root>")
    unknown = sorted(set(data) - _TOP_KEYS)
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown key")
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"schema_version: expected {SCHEMA_VERSION}, got {data.get('schema_version')!r}")
    if "scenario" not in data:
        raise ConfigError("scenario: missing")
    scenario = _parse_scenario(data["scenario"])

    unobserved = parse_region(data["unobserved"]) if "unobserved" in data else PolarCap(0.0, math.pi / 4)

    mac = _section(MacrofractionSpec, data.get("macrofraction", {}), "macrofraction")
    mac = MacrofractionSpec(
        _vector(list(mac.center), "macrofraction.center"),
        _number(mac.solid_angle_fraction, "macrofraction.solid_angle_fraction", positive=True),
        _number(mac.polarization_index, "macrofraction.polarization_index", integer=True),
    )
    if mac.polarization_index not in (1, 2):
        raise ConfigError("macrofraction.polarization_index: must be 1 or 2")
    if not mac.solid_angle_fraction < 1:
        raise ConfigError("macrofraction.solid_angle_fraction: must be below 1")

    mom = _section(MomentaSpec, data.get("momenta", {}), "momenta")
    mom = MomentaSpec(_vector(list(mom.p), "momenta.p"), _vector(list(mom.p_prime), "momenta.p_prime"))

    tg = _section(TimeGrid, data.get("time_grid", {}), "time_grid")
    tg = TimeGrid(
        _number(tg.s_min, "time_grid.s_min", positive=True),
        _number(tg.s_max, "time_grid.s_max", positive=True),
        _number(tg.points, "time_grid.points", integer=True),
    )
    if tg.points < 2 or not tg.s_max > tg.s_min:
        raise ConfigError("time_grid: need s_max > s_min and at least 2 points")

    grid = _section(GridSpec, data.get("grid", {}), "grid")
    grid = GridSpec(_vector(list(grid.mean_p), "grid.mean_p"), _number(grid.cells_per_axis, "grid.cells_per_axis", integer=True))
    if grid.cells_per_axis < 2:
        raise ConfigError("grid.cells_per_axis: must be >= 2")

    til = _section(TilingSpec, data.get("tiling", {}), "tiling")
    til = TilingSpec(_number(til.patches, "tiling.patches", integer=True))
    if til.patches < 1:
        raise ConfigError("tiling.patches: must be >= 1")

    thr = _section(Thresholds, data.get("thresholds", {}), "thresholds")
    thr = Thresholds(
        _number(thr.decoherence, "thresholds.decoherence", positive=True),
        _number(thr.fidelity, "thresholds.fidelity", positive=True),
    )

    orc = _section(OracleSpec, data.get("oracle", {}), "oracle")
    orc = OracleSpec(_number(orc.truncation, "oracle.truncation", integer=True))
    if orc.truncation < 1:
        raise ConfigError("oracle.truncation: must be >= 1")

    name = data.get("name", "custom")
    if not isinstance(name, str):
        raise ConfigError("name: expected a string")

    cfg = RunConfig(scenario, unobserved, mac, mom, tg, grid, til, thr, orc, name)
    try:
        cfg.scenario.build()
    except ValueError as exc:
        raise ConfigError(f"scenario: {exc}") from None
    return cfg


def config_from_json(text: str) -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return config_from_dict(data)


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return config_from_json(fh.read())


def _fig2(theta: float, name: str) -> RunConfig:
    return RunConfig(
        scenario=ScenarioSpec(coupling_alpha=1e5, cutoff_over_thermal=theta, velocity_beta=0.02, momentum_spread=0.05),
        unobserved=PolarCap(0.0, math.pi / 4),
        macrofraction=MacrofractionSpec((0.0, 1.0, 0.0), 0.05, 2),
        momenta=MomentaSpec((0.05, 0.0, 0.0), (0.0, 0.0, 0.0)),
        name=name,
    )


PRESETS = {
    "fig2-a": _fig2(400.0, "fig2-a"),
    "fig2-b": _fig2(25.0, "fig2-b"),
}


def preset(name: str) -> RunConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


__all__ = [
    "SCHEMA_VERSION",
    "RunConfig",
    "ScenarioSpec",
    "MacrofractionSpec",
    "MomentaSpec",
    "TimeGrid",
    "GridSpec",
    "TilingSpec",
    "Thresholds",
    "OracleSpec",
    "PRESETS",
    "preset",
    "parse_region",
    "region_to_dict",
    "config_from_dict",
    "config_from_json",
    "load_config",
]
