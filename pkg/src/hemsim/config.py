"""Scenario configuration: parsing, defaulting, strict validation.

Configs are JSON. Unknown keys are rejected with their full key path, types
are checked before coercion, and relative paths resolve against the config
file's own directory so scenarios stay relocatable.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .domain.params import BatteryParams, ComfortTargets, EnergyBins, ThermoParams
from .environment import STEPS_PER_DAY, NoiseConfig
from .errors import BuildError, ConfigError, DataValidationError

POLICY_CAP = 1_000_000
SELECTION_MODES = ("deterministic", "sampled")


@dataclass(frozen=True)
class TouRates:
    low: float = 0.15
    high: float = 0.45


@dataclass(frozen=True)
class BatteryPreferenceWeights:
    """Log-preference slopes per unit of cost, emissions, and battery wear.

    wear_weight is charged per kWh cycled through the battery in either
    direction; it keeps round trips that are otherwise value-neutral (charge
    cheap, discharge cheap) from looking attractive.
    """

    cost_weight: float = 2.0
    ghg_weight: float = 1.0
    wear_weight: float = 0.15


@dataclass(frozen=True)
class BinSettings:
    """Ranges and steps for the derived energy grids."""

    solar_max_kwh: float = 4.0
    solar_step_kwh: float = 0.5
    baseline_max_kwh: float = 3.0
    baseline_step_kwh: float = 0.5
    total_step_kwh: float = 0.5
    ghg_rates: tuple[float, ...] = (0.2, 0.4, 0.6, 0.8)


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything a simulation run needs, fully validated."""

    input_csv: Path = Path("data.csv")
    days: int = 2
    horizon: int = 6
    learn: bool = False
    learning_rate: float = 10.0
    seed: int = 0
    precision: float = 1.0
    action_selection: str = "deterministic"
    initial_room_temp_c: float = 18.0
    thermo: ThermoParams = field(default_factory=ThermoParams)
    battery: BatteryParams = field(default_factory=BatteryParams)
    comfort: ComfortTargets = field(default_factory=ComfortTargets)
    rates: TouRates = field(default_factory=TouRates)
    battery_prefs: BatteryPreferenceWeights = field(default_factory=BatteryPreferenceWeights)
    bin_settings: BinSettings = field(default_factory=BinSettings)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    bins: EnergyBins | None = None

    def __post_init__(self) -> None:
        if self.days < 1:
            raise ConfigError("days must be at least 1")
        if self.horizon < 1:
            raise ConfigError("horizon must be at least 1")
        if 3 ** self.horizon > POLICY_CAP:
            raise ConfigError(
                f"horizon {self.horizon} enumerates more than {POLICY_CAP} policies"
            )
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if not self.precision > 0:
            raise ConfigError("precision must be positive")
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be positive")
        if self.action_selection not in SELECTION_MODES:
            raise ConfigError(
                f"action_selection must be one of {', '.join(SELECTION_MODES)}"
            )
        grid = self.thermo.temp_grid()
        if not grid.values[0] <= self.initial_room_temp_c <= grid.values[-1]:
            raise ConfigError("initial_room_temp_c falls outside the temperature grid")
        if self.bins is None:
            object.__setattr__(self, "bins", build_bins(self))

    @property
    def steps(self) -> int:
        return self.days * STEPS_PER_DAY


def build_bins(cfg: ScenarioConfig) -> EnergyBins:
    s = cfg.bin_settings
    try:
        return EnergyBins.build(
            cfg.thermo, cfg.battery,
            solar_max_kwh=s.solar_max_kwh, solar_step_kwh=s.solar_step_kwh,
            baseline_max_kwh=s.baseline_max_kwh, baseline_step_kwh=s.baseline_step_kwh,
            total_step_kwh=s.total_step_kwh, ghg_rates=s.ghg_rates,
            tou_low_rate=cfg.rates.low, tou_high_rate=cfg.rates.high,
        )
    except BuildError as exc:
        raise ConfigError(str(exc)) from exc


_SCALAR_FIELDS = {
    "days": int,
    "horizon": int,
    "learn": bool,
    "learning_rate": float,
    "seed": int,
    "precision": float,
    "action_selection": str,
    "initial_room_temp_c": float,
}
_SECTION_TYPES = {
    "thermo": ThermoParams,
    "battery": BatteryParams,
    "comfort": ComfortTargets,
    "rates": TouRates,
    "battery_prefs": BatteryPreferenceWeights,
    "bins": BinSettings,
    "noise": NoiseConfig,
}
_SECTION_FIELD = {
    "thermo": "thermo",
    "battery": "battery",
    "comfort": "comfort",
    "rates": "rates",
    "battery_prefs": "battery_prefs",
    "bins": "bin_settings",
    "noise": "noise",
}


def _coerce(value, kind, path: str):
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected true or false")
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer")
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number")
        return float(value)
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string")
        return value
    raise ConfigError(f"{path}: unsupported value")


def _parse_section(name: str, raw, section_cls):
    if not isinstance(raw, dict):
        raise ConfigError(f"{name}: expected an object")
    fields = {f.name: f for f in dataclasses.fields(section_cls)}
    kwargs = {}
    for key, value in raw.items():
        if key not in fields:
            raise ConfigError(f"unknown key: {name}.{key}")
        target = fields[key].type
        path = f"{name}.{key}"
        if key == "ghg_rates":
            if not isinstance(value, list) or not value:
                raise ConfigError(f"{path}: expected a non-empty list of numbers")
            kwargs[key] = tuple(_coerce(v, float, path) for v in value)
        elif "int" in str(target):
            kwargs[key] = _coerce(value, int, path)
        elif "bool" in str(target):
            kwargs[key] = _coerce(value, bool, path)
        elif "str" in str(target):
            kwargs[key] = _coerce(value, str, path)
        else:
            kwargs[key] = _coerce(value, float, path)
    try:
        return section_cls(**kwargs)
    except (BuildError, DataValidationError) as exc:
        raise ConfigError(f"{name}: {exc}") from exc


def parse_config(text: str, base_dir: Path | str = ".") -> ScenarioConfig:
    """Parse a JSON scenario config and validate every field.

    base_dir anchors relative paths (normally the config file's directory).
    The referenced input file must exist.
    """
    base_dir = Path(base_dir)
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")

    kwargs: dict = {}
    for key, value in raw.items():
        if key == "input_csv":
            kwargs["input_csv"] = Path(_coerce(value, str, "input_csv"))
        elif key in _SCALAR_FIELDS:
            kwargs[key] = _coerce(value, _SCALAR_FIELDS[key], key)
        elif key in _SECTION_TYPES:
            kwargs[_SECTION_FIELD[key]] = _parse_section(key, value, _SECTION_TYPES[key])
        else:
            raise ConfigError(f"unknown key: {key}")
    if "input_csv" not in kwargs:
        raise ConfigError("input_csv is required")

    path = kwargs["input_csv"]
    if not path.is_absolute():
        path = base_dir / path
    if not path.is_file():
        raise ConfigError(f"input_csv: no such file: {path}")
    kwargs["input_csv"] = path.resolve()

    try:
        return ScenarioConfig(**kwargs)
    except (BuildError, DataValidationError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: Path | str) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    return parse_config(text, base_dir=path.parent)


def apply_overrides(
    cfg: ScenarioConfig,
    *,
    days: int | None = None,
    horizon: int | None = None,
    learn: bool | None = None,
    seed: int | None = None,
) -> ScenarioConfig:
    """Command-line flags win over the config file. Re-validates."""
    changes: dict = {}
    if days is not None:
        changes["days"] = days
    if horizon is not None:
        changes["horizon"] = horizon
    if learn is not None:
        changes["learn"] = learn
    if seed is not None:
        changes["seed"] = seed
    if not changes:
        return cfg
    return dataclasses.replace(cfg, **changes)
