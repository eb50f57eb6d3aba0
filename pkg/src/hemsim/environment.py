"""The generative process: exogenous data playback and ground-truth dynamics.

The environment applies the same binned dynamics the agents model (built from
the shared formulas in hemsim.domain.tables), holds the true room temperature
and state of charge, and emits each agent's observation indices, optionally
flipped to an adjacent bin by sensor noise.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

from .domain.params import BatteryParams, EnergyBins, ThermoParams
from .domain.tables import (
    battery_step_kwh,
    cost_and_ghg,
    energy_accounting,
    hvac_step_kwh,
    next_temperature,
    soc_next_value,
    thermo_transition,
)
from .errors import DataValidationError

STEPS_PER_DAY = 12
HOURS_PER_STEP = 2

EXPECTED_HEADER = (
    "time_of_day",
    "outdoor_temp_c",
    "solar_kwh",
    "baseline_kwh",
    "tou_rate",
    "tou_high",
    "occupancy",
    "ghg_rate",
)


@dataclass(frozen=True)
class TimeStepRow:
    """One two-hour interval of exogenous conditions."""

    time_of_day: int
    outdoor_temp_c: float
    solar_kwh: float
    baseline_kwh: float
    tou_rate: float
    tou_high: bool
    occupancy: bool
    ghg_rate: float


def _parse_float(raw: str, row: int, column: str, minimum: float | None = None) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise DataValidationError(
            f"row {row}, column {column!r}: {raw!r} is not a number"
        ) from None
    if not np.isfinite(value):
        raise DataValidationError(f"row {row}, column {column!r}: value must be finite")
    if minimum is not None and value < minimum:
        raise DataValidationError(
            f"row {row}, column {column!r}: value must be >= {minimum}"
        )
    return value


def _parse_flag(raw: str, row: int, column: str) -> bool:
    if raw not in ("0", "1"):
        raise DataValidationError(
            f"row {row}, column {column!r}: expected 0 or 1, got {raw!r}"
        )
    return raw == "1"


def load_timeseries(source: Iterable[str]) -> list[TimeStepRow]:
    """Parse and validate the exogenous time series from a character stream.

    The file must carry the exact expected header, whole days of twelve
    two-hour rows with time_of_day running 0, 2, ..., 22, and non-negative
    energy and rate columns. Errors name the offending row and column.
    """
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise DataValidationError("input is empty; expected a header row") from None
    if tuple(h.strip() for h in header) != EXPECTED_HEADER:
        raise DataValidationError(
            "bad header: expected " + ",".join(EXPECTED_HEADER)
        )
    rows: list[TimeStepRow] = []
    for i, record in enumerate(reader, start=1):
        if not record or all(not field.strip() for field in record):
            continue
        if len(record) != len(EXPECTED_HEADER):
            raise DataValidationError(
                f"row {i}: expected {len(EXPECTED_HEADER)} fields, got {len(record)}"
            )
        fields = dict(zip(EXPECTED_HEADER, (f.strip() for f in record)))
        try:
            hour = int(fields["time_of_day"])
        except ValueError:
            raise DataValidationError(
                f"row {i}, column 'time_of_day': {fields['time_of_day']!r} is not an integer"
            ) from None
        expected_hour = ((i - 1) % STEPS_PER_DAY) * HOURS_PER_STEP
        if hour != expected_hour:
            raise DataValidationError(
                f"row {i}, column 'time_of_day': expected {expected_hour}, got {hour}"
            )
        rows.append(TimeStepRow(
            time_of_day=hour,
            outdoor_temp_c=_parse_float(fields["outdoor_temp_c"], i, "outdoor_temp_c"),
            solar_kwh=_parse_float(fields["solar_kwh"], i, "solar_kwh", minimum=0.0),
            baseline_kwh=_parse_float(fields["baseline_kwh"], i, "baseline_kwh", minimum=0.0),
            tou_rate=_parse_float(fields["tou_rate"], i, "tou_rate", minimum=0.0),
            tou_high=_parse_flag(fields["tou_high"], i, "tou_high"),
            occupancy=_parse_flag(fields["occupancy"], i, "occupancy"),
            ghg_rate=_parse_float(fields["ghg_rate"], i, "ghg_rate", minimum=0.0),
        ))
    if not rows:
        raise DataValidationError("no data rows")
    if len(rows) % STEPS_PER_DAY != 0:
        raise DataValidationError(
            f"expected whole days of {STEPS_PER_DAY} rows, got {len(rows)} rows"
        )
    return rows


@dataclass(frozen=True)
class NoiseConfig:
    """Observation-noise settings: probability of reading an adjacent bin."""

    room_temp_obs_flip_p: float = 0.0
    soc_obs_flip_p: float = 0.0

    def __post_init__(self) -> None:
        for name in ("room_temp_obs_flip_p", "soc_obs_flip_p"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise DataValidationError(f"{name} must lie in [0, 1]")

    @property
    def any(self) -> bool:
        return self.room_temp_obs_flip_p > 0 or self.soc_obs_flip_p > 0


@dataclass(frozen=True)
class GroundTruth:
    """The environment's actual state, on the same grids the agents use."""

    room_temp_c: float
    soc: float
    cumulative_cost: float = 0.0
    cumulative_emissions_kg: float = 0.0


@dataclass(frozen=True)
class StepOutcome:
    """Realized energies and charges for one simulated step."""

    baseline_kwh: float
    hvac_kwh: float
    battery_kwh: float
    solar_kwh: float
    total_kwh: float
    cost: float
    emissions_kg: float


@dataclass(frozen=True)
class Environment:
    """Ground-truth dynamics built from the same parameters as the agents."""

    thermo: ThermoParams
    battery: BatteryParams
    bins: EnergyBins

    @cached_property
    def thermo_sampling_table(self):
        """Only needed when process noise makes the dynamics stochastic."""
        return thermo_transition(self.thermo)


def make_initial_truth(env: Environment, initial_room_temp_c: float) -> GroundTruth:
    grid = env.thermo.temp_grid()
    return GroundTruth(
        room_temp_c=grid.snap(initial_room_temp_c),
        soc=env.battery.soc_grid().snap(env.battery.initial_soc),
    )


def _flip_adjacent(index: int, cardinality: int, flip_p: float, rng: np.random.Generator) -> int:
    """Move the reading one bin up or down with probability flip_p; moves
    that would leave the grid are dropped (matching the likelihood blur)."""
    if flip_p <= 0 or rng.random() >= flip_p:
        return index
    candidate = index + (1 if rng.random() < 0.5 else -1)
    if 0 <= candidate < cardinality:
        return candidate
    return index


def observe(
    env: Environment,
    truth: GroundTruth,
    noise: NoiseConfig | None = None,
    rng: np.random.Generator | int | None = None,
) -> dict[str, dict[str, int]]:
    """Each agent's observation indices for the current ground truth."""
    noise = noise or NoiseConfig()
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    temp_grid = env.thermo.temp_grid()
    soc_grid = env.battery.soc_grid()
    temp_bin = _flip_adjacent(
        temp_grid.index_of(truth.room_temp_c), temp_grid.cardinality,
        noise.room_temp_obs_flip_p, rng,
    )
    soc_bin = _flip_adjacent(
        soc_grid.index_of(truth.soc), soc_grid.cardinality,
        noise.soc_obs_flip_p, rng,
    )
    return {"thermostat": {"room_temp": temp_bin}, "battery": {"soc": soc_bin}}


def step_env(
    env: Environment,
    truth: GroundTruth,
    row: TimeStepRow,
    thermostat_action: int,
    battery_action: int,
    noise: NoiseConfig | None = None,
    rng: np.random.Generator | int | None = None,
) -> tuple[GroundTruth, dict[str, dict[str, int]], StepOutcome]:
    """Advance ground truth one step under the chosen actions.

    Dynamics run on the binned grids (outdoor temperature, solar, and
    baseline snap to their nearest bins first) so the environment agrees bin
    for bin with the deterministic tables inside the agents' models. Returns
    the new truth, the post-step observations, and the realized energies.
    """
    noise = noise or NoiseConfig()
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    temp_grid = env.thermo.temp_grid()

    temp_bin = temp_grid.index_of(truth.room_temp_c)
    outdoor_bin = temp_grid.index_of(row.outdoor_temp_c)
    if env.thermo.process_noise_p > 0:
        column = env.thermo_sampling_table.entries[:, temp_bin, outdoor_bin, thermostat_action]
        next_temp_bin = int(rng.choice(temp_grid.cardinality, p=column))
    else:
        next_temp_bin = temp_grid.index_of(next_temperature(
            env.thermo, temp_grid.value(temp_bin), temp_grid.value(outdoor_bin),
            thermostat_action,
        ))
    new_room = temp_grid.value(next_temp_bin)

    new_soc = soc_next_value(env.battery, truth.soc, battery_action)
    battery_kwh = battery_step_kwh(env.battery, truth.soc, battery_action)
    hvac_kwh = hvac_step_kwh(env.thermo, thermostat_action)
    solar = env.bins.solar.snap(row.solar_kwh)
    baseline = env.bins.baseline.snap(row.baseline_kwh)
    total = energy_accounting(baseline, hvac_kwh, battery_kwh, solar)
    cost, emissions = cost_and_ghg(total, row.tou_rate, row.ghg_rate)

    new_truth = GroundTruth(
        room_temp_c=new_room,
        soc=new_soc,
        cumulative_cost=truth.cumulative_cost + cost,
        cumulative_emissions_kg=truth.cumulative_emissions_kg + emissions,
    )
    outcome = StepOutcome(
        baseline_kwh=baseline,
        hvac_kwh=hvac_kwh,
        battery_kwh=battery_kwh,
        solar_kwh=solar,
        total_kwh=total,
        cost=cost,
        emissions_kg=emissions,
    )
    return new_truth, observe(env, new_truth, noise, rng), outcome
