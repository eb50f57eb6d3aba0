"""Physical and preference parameters, plus the discretization grids.

Everything the two agents and the environment share lives here: room
thermodynamics, battery sizing, comfort targets, and the bin grids used to
discretize energy quantities.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import BuildError


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class BinGrid:
    """A strictly increasing grid of bin center values."""

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise BuildError("a bin grid must be a non-empty 1-D vector")
        if not np.isfinite(values).all():
            raise BuildError("bin values must be finite")
        if values.size > 1 and not (np.diff(values) > 0).all():
            raise BuildError("bin values must be strictly increasing")
        object.__setattr__(self, "values", _readonly(values))

    @property
    def cardinality(self) -> int:
        return self.values.shape[0]

    def value(self, index: int) -> float:
        return float(self.values[index])

    def index_of(self, x: float) -> int:
        """Nearest bin, clamped to the grid ends; exact midpoints round up."""
        if self.values.size == 1:
            return 0
        midpoints = (self.values[:-1] + self.values[1:]) / 2.0
        return int(np.searchsorted(midpoints, x, side="right"))

    def indices_of(self, xs) -> np.ndarray:
        if self.values.size == 1:
            return np.zeros(np.shape(xs), dtype=int)
        midpoints = (self.values[:-1] + self.values[1:]) / 2.0
        return np.searchsorted(midpoints, np.asarray(xs, dtype=float), side="right")

    def snap(self, x: float) -> float:
        """The grid value nearest to x."""
        return self.value(self.index_of(x))

    @classmethod
    def from_range(cls, lo: float, hi: float, step: float) -> "BinGrid":
        if step <= 0:
            raise BuildError("bin step must be positive")
        count = (hi - lo) / step
        if abs(count - round(count)) > 1e-9 or count < 0:
            raise BuildError("bin range must be an integer multiple of the step")
        return cls(lo + step * np.arange(int(round(count)) + 1))


@dataclass(frozen=True)
class ThermoParams:
    """Room thermodynamics and HVAC sizing on the temperature grid.

    Each simulation step covers two hours; alpha is the fraction of the
    indoor/outdoor temperature gap closed per step, and hvac_delta_c the
    temperature change a heating or cooling step adds on top of that drift.
    """

    alpha: float = 0.25
    hvac_delta_c: float = 1.5
    temp_min_c: float = 12.0
    temp_max_c: float = 24.0
    temp_step_c: float = 1.0
    hvac_kwh_per_step: float = 1.0
    process_noise_p: float = 0.0  # total mass leaked to the adjacent temperature bins

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise BuildError("alpha must lie strictly between 0 and 1")
        if self.hvac_delta_c <= 0:
            raise BuildError("hvac_delta_c must be positive")
        if self.hvac_kwh_per_step < 0:
            raise BuildError("hvac_kwh_per_step must be non-negative")
        if self.temp_min_c >= self.temp_max_c:
            raise BuildError("temp_min_c must be below temp_max_c")
        if not 0.0 <= self.process_noise_p <= 0.5:
            raise BuildError("process_noise_p must lie in [0, 0.5]")
        BinGrid.from_range(self.temp_min_c, self.temp_max_c, self.temp_step_c)

    def temp_grid(self) -> BinGrid:
        return BinGrid.from_range(self.temp_min_c, self.temp_max_c, self.temp_step_c)


@dataclass(frozen=True)
class BatteryParams:
    """Battery sizing and the protective state-of-charge limits.

    State of charge moves in fixed fractional steps; charging at or above
    max_charge_soc and discharging at or below min_discharge_soc are masked
    to behave as no-ops.
    """

    capacity_kwh: float = 10.0
    step_fraction: float = 0.2
    initial_soc: float = 0.2
    min_discharge_soc: float = 0.2
    max_charge_soc: float = 0.8

    def __post_init__(self) -> None:
        if self.capacity_kwh <= 0:
            raise BuildError("capacity_kwh must be positive")
        if not 0.0 < self.step_fraction <= 1.0:
            raise BuildError("step_fraction must lie in (0, 1]")
        levels = 1.0 / self.step_fraction
        if abs(levels - round(levels)) > 1e-9:
            raise BuildError("step_fraction must divide 1.0 into whole levels")
        grid = self.soc_grid()
        for field_name in ("initial_soc", "min_discharge_soc", "max_charge_soc"):
            value = getattr(self, field_name)
            if not 0.0 <= value <= 1.0 or abs(grid.snap(value) - value) > 1e-9:
                raise BuildError(f"{field_name} must sit on the state-of-charge grid")
        if self.min_discharge_soc >= self.max_charge_soc:
            raise BuildError("min_discharge_soc must be below max_charge_soc")

    def soc_grid(self) -> BinGrid:
        count = int(round(1.0 / self.step_fraction))
        return BinGrid(self.step_fraction * np.arange(count + 1))

    @property
    def kwh_per_step(self) -> float:
        return self.capacity_kwh * self.step_fraction


@dataclass(frozen=True)
class ComfortTargets:
    """Thermostat preference shape.

    Log-preference for a temperature outcome falls linearly with its absolute
    deviation from the occupancy-dependent target, once the deviation exceeds
    the deadband (a tolerance band within which all temperatures are equally
    acceptable, so the HVAC does not chase fractions of a bin). During
    high-tariff steps the slope is multiplied by tou_high_flattening, trading
    comfort against expensive consumption. hvac_energy_penalty is the
    log-preference cost per kWh of HVAC energy.
    """

    occupied_target_c: float = 18.0
    unoccupied_target_c: float = 16.0
    preference_precision: float = 3.0
    deadband_c: float = 1.0
    tou_high_flattening: float = 0.5
    hvac_energy_penalty: float = 0.8

    def __post_init__(self) -> None:
        if self.preference_precision <= 0:
            raise BuildError("preference_precision must be positive")
        if self.deadband_c < 0:
            raise BuildError("deadband_c must be non-negative")
        if not 0.0 <= self.tou_high_flattening <= 1.0:
            raise BuildError("tou_high_flattening must lie in [0, 1]")
        if self.hvac_energy_penalty < 0:
            raise BuildError("hvac_energy_penalty must be non-negative")

    def target_for(self, occupied: bool) -> float:
        return self.occupied_target_c if occupied else self.unoccupied_target_c


@dataclass(frozen=True)
class EnergyBins:
    """Bin grids for every energy-accounting quantity.

    Component grids (solar, baseline, HVAC, battery) are chosen so that every
    reachable sum lands exactly on a total-energy bin, which keeps the
    discrete accounting lossless; cost and emissions grids likewise cover
    every product of a total bin with a tariff or intensity rate.
    """

    hvac: BinGrid
    battery: BinGrid
    solar: BinGrid
    baseline: BinGrid
    total: BinGrid
    cost: BinGrid
    ghg_rate: BinGrid
    ghg: BinGrid

    def __post_init__(self) -> None:
        for name in ("battery", "total", "cost"):
            grid: BinGrid = getattr(self, name)
            if not np.any(np.abs(grid.values) < 1e-9):
                raise BuildError(f"the {name} grid must contain zero")
        if self.ghg.values[0] < -1e-9:
            raise BuildError("emissions bins must be non-negative")

    @classmethod
    def build(
        cls,
        thermo: ThermoParams,
        battery: BatteryParams,
        *,
        solar_max_kwh: float = 4.0,
        solar_step_kwh: float = 0.5,
        baseline_max_kwh: float = 3.0,
        baseline_step_kwh: float = 0.5,
        total_step_kwh: float = 0.5,
        ghg_rates: tuple[float, ...] = (0.2, 0.4, 0.6, 0.8),
        tou_low_rate: float = 0.15,
        tou_high_rate: float = 0.45,
    ) -> "EnergyBins":
        if solar_step_kwh <= 0 or baseline_step_kwh <= 0 or total_step_kwh <= 0:
            raise BuildError("bin steps must be positive")
        if not ghg_rates or any(r <= 0 for r in ghg_rates):
            raise BuildError("emission intensity rates must be positive")
        if tou_low_rate <= 0 or tou_high_rate <= tou_low_rate:
            raise BuildError("tariff rates must be positive with high above low")

        hvac = BinGrid(np.unique([0.0, thermo.hvac_kwh_per_step]))
        batt_step = battery.kwh_per_step
        batt = BinGrid(np.array([-batt_step, 0.0, batt_step]))
        solar = BinGrid.from_range(0.0, solar_max_kwh, solar_step_kwh)
        baseline = BinGrid.from_range(0.0, baseline_max_kwh, baseline_step_kwh)

        total_lo = _snap_down(-(batt_step + solar_max_kwh), total_step_kwh)
        total_hi = _snap_up(
            baseline_max_kwh + thermo.hvac_kwh_per_step + batt_step, total_step_kwh
        )
        total = BinGrid.from_range(total_lo, total_hi, total_step_kwh)

        max_rate = max(tou_high_rate, tou_low_rate)
        cost_step = total_step_kwh * min(tou_low_rate, tou_high_rate)
        cost_lo = _snap_down(total_lo * max_rate, cost_step)
        cost_hi = _snap_up(total_hi * max_rate, cost_step)
        cost = BinGrid.from_range(cost_lo, cost_hi, cost_step)

        ghg_rate = BinGrid(np.array(sorted(ghg_rates)))
        ghg_step = total_step_kwh * min(ghg_rates)
        ghg_hi = _snap_up(total_hi * max(ghg_rates), ghg_step)
        ghg = BinGrid.from_range(0.0, ghg_hi, ghg_step)

        return cls(
            hvac=hvac, battery=batt, solar=solar, baseline=baseline,
            total=total, cost=cost, ghg_rate=ghg_rate, ghg=ghg,
        )


def _snap_down(x: float, step: float) -> float:
    return step * math.floor(x / step + 1e-9)


def _snap_up(x: float, step: float) -> float:
    return step * math.ceil(x / step - 1e-9)
