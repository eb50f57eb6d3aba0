"""Deterministic dynamics and energy accounting, in one place.

The scalar formulas here are used twice: once to populate the conditional
tables inside the agents' generative models, and once by the simulation
environment to advance ground truth. Sharing them keeps the two in exact
agreement bin for bin.
"""
from __future__ import annotations

import numpy as np

from ..errors import BuildError
from ..inference.distributions import ConditionalTable, blur_adjacent
from .params import BatteryParams, BinGrid, EnergyBins, ThermoParams

THERMOSTAT_ACTIONS = ("off", "heat", "cool")
BATTERY_ACTIONS = ("off", "charge", "discharge")

_SOC_EPS = 1e-9


def next_temperature(params: ThermoParams, temp_c: float, outdoor_c: float, action: int) -> float:
    """Continuous room-temperature update before binning.

    T' = T + alpha * (T_out - T), plus hvac_delta_c for heating or minus it
    for cooling. Not clamped; the grid clamps when binning.
    """
    if not 0 <= action < len(THERMOSTAT_ACTIONS):
        raise BuildError(f"unknown thermostat action index {action}")
    nudge = (0.0, params.hvac_delta_c, -params.hvac_delta_c)[action]
    return temp_c + params.alpha * (outdoor_c - temp_c) + nudge


def hvac_step_kwh(params: ThermoParams, action: int) -> float:
    """Electrical energy drawn by the HVAC for one step of the given action."""
    if not 0 <= action < len(THERMOSTAT_ACTIONS):
        raise BuildError(f"unknown thermostat action index {action}")
    return 0.0 if action == 0 else params.hvac_kwh_per_step


def battery_allowed(params: BatteryParams, soc: float, action: int) -> bool:
    """Whether the protective mask lets the action change the state of charge."""
    if not 0 <= action < len(BATTERY_ACTIONS):
        raise BuildError(f"unknown battery action index {action}")
    if action == 1:
        return soc < params.max_charge_soc - _SOC_EPS
    if action == 2:
        return soc > params.min_discharge_soc + _SOC_EPS
    return False


def soc_next_value(params: BatteryParams, soc: float, action: int) -> float:
    """Next state of charge; masked actions leave it unchanged."""
    if not battery_allowed(params, soc, action):
        return soc
    step = params.step_fraction if action == 1 else -params.step_fraction
    return params.soc_grid().snap(soc + step)


def battery_step_kwh(params: BatteryParams, soc: float, action: int) -> float:
    """Grid-side battery energy for one step: positive charging, negative
    discharging, zero when idle or masked."""
    if not battery_allowed(params, soc, action):
        return 0.0
    return params.kwh_per_step if action == 1 else -params.kwh_per_step


def energy_accounting(baseline_kwh: float, hvac_kwh: float, battery_kwh: float, solar_kwh: float) -> float:
    """Net household energy for one step.

    total = baseline + hvac + battery - solar; discharge and solar act as
    negative contributions, so a negative total is energy sold back.
    """
    return baseline_kwh + hvac_kwh + battery_kwh - solar_kwh


def cost_and_ghg(total_kwh: float, tou_rate: float, ghg_rate: float) -> tuple[float, float]:
    """Step cost and emissions.

    Cost is signed (negative totals earn sale-back revenue at the same
    tariff); emissions only accrue on imported energy, so they floor at zero.
    """
    return total_kwh * tou_rate, max(total_kwh, 0.0) * ghg_rate


def thermo_transition(params: ThermoParams) -> ConditionalTable:
    """p(T' | T, T_out, action) on the temperature grid.

    Deterministic nearest-bin image of the continuous update, optionally
    blurred by process noise into the adjacent bins.
    """
    grid = params.temp_grid()
    n = grid.cardinality
    arr = np.zeros((n, n, n, len(THERMOSTAT_ACTIONS)))
    temp = grid.values[:, None]
    outdoor = grid.values[None, :]
    rows, cols = np.indices((n, n))
    for action in range(len(THERMOSTAT_ACTIONS)):
        nudge = (0.0, params.hvac_delta_c, -params.hvac_delta_c)[action]
        nxt = temp + params.alpha * (outdoor - temp) + nudge
        arr[grid.indices_of(nxt), rows, cols, action] = 1.0
    if params.process_noise_p > 0:
        arr = blur_adjacent(arr, params.process_noise_p)
    return ConditionalTable(arr)


def soc_transition(params: BatteryParams) -> ConditionalTable:
    """p(SoC' | SoC, action): one grid step per action, with the protective mask."""
    grid = params.soc_grid()
    n = grid.cardinality
    arr = np.zeros((n, n, len(BATTERY_ACTIONS)))
    for i in range(n):
        soc = grid.value(i)
        for action in range(len(BATTERY_ACTIONS)):
            arr[grid.index_of(soc_next_value(params, soc, action)), i, action] = 1.0
    return ConditionalTable(arr)


def violation_table(params: BatteryParams) -> ConditionalTable:
    """p(flag | SoC, action): flag = 1 when the action is masked by the
    protective limits. Paired with a -inf preference this rules the attempt
    out at planning time rather than relying on the mask alone."""
    grid = params.soc_grid()
    n = grid.cardinality
    arr = np.zeros((2, n, len(BATTERY_ACTIONS)))
    for i in range(n):
        soc = grid.value(i)
        for action in range(len(BATTERY_ACTIONS)):
            masked = action != 0 and not battery_allowed(params, soc, action)
            arr[1 if masked else 0, i, action] = 1.0
    return ConditionalTable(arr)


def hvac_energy_table(params: ThermoParams, bins: EnergyBins) -> ConditionalTable:
    """p(hvac kWh bin | action)."""
    arr = np.zeros((bins.hvac.cardinality, len(THERMOSTAT_ACTIONS)))
    for action in range(len(THERMOSTAT_ACTIONS)):
        arr[bins.hvac.index_of(hvac_step_kwh(params, action)), action] = 1.0
    return ConditionalTable(arr)


def battery_energy_table(params: BatteryParams, bins: EnergyBins) -> ConditionalTable:
    """p(battery kWh bin | SoC, action): signed energy, zero when masked."""
    grid = params.soc_grid()
    arr = np.zeros((bins.battery.cardinality, grid.cardinality, len(BATTERY_ACTIONS)))
    for i in range(grid.cardinality):
        soc = grid.value(i)
        for action in range(len(BATTERY_ACTIONS)):
            arr[bins.battery.index_of(battery_step_kwh(params, soc, action)), i, action] = 1.0
    return ConditionalTable(arr)


def total_energy_table(bins: EnergyBins) -> ConditionalTable:
    """p(total kWh bin | baseline, hvac, battery, solar bins)."""
    arr = np.zeros((
        bins.total.cardinality,
        bins.baseline.cardinality,
        bins.hvac.cardinality,
        bins.battery.cardinality,
        bins.solar.cardinality,
    ))
    for ib, b in enumerate(bins.baseline.values):
        for ih, h in enumerate(bins.hvac.values):
            for ik, k in enumerate(bins.battery.values):
                for is_, s in enumerate(bins.solar.values):
                    total = energy_accounting(b, h, k, s)
                    arr[bins.total.index_of(total), ib, ih, ik, is_] = 1.0
    return ConditionalTable(arr)


def cost_table(bins: EnergyBins, tou_low_rate: float, tou_high_rate: float) -> ConditionalTable:
    """p(cost bin | total bin, tariff flag)."""
    arr = np.zeros((bins.cost.cardinality, bins.total.cardinality, 2))
    for it, total in enumerate(bins.total.values):
        for flag, rate in enumerate((tou_low_rate, tou_high_rate)):
            cost, _ = cost_and_ghg(total, rate, 1.0)
            arr[bins.cost.index_of(cost), it, flag] = 1.0
    return ConditionalTable(arr)


def ghg_table(bins: EnergyBins) -> ConditionalTable:
    """p(emissions bin | total bin, intensity-rate bin)."""
    arr = np.zeros((bins.ghg.cardinality, bins.total.cardinality, bins.ghg_rate.cardinality))
    for it, total in enumerate(bins.total.values):
        for ir, rate in enumerate(bins.ghg_rate.values):
            _, ghg = cost_and_ghg(total, 1.0, rate)
            arr[bins.ghg.index_of(ghg), it, ir] = 1.0
    return ConditionalTable(arr)
