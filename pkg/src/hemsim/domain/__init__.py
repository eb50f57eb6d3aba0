"""Household-energy domain: physical parameters, shared dynamics tables, and
the two agent model builders."""
from .builders import build_battery_model, build_thermostat_model, comfort_log_preferences
from .params import BatteryParams, BinGrid, ComfortTargets, EnergyBins, ThermoParams
from .tables import (
    BATTERY_ACTIONS,
    THERMOSTAT_ACTIONS,
    battery_allowed,
    battery_energy_table,
    battery_step_kwh,
    cost_and_ghg,
    cost_table,
    energy_accounting,
    ghg_table,
    hvac_energy_table,
    hvac_step_kwh,
    next_temperature,
    soc_next_value,
    soc_transition,
    thermo_transition,
    total_energy_table,
    violation_table,
)

__all__ = [
    "BATTERY_ACTIONS",
    "BatteryParams",
    "BinGrid",
    "ComfortTargets",
    "EnergyBins",
    "THERMOSTAT_ACTIONS",
    "ThermoParams",
    "battery_allowed",
    "battery_energy_table",
    "battery_step_kwh",
    "build_battery_model",
    "build_thermostat_model",
    "comfort_log_preferences",
    "cost_and_ghg",
    "cost_table",
    "energy_accounting",
    "ghg_table",
    "hvac_energy_table",
    "hvac_step_kwh",
    "next_temperature",
    "soc_next_value",
    "soc_transition",
    "thermo_transition",
    "total_energy_table",
    "violation_table",
]
