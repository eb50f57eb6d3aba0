"""Assemble the two agents' generative models from scenario parameters.

The thermostat agent plans heating and cooling against comfort and HVAC
energy preferences; the battery agent plans charging and discharging against
cost and emissions preferences, fed the thermostat's committed HVAC profile
as an exogenous input.
"""
from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from ..inference.distributions import (
    Categorical,
    DirichletTable,
    Preferences,
    blur_adjacent,
    identity_table,
    joint_identity_table,
)
from ..inference.model import (
    AgentModel,
    FactorParent,
    Lookup,
    Modality,
    TableTransition,
)
from .tables import (
    BATTERY_ACTIONS,
    THERMOSTAT_ACTIONS,
    battery_energy_table,
    cost_table,
    ghg_table,
    hvac_energy_table,
    soc_transition,
    thermo_transition,
    total_energy_table,
    violation_table,
)

if TYPE_CHECKING:  # pragma: no cover
    from ..config import ScenarioConfig


def comfort_log_preferences(cfg: "ScenarioConfig") -> np.ndarray:
    """Log-preferences over the joint (temperature, occupancy, tariff) outcome.

    Preference falls linearly with the deviation from the occupancy-dependent
    target once outside the deadband; the slope is flattened during
    high-tariff steps. Outcomes are indexed row-major over (temperature bin,
    occupancy, tariff flag).
    """
    grid = cfg.thermo.temp_grid()
    comfort = cfg.comfort
    prefs = np.zeros((grid.cardinality, 2, 2))
    for occupied in (0, 1):
        deviation = np.abs(grid.values - comfort.target_for(bool(occupied)))
        excess = np.maximum(deviation - comfort.deadband_c, 0.0)
        for tou_high in (0, 1):
            slope = comfort.preference_precision
            if tou_high:
                slope *= comfort.tou_high_flattening
            prefs[:, occupied, tou_high] = -slope * excess
    return prefs.ravel()


def _sensor_likelihood(cardinality: int, flip_p: float):
    """Identity likelihood, blurred to match any configured observation noise
    so a surprising reading never has zero probability under the prior."""
    table = identity_table(cardinality)
    if flip_p > 0:
        from ..inference.distributions import ConditionalTable

        table = ConditionalTable(blur_adjacent(table.entries, flip_p))
    return table


def build_thermostat_model(cfg: "ScenarioConfig") -> AgentModel:
    """Thermostat agent: room-temperature dynamics under comfort preferences.

    When cfg.learn is set, the temperature transition starts as a flat
    Dirichlet table (and the initial temperature belief as uniform) so the
    dynamics must be learned from experience.
    """
    grid = cfg.thermo.temp_grid()
    n_temp = grid.cardinality
    bins = cfg.bins

    if cfg.learn:
        temp_spec = TableTransition(
            table=DirichletTable.uninformative(
                (n_temp, n_temp, n_temp, len(THERMOSTAT_ACTIONS))
            ),
            parents=(FactorParent("room_temp", "prev"), FactorParent("outdoor", "current")),
            action_conditioned=True,
        )
        initial_temp = Categorical.uniform(n_temp)
    else:
        temp_spec = TableTransition(
            table=thermo_transition(cfg.thermo),
            parents=(FactorParent("room_temp", "prev"), FactorParent("outdoor", "current")),
            action_conditioned=True,
        )
        initial_temp = Categorical.delta(grid.index_of(cfg.initial_room_temp_c), n_temp)

    factors = (
        ("outdoor", n_temp),
        ("occupancy", 2),
        ("tou_high", 2),
        ("room_temp", n_temp),
        ("hvac_kwh", bins.hvac.cardinality),
    )
    transitions = {
        "outdoor": Lookup("outdoor"),
        "occupancy": Lookup("occupancy"),
        "tou_high": Lookup("tou_high"),
        "room_temp": temp_spec,
        "hvac_kwh": TableTransition(
            table=hvac_energy_table(cfg.thermo, bins),
            parents=(),
            action_conditioned=True,
        ),
    }
    modalities = (
        Modality(
            name="room_temp_obs",
            likelihood=_sensor_likelihood(n_temp, cfg.noise.room_temp_obs_flip_p),
            parents=("room_temp",),
            preferences=Preferences.flat(n_temp),
        ),
        Modality(
            name="comfort",
            likelihood=joint_identity_table((n_temp, 2, 2)),
            parents=("room_temp", "occupancy", "tou_high"),
            preferences=Preferences(comfort_log_preferences(cfg)),
        ),
        Modality(
            name="hvac_obs",
            likelihood=identity_table(bins.hvac.cardinality),
            parents=("hvac_kwh",),
            preferences=Preferences(-cfg.comfort.hvac_energy_penalty * bins.hvac.values),
        ),
    )
    initial_beliefs = {
        "outdoor": Categorical.uniform(n_temp),
        "occupancy": Categorical.uniform(2),
        "tou_high": Categorical.uniform(2),
        "room_temp": initial_temp,
        "hvac_kwh": Categorical.delta(bins.hvac.index_of(0.0), bins.hvac.cardinality),
    }
    n_policies = len(THERMOSTAT_ACTIONS) ** cfg.horizon
    return AgentModel(
        name="thermostat",
        factors=factors,
        transitions=transitions,
        modalities=modalities,
        initial_beliefs=initial_beliefs,
        policy_prior=Categorical.uniform(n_policies),
        horizon=cfg.horizon,
        action_cardinality=len(THERMOSTAT_ACTIONS),
        action_labels=THERMOSTAT_ACTIONS,
    )


def build_battery_model(cfg: "ScenarioConfig") -> AgentModel:
    """Battery agent: dispatch under cost and emissions preferences.

    The protective limits appear twice on purpose: the state-of-charge
    transition masks forbidden moves into no-ops, and a violation flag with a
    -inf preference makes any policy that attempts one infinitely costly.
    """
    soc_grid = cfg.battery.soc_grid()
    n_soc = soc_grid.cardinality
    bins = cfg.bins

    factors = (
        ("tou_high", 2),
        ("ghg_rate", bins.ghg_rate.cardinality),
        ("solar", bins.solar.cardinality),
        ("baseline", bins.baseline.cardinality),
        ("hvac_kwh", bins.hvac.cardinality),
        ("violation", 2),
        ("battery_kwh", bins.battery.cardinality),
        ("soc", n_soc),
        ("total_kwh", bins.total.cardinality),
        ("cost", bins.cost.cardinality),
        ("ghg", bins.ghg.cardinality),
    )
    transitions = {
        "tou_high": Lookup("tou_high"),
        "ghg_rate": Lookup("ghg_rate"),
        "solar": Lookup("solar"),
        "baseline": Lookup("baseline"),
        "hvac_kwh": Lookup("hvac"),
        "violation": TableTransition(
            table=violation_table(cfg.battery),
            parents=(FactorParent("soc", "prev"),),
            action_conditioned=True,
        ),
        "battery_kwh": TableTransition(
            table=battery_energy_table(cfg.battery, bins),
            parents=(FactorParent("soc", "prev"),),
            action_conditioned=True,
        ),
        "soc": TableTransition(
            table=soc_transition(cfg.battery),
            parents=(FactorParent("soc", "prev"),),
            action_conditioned=True,
        ),
        "total_kwh": TableTransition(
            table=total_energy_table(bins),
            parents=(
                FactorParent("baseline", "current"),
                FactorParent("hvac_kwh", "current"),
                FactorParent("battery_kwh", "current"),
                FactorParent("solar", "current"),
            ),
        ),
        "cost": TableTransition(
            table=cost_table(bins, cfg.rates.low, cfg.rates.high),
            parents=(FactorParent("total_kwh", "current"), FactorParent("tou_high", "current")),
        ),
        "ghg": TableTransition(
            table=ghg_table(bins),
            parents=(FactorParent("total_kwh", "current"), FactorParent("ghg_rate", "current")),
        ),
    }
    modalities = (
        Modality(
            name="soc_obs",
            likelihood=_sensor_likelihood(n_soc, cfg.noise.soc_obs_flip_p),
            parents=("soc",),
            preferences=Preferences.flat(n_soc),
        ),
        Modality(
            name="cost_obs",
            likelihood=identity_table(bins.cost.cardinality),
            parents=("cost",),
            preferences=Preferences(-cfg.battery_prefs.cost_weight * bins.cost.values),
        ),
        Modality(
            name="ghg_obs",
            likelihood=identity_table(bins.ghg.cardinality),
            parents=("ghg",),
            preferences=Preferences(-cfg.battery_prefs.ghg_weight * bins.ghg.values),
        ),
        Modality(
            name="wear_obs",
            likelihood=identity_table(bins.battery.cardinality),
            parents=("battery_kwh",),
            preferences=Preferences(
                -cfg.battery_prefs.wear_weight * np.abs(bins.battery.values)
            ),
        ),
        Modality(
            name="violation_obs",
            likelihood=identity_table(2),
            parents=("violation",),
            preferences=Preferences(np.array([0.0, -np.inf])),
        ),
    )
    initial_beliefs = {
        "tou_high": Categorical.uniform(2),
        "ghg_rate": Categorical.uniform(bins.ghg_rate.cardinality),
        "solar": Categorical.uniform(bins.solar.cardinality),
        "baseline": Categorical.uniform(bins.baseline.cardinality),
        "hvac_kwh": Categorical.uniform(bins.hvac.cardinality),
        "violation": Categorical.delta(0, 2),
        "battery_kwh": Categorical.delta(bins.battery.index_of(0.0), bins.battery.cardinality),
        "soc": Categorical.delta(soc_grid.index_of(cfg.battery.initial_soc), n_soc),
        "total_kwh": Categorical.uniform(bins.total.cardinality),
        "cost": Categorical.uniform(bins.cost.cardinality),
        "ghg": Categorical.uniform(bins.ghg.cardinality),
    }
    n_policies = len(BATTERY_ACTIONS) ** cfg.horizon
    return AgentModel(
        name="battery",
        factors=factors,
        transitions=transitions,
        modalities=modalities,
        initial_beliefs=initial_beliefs,
        policy_prior=Categorical.uniform(n_policies),
        horizon=cfg.horizon,
        action_cardinality=len(BATTERY_ACTIONS),
        action_labels=BATTERY_ACTIONS,
    )
