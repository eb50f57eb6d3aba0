"""The per-step simulation loop for both agents.

Each step: both agents perceive (exact Bayesian update from their sensor
reading), the thermostat's transition counts are updated when learning, the
thermostat plans over the forecast window and commits to a policy, its HVAC
energy profile is messaged to the battery agent, the battery plans, and the
environment advances under the two chosen first actions.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import ScenarioConfig
from .domain.builders import build_battery_model, build_thermostat_model
from .domain.tables import BATTERY_ACTIONS, THERMOSTAT_ACTIONS, hvac_step_kwh
from .environment import (
    STEPS_PER_DAY,
    Environment,
    NoiseConfig,
    TimeStepRow,
    make_initial_truth,
    observe,
    step_env,
)
from .errors import DataValidationError
from .inference.distributions import Categorical
from .inference.engine import (
    evaluate_policies,
    infer_states,
    policy_posterior,
    predict_states,
    roll_beliefs_one_step,
    select_policy,
)
from .inference.learning import update_transition_counts
from .inference.model import AgentModel, TableTransition


@dataclass(frozen=True)
class AgentStepInfo:
    """One agent's planning summary for one step."""

    action: str
    policy_index: int
    efe_selected: float
    efe_min: float
    efe_mean: float
    efe_max: float
    feasible_policies: int

    @property
    def neg_efe_selected(self) -> float:
        return -self.efe_selected


@dataclass(frozen=True)
class StepRecord:
    """Everything recorded about one simulated two-hour step."""

    step: int
    day: int
    hour: int
    tou_high: bool
    tou_rate: float
    ghg_rate: float
    occupancy: bool
    outdoor_temp_c: float
    target_temp_c: float
    room_temp_start_c: float
    room_temp_c: float
    room_temp_belief_c: float
    room_temp_belief_entropy: float
    soc_start: float
    soc: float
    soc_belief: float
    baseline_kwh: float
    hvac_kwh: float
    battery_kwh: float
    solar_kwh: float
    total_kwh: float
    total_kwh_belief: float
    cost: float
    cost_belief: float
    emissions_kg: float
    emissions_belief_kg: float
    cumulative_cost: float
    cumulative_emissions_kg: float
    thermostat: AgentStepInfo
    battery: AgentStepInfo
    hvac_message_kwh: tuple[float, ...]


@dataclass(frozen=True)
class Metrics:
    """Run-level summary, recomputable from the trace alone."""

    days: int
    steps: int
    per_day_deviation_c: tuple[float, ...]
    per_day_worst_case_deviation_c: tuple[float, ...]
    daily_avg_deviation_c: float
    worst_case_daily_avg_deviation_c: float
    deviation_ratio: float
    total_cost: float
    total_emissions_kg: float
    battery_action_counts: dict
    per_day_mean_neg_efe: dict

    def to_dict(self) -> dict:
        return {
            "days": self.days,
            "steps": self.steps,
            "per_day_deviation_c": list(self.per_day_deviation_c),
            "per_day_worst_case_deviation_c": list(self.per_day_worst_case_deviation_c),
            "daily_avg_deviation_c": self.daily_avg_deviation_c,
            "worst_case_daily_avg_deviation_c": self.worst_case_daily_avg_deviation_c,
            "deviation_ratio": self.deviation_ratio,
            "total_cost": self.total_cost,
            "total_emissions_kg": self.total_emissions_kg,
            "battery_action_counts": self.battery_action_counts,
            "per_day_mean_neg_efe": self.per_day_mean_neg_efe,
        }


def _thermo_frames(rows: Sequence[TimeStepRow], start: int, horizon: int, cfg: ScenarioConfig):
    """Forecast frames for the thermostat: the daily profile repeats, so the
    window wraps cyclically over the input rows."""
    grid = cfg.thermo.temp_grid()
    frames = []
    for k in range(horizon):
        row = rows[(start + k) % len(rows)]
        frames.append({
            "outdoor": grid.index_of(row.outdoor_temp_c),
            "occupancy": int(row.occupancy),
            "tou_high": int(row.tou_high),
        })
    return frames


def _battery_frames(
    rows: Sequence[TimeStepRow],
    start: int,
    horizon: int,
    cfg: ScenarioConfig,
    hvac_profile_kwh: Sequence[float],
):
    bins = cfg.bins
    frames = []
    for k in range(horizon):
        row = rows[(start + k) % len(rows)]
        frames.append({
            "tou_high": int(row.tou_high),
            "ghg_rate": bins.ghg_rate.index_of(row.ghg_rate),
            "solar": bins.solar.index_of(row.solar_kwh),
            "baseline": bins.baseline.index_of(row.baseline_kwh),
            "hvac": bins.hvac.index_of(hvac_profile_kwh[k]),
        })
    return frames


def _efe_stats(totals: np.ndarray, selected: int, info_action: str, policy_index: int) -> AgentStepInfo:
    """Summary statistics over the finite (feasible) policies only."""
    finite = totals[np.isfinite(totals)]
    return AgentStepInfo(
        action=info_action,
        policy_index=policy_index,
        efe_selected=float(totals[selected]),
        efe_min=float(finite.min()),
        efe_mean=float(finite.mean()),
        efe_max=float(finite.max()),
        feasible_policies=int(finite.size),
    )


def _working_transition(model: AgentModel, factor: str):
    spec = model.transitions[factor]
    assert isinstance(spec, TableTransition)
    return spec.working_table()


def run_simulation(
    cfg: ScenarioConfig, rows: Sequence[TimeStepRow]
) -> tuple[list[StepRecord], Metrics]:
    """Simulate cfg.days days over the given exogenous rows.

    Returns the full step trace and the metrics computed from it. With the
    same config and rows the result is bit-for-bit reproducible: all
    randomness flows from three generators spawned off cfg.seed (environment
    noise, thermostat sampling, battery sampling).
    """
    thermostat = build_thermostat_model(cfg)
    battery = build_battery_model(cfg)
    env = Environment(thermo=cfg.thermo, battery=cfg.battery, bins=cfg.bins)
    grid = cfg.thermo.temp_grid()
    soc_grid = cfg.battery.soc_grid()
    bins = cfg.bins

    env_rng, thermostat_rng, battery_rng = (
        np.random.default_rng(s) for s in np.random.SeedSequence(cfg.seed).spawn(3)
    )

    temp_likelihood = thermostat.modality("room_temp_obs").likelihood
    soc_likelihood = battery.modality("soc_obs").likelihood
    n_temp = grid.cardinality

    truth = make_initial_truth(env, cfg.initial_room_temp_c)
    observations = observe(env, truth, cfg.noise, env_rng)

    temp_posterior = thermostat.initial_beliefs["room_temp"]
    soc_posterior = battery.initial_beliefs["soc"]
    prev_thermo_action: int | None = None
    prev_battery_action: int | None = None
    prev_outdoor_bin: int | None = None

    trace: list[StepRecord] = []
    for step in range(cfg.steps):
        row = rows[step % len(rows)]
        day = step // STEPS_PER_DAY

        # Perception: prior = last posterior pushed through the executed
        # action, then an exact Bayesian update on the sensor reading.
        if step == 0:
            temp_prior = thermostat.initial_beliefs["room_temp"]
            soc_prior = battery.initial_beliefs["soc"]
        else:
            temp_prior = predict_states(
                temp_posterior,
                _working_transition(thermostat, "room_temp"),
                action=prev_thermo_action,
                exogenous_parents=[Categorical.delta(prev_outdoor_bin, n_temp)],
            )
            soc_prior = predict_states(
                soc_posterior,
                _working_transition(battery, "soc"),
                action=prev_battery_action,
            )
        prev_temp_posterior = temp_posterior
        temp_posterior = infer_states(
            temp_prior, temp_likelihood, observations["thermostat"]["room_temp"]
        )
        soc_posterior = infer_states(
            soc_prior, soc_likelihood, observations["battery"]["soc"]
        )

        # Learning: accumulate Dirichlet evidence for the transition just
        # observed, addressed by the previous action and outdoor bin.
        if cfg.learn and step > 0:
            spec = thermostat.transitions["room_temp"]
            assert isinstance(spec, TableTransition)
            update_transition_counts(
                spec.table,
                prev_belief=prev_temp_posterior,
                post_belief=temp_posterior,
                action=prev_thermo_action,
                exogenous_parents=(prev_outdoor_bin,),
                learning_rate=cfg.learning_rate,
            )

        # Thermostat plans over the forecast window.
        thermo_frames = _thermo_frames(rows, step, cfg.horizon, cfg)
        thermo_beliefs = dict(thermostat.initial_beliefs)
        thermo_beliefs["room_temp"] = temp_posterior
        thermo_totals, _ = evaluate_policies(thermostat, thermo_beliefs, thermo_frames)
        thermo_q = policy_posterior(thermo_totals, thermostat.policy_prior, cfg.precision)
        thermo_pol = select_policy(thermo_q, cfg.action_selection, thermostat_rng)
        thermo_policy = thermostat.policies[thermo_pol]
        thermo_action = thermo_policy.actions[0]

        # Message: the committed policy's HVAC energy profile, step by step.
        hvac_message = tuple(
            hvac_step_kwh(cfg.thermo, a) for a in thermo_policy.actions
        )

        # Battery plans against the forecast plus the HVAC message.
        battery_frames = _battery_frames(rows, step, cfg.horizon, cfg, hvac_message)
        battery_beliefs = dict(battery.initial_beliefs)
        battery_beliefs["soc"] = soc_posterior
        battery_totals, _ = evaluate_policies(battery, battery_beliefs, battery_frames)
        battery_q = policy_posterior(battery_totals, battery.policy_prior, cfg.precision)
        battery_pol = select_policy(battery_q, cfg.action_selection, battery_rng)
        battery_action = battery.policies[battery_pol].actions[0]

        # The agents' beliefs about the interval now unfolding.
        thermo_now = roll_beliefs_one_step(
            thermostat, thermo_beliefs, thermo_action, thermo_frames[0]
        )
        battery_now = roll_beliefs_one_step(
            battery, battery_beliefs, battery_action, battery_frames[0]
        )

        truth_before = truth
        truth, observations, outcome = step_env(
            env, truth, row, thermo_action, battery_action, cfg.noise, env_rng
        )

        trace.append(StepRecord(
            step=step,
            day=day,
            hour=row.time_of_day,
            tou_high=row.tou_high,
            tou_rate=row.tou_rate,
            ghg_rate=row.ghg_rate,
            occupancy=row.occupancy,
            outdoor_temp_c=row.outdoor_temp_c,
            target_temp_c=cfg.comfort.target_for(row.occupancy),
            room_temp_start_c=truth_before.room_temp_c,
            room_temp_c=truth.room_temp_c,
            room_temp_belief_c=thermo_now["room_temp"].expected_value(grid.values),
            room_temp_belief_entropy=thermo_now["room_temp"].entropy(),
            soc_start=truth_before.soc,
            soc=truth.soc,
            soc_belief=battery_now["soc"].expected_value(soc_grid.values),
            baseline_kwh=outcome.baseline_kwh,
            hvac_kwh=outcome.hvac_kwh,
            battery_kwh=outcome.battery_kwh,
            solar_kwh=outcome.solar_kwh,
            total_kwh=outcome.total_kwh,
            total_kwh_belief=battery_now["total_kwh"].expected_value(bins.total.values),
            cost=outcome.cost,
            cost_belief=battery_now["cost"].expected_value(bins.cost.values),
            emissions_kg=outcome.emissions_kg,
            emissions_belief_kg=battery_now["ghg"].expected_value(bins.ghg.values),
            cumulative_cost=truth.cumulative_cost,
            cumulative_emissions_kg=truth.cumulative_emissions_kg,
            thermostat=_efe_stats(
                thermo_totals, thermo_pol, THERMOSTAT_ACTIONS[thermo_action], thermo_pol
            ),
            battery=_efe_stats(
                battery_totals, battery_pol, BATTERY_ACTIONS[battery_action], battery_pol
            ),
            hvac_message_kwh=hvac_message,
        ))

        prev_thermo_action = thermo_action
        prev_battery_action = battery_action
        prev_outdoor_bin = grid.index_of(row.outdoor_temp_c)

    return trace, compute_metrics(trace)


def compute_metrics(trace: Sequence[StepRecord]) -> Metrics:
    """Summarize a trace.

    The comfort deviation for a step compares the temperature reached during
    the interval against that interval's occupancy-dependent target; the
    worst case replaces the room temperature with the (binned) outdoor
    temperature, i.e. a home with the HVAC never running and no thermal mass.
    """
    if not trace:
        raise DataValidationError("cannot compute metrics for an empty trace")
    n_days = trace[-1].day + 1
    deviation = [0.0] * n_days
    worst_case = [0.0] * n_days
    counts = {
        regime: {action: 0 for action in BATTERY_ACTIONS}
        for regime in ("low_tou", "high_tou")
    }
    neg_efe_sums = {"thermostat": [0.0] * n_days, "battery": [0.0] * n_days}
    steps_per_day = [0] * n_days
    for record in trace:
        d = record.day
        steps_per_day[d] += 1
        deviation[d] += abs(record.room_temp_c - record.target_temp_c)
        worst_case[d] += abs(record.outdoor_temp_c - record.target_temp_c)
        regime = "high_tou" if record.tou_high else "low_tou"
        counts[regime][record.battery.action] += 1
        neg_efe_sums["thermostat"][d] += record.thermostat.neg_efe_selected
        neg_efe_sums["battery"][d] += record.battery.neg_efe_selected
    per_day_mean_neg_efe = {
        agent: [total / steps_per_day[d] for d, total in enumerate(sums)]
        for agent, sums in neg_efe_sums.items()
    }
    avg_dev = sum(deviation) / n_days
    avg_worst = sum(worst_case) / n_days
    return Metrics(
        days=n_days,
        steps=len(trace),
        per_day_deviation_c=tuple(deviation),
        per_day_worst_case_deviation_c=tuple(worst_case),
        daily_avg_deviation_c=avg_dev,
        worst_case_daily_avg_deviation_c=avg_worst,
        deviation_ratio=avg_dev / avg_worst if avg_worst > 0 else 0.0,
        total_cost=trace[-1].cumulative_cost,
        total_emissions_kg=trace[-1].cumulative_emissions_kg,
        battery_action_counts=counts,
        per_day_mean_neg_efe=per_day_mean_neg_efe,
    )
