"""Command-line interface.

Subcommands: run (simulate and write trace.csv, efe.csv, metrics.json),
validate (check a config and its data without simulating), and sweep (run the
same scenario at several horizons and write a comparison summary). Exit
codes: 0 success, 1 config error, 2 data error, 3 runtime error. Output files
are written atomically (temp file + rename).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Sequence

from .config import ScenarioConfig, apply_overrides, load_config
from .environment import load_timeseries
from .errors import ConfigError, DataValidationError, HemsimError
from .orchestrator import Metrics, StepRecord, run_simulation

TRACE_COLUMNS = (
    "step", "day", "hour", "tou_high", "tou_rate", "ghg_rate", "occupancy",
    "outdoor_temp_c", "target_temp_c", "room_temp_start_c", "room_temp_c",
    "room_temp_belief_c", "room_temp_belief_entropy",
    "soc_start", "soc", "soc_belief",
    "thermostat_action", "battery_action",
    "baseline_kwh", "hvac_kwh", "battery_kwh", "solar_kwh", "total_kwh",
    "total_kwh_belief", "cost", "cost_belief", "emissions_kg",
    "emissions_belief_kg", "cumulative_cost", "cumulative_emissions_kg",
    "thermostat_neg_efe_selected", "battery_neg_efe_selected",
)

EFE_COLUMNS = (
    "step", "hour", "agent", "neg_efe_selected", "neg_efe_min",
    "neg_efe_mean", "neg_efe_max", "feasible_policies",
)


def _fmt(value) -> str:
    """Stable, compact formatting so identical runs give identical bytes."""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return format(value, ".10g")
    return str(value)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def trace_row(record: StepRecord) -> dict:
    return {
        "step": record.step,
        "day": record.day,
        "hour": record.hour,
        "tou_high": record.tou_high,
        "tou_rate": record.tou_rate,
        "ghg_rate": record.ghg_rate,
        "occupancy": record.occupancy,
        "outdoor_temp_c": record.outdoor_temp_c,
        "target_temp_c": record.target_temp_c,
        "room_temp_start_c": record.room_temp_start_c,
        "room_temp_c": record.room_temp_c,
        "room_temp_belief_c": record.room_temp_belief_c,
        "room_temp_belief_entropy": record.room_temp_belief_entropy,
        "soc_start": record.soc_start,
        "soc": record.soc,
        "soc_belief": record.soc_belief,
        "thermostat_action": record.thermostat.action,
        "battery_action": record.battery.action,
        "baseline_kwh": record.baseline_kwh,
        "hvac_kwh": record.hvac_kwh,
        "battery_kwh": record.battery_kwh,
        "solar_kwh": record.solar_kwh,
        "total_kwh": record.total_kwh,
        "total_kwh_belief": record.total_kwh_belief,
        "cost": record.cost,
        "cost_belief": record.cost_belief,
        "emissions_kg": record.emissions_kg,
        "emissions_belief_kg": record.emissions_belief_kg,
        "cumulative_cost": record.cumulative_cost,
        "cumulative_emissions_kg": record.cumulative_emissions_kg,
        "thermostat_neg_efe_selected": record.thermostat.neg_efe_selected,
        "battery_neg_efe_selected": record.battery.neg_efe_selected,
    }


def render_trace_csv(trace: Sequence[StepRecord]) -> str:
    lines = [",".join(TRACE_COLUMNS)]
    for record in trace:
        row = trace_row(record)
        lines.append(",".join(_fmt(row[col]) for col in TRACE_COLUMNS))
    return "\n".join(lines) + "\n"


def render_efe_csv(trace: Sequence[StepRecord]) -> str:
    lines = [",".join(EFE_COLUMNS)]
    for record in trace:
        for agent_name in ("thermostat", "battery"):
            info = getattr(record, agent_name)
            lines.append(",".join(_fmt(v) for v in (
                record.step, record.hour, agent_name,
                -info.efe_selected, -info.efe_max, -info.efe_mean, -info.efe_min,
                info.feasible_policies,
            )))
    return "\n".join(lines) + "\n"


def render_metrics_json(metrics: Metrics) -> str:
    return json.dumps(metrics.to_dict(), indent=2, sort_keys=True) + "\n"


def write_outputs(out_dir: Path, trace: Sequence[StepRecord], metrics: Metrics) -> None:
    _atomic_write(out_dir / "trace.csv", render_trace_csv(trace))
    _atomic_write(out_dir / "efe.csv", render_efe_csv(trace))
    _atomic_write(out_dir / "metrics.json", render_metrics_json(metrics))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hemsim",
        description="Active-inference household energy management simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, with_out: bool = True) -> None:
        p.add_argument("--config", required=True, help="scenario config (JSON)")
        p.add_argument("--days", type=int, default=None, help="override simulated days")
        p.add_argument("--horizon", type=int, default=None, help="override planning horizon")
        p.add_argument("--learn", action="store_true", default=None,
                       help="learn the room-temperature dynamics from a flat prior")
        p.add_argument("--seed", type=int, default=None, help="override the random seed")
        if with_out:
            p.add_argument("--out", required=True, help="output directory")

    run_p = sub.add_parser("run", help="simulate and write trace.csv, efe.csv, metrics.json")
    add_common(run_p)

    val_p = sub.add_parser("validate", help="check the config and its input data")
    add_common(val_p, with_out=False)

    sweep_p = sub.add_parser("sweep", help="run the scenario at several horizons")
    add_common(sweep_p)
    sweep_p.add_argument("--horizons", required=True,
                         help="comma-separated horizons, e.g. 4,6")
    return parser


def _load(args) -> tuple[ScenarioConfig, list]:
    cfg = load_config(args.config)
    cfg = apply_overrides(
        cfg, days=args.days, horizon=args.horizon, learn=args.learn, seed=args.seed
    )
    with open(cfg.input_csv, newline="") as handle:
        rows = load_timeseries(handle)
    return cfg, rows


def _cmd_run(args) -> int:
    cfg, rows = _load(args)
    trace, metrics = run_simulation(cfg, rows)
    write_outputs(Path(args.out), trace, metrics)
    print(f"wrote {len(trace)} steps to {args.out}")
    return 0


def _cmd_validate(args) -> int:
    cfg, rows = _load(args)
    print(f"ok: {cfg.days} days, horizon {cfg.horizon}, {len(rows)} input rows")
    return 0


def _cmd_sweep(args) -> int:
    try:
        horizons = [int(h) for h in args.horizons.split(",") if h.strip()]
    except ValueError:
        raise ConfigError("--horizons must be a comma-separated list of integers") from None
    if not horizons:
        raise ConfigError("--horizons must name at least one horizon")
    cfg, rows = _load(args)
    out_root = Path(args.out)
    summary = []
    for horizon in horizons:
        run_cfg = apply_overrides(cfg, horizon=horizon)
        trace, metrics = run_simulation(run_cfg, rows)
        write_outputs(out_root / f"horizon_{horizon}", trace, metrics)
        high_steps = [r for r in trace if r.tou_high]
        summary.append({
            "horizon": horizon,
            "high_tou_steps": len(high_steps),
            "high_tou_discharge_steps": sum(
                1 for r in high_steps if r.battery.action == "discharge"
            ),
            "max_soc": max(r.soc for r in trace),
            "total_cost": metrics.total_cost,
            "total_emissions_kg": metrics.total_emissions_kg,
            "daily_avg_deviation_c": metrics.daily_avg_deviation_c,
        })
    _atomic_write(out_root / "sweep.json", json.dumps(summary, indent=2) + "\n")
    print(f"swept horizons {', '.join(str(h) for h in horizons)} into {out_root}")
    return 0


def run_command(argv: Sequence[str]) -> int:
    """Parse arguments and execute; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {"run": _cmd_run, "validate": _cmd_validate, "sweep": _cmd_sweep}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except HemsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
