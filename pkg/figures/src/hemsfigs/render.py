"""Figure renderers: pure file-to-file transforms over trace.csv/efe.csv.

Each figure id maps to exactly one renderer. A renderer declares the trace
columns it needs, reads the inputs, draws onto a fresh matplotlib figure
under a pinned style, and the result is written atomically. Validation
happens before any output file is touched, so a failed render leaves
nothing behind.
"""
from __future__ import annotations

import io
import os
import tempfile
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .bands import flag_bands
from .errors import SchemaError
from .reading import (
    Row,
    column_flags,
    column_floats,
    column_ints,
    column_labels,
    read_rows,
)

# bump when any styling below changes; identical inputs + version give
# identical bytes
STYLE_VERSION = "1"

STYLE = {
    "figure.dpi": 120,
    "savefig.dpi": 120,
    "font.family": "DejaVu Sans",
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "grid.linewidth": 0.5,
    "lines.linewidth": 1.4,
    "legend.fontsize": 8,
    "axes.titlesize": 9,
    "figure.constrained_layout.use": True,
}

TOU_SHADE = {"color": "tab:red", "alpha": 0.15, "linewidth": 0}
OCCUPANCY_SHADE = {"color": "0.4", "alpha": 0.12, "linewidth": 0}
GHG_SHADE = {"color": "tab:olive", "alpha": 0.18, "linewidth": 0}
GHG_SHADE_THRESHOLD = 0.6  # kg/kWh; shade carbon-intensive supply periods

EFE_COLUMNS = (
    "step", "agent", "neg_efe_selected", "neg_efe_min", "neg_efe_mean",
    "neg_efe_max",
)

THERMOSTAT_ACTIONS = ("off", "heat", "cool")
BATTERY_ACTIONS = ("off", "charge", "discharge")


@dataclass(frozen=True)
class FigureSpec:
    """One render request: which figure, from which files, to which image."""

    figure_id: str
    trace_csv: Path
    out_path: Path
    efe_csv: Path | None = None
    shade_tou: bool = True
    shade_occupancy: bool = True
    shade_ghg: bool = True


@dataclass(frozen=True)
class Renderer:
    draw: Callable[[object, list[Row], list[Row] | None, FigureSpec], None]
    trace_columns: tuple[str, ...]
    figsize: tuple[float, float]
    needs_efe: bool = False


def tou_bands(rows: Sequence[Row]) -> tuple[tuple[int, int], ...]:
    """High-tariff [start, end) step intervals, exactly the tou_high=1 steps."""
    return flag_bands(column_ints(rows, "step"), column_flags(rows, "tou_high"))


def occupancy_bands(rows: Sequence[Row]) -> tuple[tuple[int, int], ...]:
    return flag_bands(column_ints(rows, "step"), column_flags(rows, "occupancy"))


def _shade(ax, bands, style) -> None:
    for start, end in bands:
        ax.axvspan(start, end, **style)


def _mark_days(ax, steps, hours) -> None:
    for step, hour in zip(steps, hours):
        if hour == 0 and step > steps[0]:
            ax.axvline(step, color="0.6", linestyle=":", linewidth=0.7)


def _stairs(ax, steps, values, **kwargs) -> None:
    # extend by one cell so the final step is drawn at full width
    x = np.append(steps, steps[-1] + 1)
    y = np.append(values, values[-1])
    ax.step(x, y, where="post", **kwargs)


def _action_lane(ax, steps, labels, order) -> None:
    codes = np.array([order.index(label) for label in labels])
    _stairs(ax, steps, codes, color="tab:blue")
    ax.set_yticks(range(len(order)), order)
    ax.set_ylim(-0.5, len(order) - 0.5)


def _draw_profile(fig, trace, efe, spec) -> None:
    steps = column_ints(trace, "step")
    hours = column_ints(trace, "hour")
    top, middle, bottom = fig.subplots(3, 1, sharex=True)

    top.plot(steps, column_floats(trace, "outdoor_temp_c"), color="tab:blue")
    top.set_ylabel("outdoor [°C]")
    if spec.shade_occupancy:
        _shade(top, occupancy_bands(trace), OCCUPANCY_SHADE)

    _stairs(middle, steps, column_floats(trace, "solar_kwh"),
            color="tab:orange", label="solar")
    _stairs(middle, steps, column_floats(trace, "baseline_kwh"),
            color="tab:green", label="baseline")
    middle.set_ylabel("input [kWh]")
    middle.legend(loc="upper right")

    _stairs(bottom, steps, column_floats(trace, "tou_rate"), color="tab:red")
    bottom.set_ylabel("tariff [$/kWh]")
    bottom.set_xlabel("step")
    if spec.shade_tou:
        _shade(bottom, tou_bands(trace), TOU_SHADE)
    for ax in (top, middle, bottom):
        _mark_days(ax, steps, hours)
    top.set_title("input profile (shaded: occupancy / high tariff)")


def _draw_efe(fig, trace, efe, spec) -> None:
    agents = list(dict.fromkeys(row["agent"] for row in efe))
    axes = fig.subplots(len(agents), 1, sharex=True, squeeze=False)[:, 0]
    bands = tou_bands(trace) if spec.shade_tou else ()
    for ax, agent in zip(axes, agents):
        rows = [row for row in efe if row["agent"] == agent]
        steps = column_ints(rows, "step")
        ax.fill_between(
            steps,
            column_floats(rows, "neg_efe_min"),
            column_floats(rows, "neg_efe_max"),
            color="tab:blue", alpha=0.2, linewidth=0, label="min..max",
        )
        ax.plot(steps, column_floats(rows, "neg_efe_mean"),
                color="tab:blue", linestyle="--", label="mean")
        ax.plot(steps, column_floats(rows, "neg_efe_selected"),
                color="tab:red", marker=".", markersize=4, label="selected")
        _shade(ax, bands, TOU_SHADE)
        ax.set_ylabel(f"{agent}\n-G")
    axes[0].legend(loc="lower right", ncols=3)
    axes[0].set_title("negative expected free energy across policies")
    axes[-1].set_xlabel("step")


def _draw_temperature(fig, trace, efe, spec) -> None:
    steps = column_ints(trace, "step")
    hours = column_ints(trace, "hour")
    top, bottom = fig.subplots(
        2, 1, sharex=True, height_ratios=(2.2, 1.0)
    )
    top.plot(steps, column_floats(trace, "outdoor_temp_c"),
             color="tab:blue", label="outdoor")
    _stairs(top, steps, column_floats(trace, "room_temp_c"),
            color="tab:red", label="room")
    _stairs(top, steps, column_floats(trace, "target_temp_c"),
            color="0.3", label="target")
    top.set_ylabel("temperature [°C]")
    top.legend(loc="lower right", ncols=3)
    if spec.shade_occupancy:
        _shade(top, occupancy_bands(trace), OCCUPANCY_SHADE)
    _action_lane(bottom, steps,
                 column_labels(trace, "thermostat_action", THERMOSTAT_ACTIONS),
                 THERMOSTAT_ACTIONS)
    bottom.set_xlabel("step")
    for ax in (top, bottom):
        _mark_days(ax, steps, hours)
    top.set_title("room temperature and thermostat actions (shaded: occupancy)")


def _draw_soc(fig, trace, efe, spec) -> None:
    steps = column_ints(trace, "step")
    hours = column_ints(trace, "hour")
    top, bottom = fig.subplots(
        2, 1, sharex=True, height_ratios=(2.0, 1.0)
    )
    # staircase of the state entering each step, closed with the final state
    x = np.append(steps, steps[-1] + 1)
    y = np.append(column_floats(trace, "soc_start"),
                  float(trace[-1]["soc"]))
    top.step(x, y, where="post", color="tab:blue")
    top.set_ylabel("state of charge")
    top.set_ylim(0.0, 1.0)
    _action_lane(bottom, steps,
                 column_labels(trace, "battery_action", BATTERY_ACTIONS),
                 BATTERY_ACTIONS)
    bottom.set_xlabel("step")
    if spec.shade_tou:
        bands = tou_bands(trace)
        _shade(top, bands, TOU_SHADE)
        _shade(bottom, bands, TOU_SHADE)
    for ax in (top, bottom):
        _mark_days(ax, steps, hours)
    top.set_title("battery dispatch (shaded: high tariff)")


def _draw_energy(fig, trace, efe, spec) -> None:
    steps = column_ints(trace, "step")
    hours = column_ints(trace, "hour")
    ax = fig.subplots()
    for name, color in (
        ("baseline_kwh", "tab:green"),
        ("hvac_kwh", "tab:red"),
        ("solar_kwh", "tab:orange"),
        ("battery_kwh", "tab:purple"),
    ):
        _stairs(ax, steps, column_floats(trace, name),
                color=color, label=name.removesuffix("_kwh"))
    _stairs(ax, steps, column_floats(trace, "total_kwh"),
            color="tab:blue", linewidth=2.2, label="total")
    ax.set_xlabel("step")
    ax.set_ylabel("energy [kWh]")
    ax.legend(loc="upper right", ncols=5)
    if spec.shade_tou:
        _shade(ax, tou_bands(trace), TOU_SHADE)
    _mark_days(ax, steps, hours)
    ax.set_title("energy balance per step (shaded: high tariff)")


def _draw_ghg(fig, trace, efe, spec) -> None:
    steps = column_ints(trace, "step")
    hours = column_ints(trace, "hour")
    rates = column_floats(trace, "ghg_rate")
    top, middle, bottom = fig.subplots(3, 1, sharex=True)
    _stairs(top, steps, rates, color="tab:olive")
    top.set_ylabel("intensity\n[kg/kWh]")
    _stairs(middle, steps, column_floats(trace, "emissions_kg"), color="tab:brown")
    middle.set_ylabel("per step\n[kg]")
    bottom.plot(steps, column_floats(trace, "cumulative_emissions_kg"),
                color="tab:brown")
    bottom.set_ylabel("cumulative\n[kg]")
    bottom.set_xlabel("step")
    if spec.shade_ghg:
        bands = flag_bands(steps, rates >= GHG_SHADE_THRESHOLD)
        for ax in (top, middle, bottom):
            _shade(ax, bands, GHG_SHADE)
    for ax in (top, middle, bottom):
        _mark_days(ax, steps, hours)
    top.set_title("emissions (shaded: carbon-intensive supply)")


def _draw_learning(fig, trace, efe, spec) -> None:
    days = column_ints(trace, "day")
    ax = fig.subplots()
    unique_days = np.unique(days)
    for name, color in (
        ("thermostat_neg_efe_selected", "tab:red"),
        ("battery_neg_efe_selected", "tab:blue"),
    ):
        values = column_floats(trace, name)
        means = np.array([values[days == day].mean() for day in unique_days])
        ax.plot(unique_days, means, color=color, marker=".",
                label=name.split("_")[0])
    ax.set_xlabel("day")
    ax.set_ylabel("mean selected -G per day")
    ax.legend(loc="lower right")
    ax.set_title("selected-policy negative expected free energy by day")


RENDERERS: dict[str, Renderer] = {
    "profile": Renderer(
        draw=_draw_profile,
        trace_columns=("step", "hour", "outdoor_temp_c", "solar_kwh",
                       "baseline_kwh", "tou_rate", "tou_high", "occupancy"),
        figsize=(8.0, 6.0),
    ),
    "efe": Renderer(
        draw=_draw_efe,
        trace_columns=("step", "tou_high"),
        figsize=(8.0, 5.0),
        needs_efe=True,
    ),
    "temperature": Renderer(
        draw=_draw_temperature,
        trace_columns=("step", "hour", "outdoor_temp_c", "room_temp_c",
                       "target_temp_c", "thermostat_action", "occupancy"),
        figsize=(8.0, 5.0),
    ),
    "soc": Renderer(
        draw=_draw_soc,
        trace_columns=("step", "hour", "soc_start", "soc", "tou_high",
                       "battery_action"),
        figsize=(8.0, 5.0),
    ),
    "energy": Renderer(
        draw=_draw_energy,
        trace_columns=("step", "hour", "baseline_kwh", "hvac_kwh",
                       "solar_kwh", "battery_kwh", "total_kwh", "tou_high"),
        figsize=(8.0, 4.0),
    ),
    "ghg": Renderer(
        draw=_draw_ghg,
        trace_columns=("step", "hour", "ghg_rate", "emissions_kg",
                       "cumulative_emissions_kg"),
        figsize=(8.0, 6.0),
    ),
    "learning": Renderer(
        draw=_draw_learning,
        trace_columns=("day", "thermostat_neg_efe_selected",
                       "battery_neg_efe_selected"),
        figsize=(8.0, 4.0),
    ),
}

FIGURE_IDS = tuple(sorted(RENDERERS))


def _metadata(fmt: str) -> dict | None:
    if fmt == "png":
        return {"Software": f"hemsfigs {STYLE_VERSION}"}
    if fmt == "svg":
        # drop the embedded timestamp so identical inputs give identical bytes
        return {"Date": None}
    return None


def _write_atomic(path: Path, payload: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(
        dir=path.parent, prefix=path.name + ".", suffix=".tmp"
    )
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(payload)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def render(spec: FigureSpec) -> Path:
    """Render one figure; raises before touching the output path on any error."""
    renderer = RENDERERS.get(spec.figure_id)
    if renderer is None:
        known = ", ".join(FIGURE_IDS)
        raise SchemaError(f"unknown figure id {spec.figure_id!r} (known: {known})")
    trace = read_rows(spec.trace_csv, renderer.trace_columns)
    efe = None
    if renderer.needs_efe:
        if spec.efe_csv is None:
            raise SchemaError(f"figure {spec.figure_id!r} needs an efe.csv path")
        efe = read_rows(spec.efe_csv, EFE_COLUMNS)
    fmt = (spec.out_path.suffix.lstrip(".") or "png").lower()
    with plt.rc_context(STYLE):
        fig = plt.figure(figsize=renderer.figsize)
        try:
            renderer.draw(fig, trace, efe, spec)
            payload = io.BytesIO()
            try:
                fig.savefig(payload, format=fmt, metadata=_metadata(fmt))
            except ValueError as exc:
                raise SchemaError(f"unsupported output format {fmt!r}: {exc}") from None
        finally:
            plt.close(fig)
    _write_atomic(spec.out_path, payload.getvalue())
    return spec.out_path
