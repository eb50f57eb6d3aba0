"""End-to-end acceptance checks for the shipped scenarios.

Each test covers one acceptance criterion and prints a single PASS/FAIL
verdict line directly to the terminal (bypassing pytest capture) before
asserting, so a plain ``pytest -v`` run shows every verdict.

The expensive runs are shared through module-scoped fixtures: the reference
two-day scenario is executed through the CLI exactly as a user would, the
40-day learning scenario through the orchestrator.
"""
import csv
import dataclasses
import json
import math
import time
from pathlib import Path
from types import SimpleNamespace

import numpy as np
import pytest

from hemsim.cli import run_command
from hemsim.config import load_config
from hemsim.domain import build_battery_model, build_thermostat_model
from hemsim.environment import load_timeseries
from hemsim.inference import enumerate_policies, evaluate_policies
from hemsim.inference import distributions
from hemsim.orchestrator import run_simulation

from oracles import oracle_policy_scores, random_chain_model, random_model

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


def report(capsys, label: str, ok: bool, detail: str) -> None:
    with capsys.disabled():
        print(f"{'PASS' if ok else 'FAIL'} {label}: {detail}")
    assert ok, f"{label}: {detail}"


def load_rows(config_path: Path):
    cfg = load_config(config_path)
    with open(cfg.input_csv, newline="") as handle:
        return cfg, load_timeseries(handle)


@pytest.fixture(scope="module")
def reference_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("reference")
    start = time.perf_counter()
    code = run_command(
        ["run", "--config", str(CONFIG_DIR / "reference.json"), "--out", str(out)]
    )
    elapsed = time.perf_counter() - start
    assert code == 0
    with open(out / "trace.csv", newline="") as handle:
        rows = list(csv.DictReader(handle))
    metrics = json.loads((out / "metrics.json").read_text())
    return SimpleNamespace(out=out, rows=rows, metrics=metrics, elapsed=elapsed)


@pytest.fixture(scope="module")
def learning_run():
    cfg, rows = load_rows(CONFIG_DIR / "learning.json")
    start = time.perf_counter()
    _, learned = run_simulation(cfg, rows)
    elapsed = time.perf_counter() - start
    _, known = run_simulation(dataclasses.replace(cfg, learn=False), rows)
    return SimpleNamespace(learned=learned, known=known, elapsed=elapsed)


def test_efe_decomposition_identity_and_trajectory_oracle(capsys):
    rng = np.random.default_rng(2026)
    start = time.perf_counter()
    worst_identity = 0.0
    worst_oracle = 0.0
    oracle_models = 0
    for index in range(1000):
        if index % 2:
            # broad family: identity must hold for any model
            model, beliefs, forecast = random_model(rng)
            totals, parts = evaluate_policies(model, beliefs, forecast)
            finite = np.isfinite(totals)
            if finite.any():
                gap = np.abs(
                    parts[finite, 0] + parts[finite, 1]
                    + parts[finite, 2] + parts[finite, 3]
                )
                worst_identity = max(worst_identity, float(gap.max()))
        else:
            # chain family: the exact joint oracle applies, horizon <= 2
            horizon = int(rng.integers(1, 3))
            model, beliefs, forecast = random_chain_model(rng, horizon=horizon)
            totals, parts = evaluate_policies(model, beliefs, forecast)
            want = oracle_policy_scores(model, beliefs, forecast)
            oracle_models += 1
            for i in range(len(totals)):
                if math.isinf(totals[i]):
                    assert math.isinf(want[i])
                    continue
                worst_oracle = max(worst_oracle, abs(totals[i] - want[i]))
                r, a, ig, eu = parts[i]
                worst_identity = max(worst_identity, abs(r + a + ig + eu))
    elapsed = time.perf_counter() - start
    ok = worst_identity <= 1e-9 and worst_oracle <= 1e-9 and elapsed < 30.0
    report(
        capsys,
        "efe-decomposition",
        ok,
        f"1000 models ({oracle_models} oracle-checked), "
        f"identity gap {worst_identity:.2e}, oracle gap {worst_oracle:.2e}, "
        f"{elapsed:.1f}s",
    )


def test_normalization_and_softmax_shift_invariance(capsys):
    categorical_devs = []
    slice_devs = []
    original_categorical = distributions.Categorical.__post_init__
    original_table = distributions.ConditionalTable.__post_init__

    def categorical_hook(self):
        original_categorical(self)
        categorical_devs.append(abs(float(self.probs.sum()) - 1.0))

    def table_hook(self):
        original_table(self)
        slice_devs.append(float(np.abs(self.entries.sum(axis=0) - 1.0).max()))

    distributions.Categorical.__post_init__ = categorical_hook
    distributions.ConditionalTable.__post_init__ = table_hook
    try:
        cfg, rows = load_rows(CONFIG_DIR / "reference.json")
        run_simulation(cfg, rows)
        learn_cfg, learn_rows = load_rows(CONFIG_DIR / "learning.json")
        run_simulation(dataclasses.replace(learn_cfg, days=2), learn_rows)
    finally:
        distributions.Categorical.__post_init__ = original_categorical
        distributions.ConditionalTable.__post_init__ = original_table

    rng = np.random.default_rng(7)
    worst_shift = 0.0
    worst_sum = 0.0
    for _ in range(300):
        logits = rng.normal(0.0, 5.0, int(rng.integers(2, 30)))
        if rng.random() < 0.3:
            logits[rng.integers(logits.size)] = -np.inf
        probs = distributions.stable_softmax(logits)
        shifted = distributions.stable_softmax(logits + rng.normal(0.0, 50.0))
        worst_shift = max(worst_shift, float(np.abs(probs - shifted).max()))
        worst_sum = max(worst_sum, abs(float(probs.sum()) - 1.0))

    worst_cat = max(categorical_devs)
    worst_slice = max(slice_devs)
    ok = (
        len(categorical_devs) > 1000
        and len(slice_devs) > 50
        and worst_cat <= 1e-12
        and worst_slice <= 1e-12
        and worst_shift <= 1e-12
        and worst_sum <= 1e-12
    )
    report(
        capsys,
        "normalization",
        ok,
        f"{len(categorical_devs)} categoricals (max dev {worst_cat:.2e}), "
        f"{len(slice_devs)} tables (max slice dev {worst_slice:.2e}), "
        f"softmax shift gap {worst_shift:.2e}",
    )


def test_policy_enumeration_count(capsys):
    cfg = load_config(CONFIG_DIR / "reference.json")
    assert cfg.horizon == 6
    thermostat = build_thermostat_model(cfg)
    battery = build_battery_model(cfg)
    counts = (
        len(thermostat.policies),
        len(battery.policies),
        len(enumerate_policies(3, 6)),
    )
    ok = counts == (729, 729, 729)
    report(capsys, "policy-count", ok, f"horizon 6, 3 actions -> {counts} policies")


def test_tou_dispatch_discipline(reference_run, capsys):
    rows = reference_run.rows
    charge_violations = sum(
        1 for r in rows if r["battery_action"] == "charge" and r["tou_high"] != "0"
    )
    discharge_violations = sum(
        1 for r in rows if r["battery_action"] == "discharge" and r["tou_high"] != "1"
    )
    soc_values = [float(r["soc_start"]) for r in rows] + [float(r["soc"]) for r in rows]
    soc_ok = all(0.2 - 1e-9 <= s <= 0.8 + 1e-9 for s in soc_values)
    charges = sum(1 for r in rows if r["battery_action"] == "charge")
    discharges = sum(1 for r in rows if r["battery_action"] == "discharge")
    ok = (
        charge_violations == 0
        and discharge_violations == 0
        and charges > 0
        and discharges > 0
        and soc_ok
        and reference_run.elapsed < 60.0
    )
    report(
        capsys,
        "tou-dispatch",
        ok,
        f"{charges} charges all low-ToU, {discharges} discharges all high-ToU, "
        f"SoC in [{min(soc_values):.2f}, {max(soc_values):.2f}], "
        f"{reference_run.elapsed:.1f}s",
    )


def evening_windows(trace):
    """Per-day maximal runs of consecutive high-ToU steps of length three."""
    per_day = {}
    for record in trace:
        per_day.setdefault(record.day, []).append(record)
    windows = []
    for records in per_day.values():
        current = []
        for record in records:
            if record.tou_high:
                current.append(record)
            else:
                if len(current) == 3:
                    windows.append(current)
                current = []
        if len(current) == 3:
            windows.append(current)
    return windows


def test_horizon_sensitivity(capsys):
    cfg, rows = load_rows(CONFIG_DIR / "three_hour_tou.json")
    trace_h6, _ = run_simulation(cfg, rows)
    trace_h4, _ = run_simulation(dataclasses.replace(cfg, horizon=4), rows)

    windows_h6 = evening_windows(trace_h6)
    windows_h4 = evening_windows(trace_h4)
    assert windows_h6 and len(windows_h6) == len(windows_h4)

    full_before_window = all(
        abs(w[0].soc_start - 0.8) <= 1e-9 for w in windows_h6
    )
    h6_discharges = sum(
        1 for w in windows_h6 for r in w if r.battery.action == "discharge"
    )
    h4_discharges = sum(
        1 for w in windows_h4 for r in w if r.battery.action == "discharge"
    )
    all_window_steps = sum(len(w) for w in windows_h6)
    ok = (
        full_before_window
        and h6_discharges == all_window_steps
        and h4_discharges < h6_discharges
    )
    report(
        capsys,
        "horizon-sensitivity",
        ok,
        f"three-step windows: horizon 6 enters at SoC 0.8 and discharges "
        f"{h6_discharges}/{all_window_steps}, horizon 4 only {h4_discharges}",
    )


def test_comfort_and_action_compliance(reference_run, capsys):
    ratio = reference_run.metrics["deviation_ratio"]
    compliant = 0
    for r in reference_run.rows:
        start = float(r["room_temp_start_c"])
        target = float(r["target_temp_c"])
        action = r["thermostat_action"]
        if action == "heat":
            compliant += start < target
        elif action == "cool":
            compliant += start > target
        else:
            compliant += 1
    share = compliant / len(reference_run.rows)
    ok = ratio <= 0.6 and share >= 0.95
    report(
        capsys,
        "comfort",
        ok,
        f"deviation ratio {ratio:.3f} (limit 0.6), "
        f"action compliance {share:.0%} (limit 95%)",
    )


def test_learning_convergence(learning_run, capsys):
    learned = learning_run.learned
    known = learning_run.known
    final_learned = learned.per_day_deviation_c[-1]
    final_known = known.per_day_deviation_c[-1]
    within_band = abs(final_learned - final_known) <= 0.05 * final_known

    neg_efe = learned.per_day_mean_neg_efe["thermostat"]
    early = sum(neg_efe[0:5]) / 5.0
    late = sum(neg_efe[35:40]) / 5.0
    ok = (
        learned.days == 40
        and within_band
        and late > early
        and learning_run.elapsed < 600.0
    )
    report(
        capsys,
        "learning",
        ok,
        f"day-40 deviation {final_learned:.2f} vs known {final_known:.2f} "
        f"(5% band), mean -G days 36-40 {late:.2f} > days 1-5 {early:.2f}, "
        f"{learning_run.elapsed:.0f}s",
    )


def test_deterministic_trace_bytes(reference_run, tmp_path_factory, capsys):
    out = tmp_path_factory.mktemp("repeat")
    code = run_command(
        ["run", "--config", str(CONFIG_DIR / "reference.json"), "--out", str(out)]
    )
    assert code == 0
    first = (reference_run.out / "trace.csv").read_bytes()
    second = (out / "trace.csv").read_bytes()
    ok = first == second
    report(
        capsys,
        "determinism",
        ok,
        f"two runs, trace.csv {len(first)} bytes, byte-identical: {ok}",
    )
