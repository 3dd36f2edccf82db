"""Scenario orchestration: single runs, paired quantum/classical runs, and
parameter sweeps. All file output happens here.

Every output directory receives a verbatim copy of the originating config
(`config.cfg`) so results are reproducible from the directory alone.
Numeric CSV cells use the shortest round-trip float representation.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import RunConfig, SweepConfig
from .diagnostics import (
    BreakdownResult,
    TrajectoryRecord,
    breakdown_time,
    contracting_width,
    divergence,
    entropy_rate_fit,
)
from .errors import WignerLabError
from .estimators import classical_lyapunov
from .fields import WignerField, l2_distance
from .potentials import Free, Inverted
from .propagators import ObserverSpec, evolve
from .snapshots import save_snapshot, write_pgm
from .states import CatSpec, make_state

MOMENT_THRESHOLD = 0.1       # relative <x^2> divergence defining breakdown
RATIO_THRESHOLD = 1.0        # first-correction ratio crossing


class PartialSweepError(WignerLabError):
    """Some sweep members failed; partial results were written."""


def _write_csv(path: str, names: list[str], columns: list[np.ndarray]) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(",".join(names) + "\n")
        for i in range(len(columns[0])):
            fh.write(",".join(repr(float(col[i])) for col in columns) + "\n")


def _write_sidecar(out_dir: str, config: RunConfig) -> None:
    with open(os.path.join(out_dir, "config.cfg"), "w", encoding="utf-8") as fh:
        fh.write(config.raw_text)


def _snapshot_sink(out_dir: str, heatmap: bool):
    def sink(step: int, time: float, field: WignerField) -> None:
        base = os.path.join(out_dir, f"snap_{step:08d}.wig")
        save_snapshot(field, base, time)
        if heatmap:
            write_pgm(field, base[:-4] + ".pgm")

    return sink


def run(config: RunConfig, out_dir: str, collect_fields: bool = False, verbose: bool = False):
    """Execute one configured run; returns (record, collected fields)."""
    os.makedirs(out_dir, exist_ok=True)
    _write_sidecar(out_dir, config)
    field = make_state(config.grid, config.state)
    collected: list[WignerField] = []
    # the correction ratio is undefined for a force-free model (the
    # classical term it is compared against vanishes identically)
    obs = ObserverSpec(correction_ratio=not isinstance(config.potential, Free))
    if isinstance(config.state, CatSpec):
        fringe_mode = config.state.separation / config.grid.hbar
        if fringe_mode <= float(np.abs(config.grid.s).max()):
            obs.fringe_separation = config.state.separation
    if config.outputs.snapshot_every > 0:
        obs.snapshot_every = config.outputs.snapshot_every
        disk_sink = _snapshot_sink(out_dir, config.outputs.heatmap)
        if collect_fields:
            def sink(step, time, f):
                disk_sink(step, time, f)
                collected.append(f)
            obs.snapshot_sink = sink
        else:
            obs.snapshot_sink = disk_sink
    elif collect_fields:
        obs.snapshot_every = config.evolution.n_steps
        obs.snapshot_sink = lambda step, time, f: collected.append(f)
    record = evolve(field, config.potential, config.evolution, obs)
    record.to_csv(os.path.join(out_dir, config.outputs.trajectory_csv))
    if verbose:
        print(f"run: {len(record)} records -> {out_dir}")
    return record, collected


@dataclass
class CompareResult:
    quantum: TrajectoryRecord
    classical: TrajectoryRecord
    divergence: object
    breakdown: dict[str, BreakdownResult]


def compare(
    config: RunConfig,
    out_dir: str,
    verbose: bool = False,
    moment_threshold: float = MOMENT_THRESHOLD,
) -> CompareResult:
    """Paired run: identical initial data evolved with the full quantum
    bracket and with the classical bracket, sharing the environment.
    Emits both trajectories, per-time divergence metrics, and the detected
    breakdown times for the moment and correction-ratio definitions.

    The moment detector thresholds the running maximum (envelope) of the
    relative <x^2> difference: the raw per-time difference of an
    oscillating observable swings through zero with the dynamical phase,
    so its first crossing would be spike noise, while the envelope tracks
    the accumulated dephasing the detector is after.
    """
    os.makedirs(out_dir, exist_ok=True)
    _write_sidecar(out_dir, config)
    cfg_q = config.with_bracket("moyal")
    cfg_c = config.with_bracket("poisson")
    want_fields = config.outputs.snapshot_every > 0
    rec_q, fields_q = run(cfg_q, os.path.join(out_dir, "quantum"), collect_fields=want_fields, verbose=verbose)
    rec_c, fields_c = run(cfg_c, os.path.join(out_dir, "classical"), collect_fields=want_fields, verbose=verbose)

    div = divergence(rec_q, rec_c, fields_q or None, fields_c or None)
    envelope = np.maximum.accumulate(div.rel_mean_x2)
    names = ["time", "rel_mean_x", "rel_mean_x2", "rel_mean_x2_envelope", "rel_mean_p2"]
    cols = [div.times, div.rel_mean_x, div.rel_mean_x2, envelope, div.rel_mean_p2]
    if div.field_l2 is not None and len(div.field_l2) == len(div.times):
        names.append("field_l2")
        cols.append(div.field_l2)
    _write_csv(os.path.join(out_dir, "divergence.csv"), names, cols)

    breakdown = {"moment": breakdown_time(div.times, envelope, moment_threshold)}
    if "correction_ratio" in rec_c.columns:
        breakdown["ratio_classical"] = breakdown_time(
            rec_c.times, rec_c["correction_ratio"], RATIO_THRESHOLD
        )
        breakdown["ratio_quantum"] = breakdown_time(
            rec_q.times, rec_q["correction_ratio"], RATIO_THRESHOLD
        )
    with open(os.path.join(out_dir, "breakdown.json"), "w", encoding="ascii") as fh:
        json.dump(
            {key: {"reached": b.reached, "time": b.time} for key, b in breakdown.items()},
            fh, indent=1,
        )
        fh.write("\n")
    return CompareResult(quantum=rec_q, classical=rec_c, divergence=div, breakdown=breakdown)


# ---------------------------------------------------------------------------
# sweeps


def _member_metrics(
    config: RunConfig, member_dir: str, paired: bool, moment_threshold: float = MOMENT_THRESHOLD
) -> dict:
    metrics: dict = {}
    if paired:
        result = compare(config, member_dir, moment_threshold=moment_threshold)
        for key, b in result.breakdown.items():
            metrics[f"breakdown_{key}"] = b.time
            metrics[f"breakdown_{key}_reached"] = float(b.reached)
        record = result.classical
    else:
        record, _ = run(config, member_dir)
    metrics["final_time"] = float(record.times[-1])
    metrics["final_purity"] = float(record["purity"][-1])
    metrics["final_entropy"] = float(record["linear_entropy"][-1])
    if isinstance(config.potential, Inverted):
        cw = contracting_width(record, config.potential, config.grid.mass)
        metrics["sigma_c_estimate_sq"] = float(cw.sigma_c_estimate[-1] ** 2)
        t1 = record.times[-1]
        fit = entropy_rate_fit(record, (t1 * 5.0 / 6.0, t1))
        metrics["entropy_rate_late"] = fit.rate
    return metrics


def _sweep_member_entry(payload: tuple) -> tuple[int, dict | None, str | None]:
    index, sections_text, parameter, value, paired, member_dir, save_final, moment_threshold = payload
    from .config import build_run_config, parse_sections

    try:
        sections = parse_sections(sections_text)
        base = build_run_config(sections, sections_text)
        config = base.with_override(parameter, value)
        metrics = _member_metrics(config, member_dir, paired, moment_threshold)
        if save_final:
            record, fields = run(config, os.path.join(member_dir, "final_state"), collect_fields=True)
            save_snapshot(fields[-1], os.path.join(member_dir, "final.wig"), record.times[-1])
        return index, metrics, None
    except Exception as exc:  # noqa: BLE001 - member failures become the manifest
        return index, None, f"{type(exc).__name__}: {exc}"


@dataclass
class SweepResult:
    values: list[float]
    metrics: list[dict | None]
    failures: dict[int, str]
    fit_report: str


def _fit_breakdown_slope(values, times) -> tuple[float, float]:
    """OLS slope and its standard error for t vs ln(1/value)."""
    x = np.log(1.0 / np.asarray(values, dtype=float))
    y = np.asarray(times, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    n = len(x)
    if n > 2:
        sxx = ((x - x.mean()) ** 2).sum()
        se = math.sqrt((resid**2).sum() / (n - 2) / sxx)
    else:
        se = math.inf
    return float(slope), float(se)


def sweep(sweep_config: SweepConfig, out_dir: str, parallel: int = 1, verbose: bool = False) -> SweepResult:
    """Run all sweep members (optionally in parallel processes), aggregate
    their metrics, and fit the scaling law appropriate to the parameter.

    Member failures do not stop the sweep: the summary and a failure
    manifest are written, then PartialSweepError is raised.
    """
    os.makedirs(out_dir, exist_ok=True)
    base = sweep_config.base
    with open(os.path.join(out_dir, "config.cfg"), "w", encoding="utf-8") as fh:
        fh.write(base.raw_text)

    save_final = sweep_config.parameter == "dt"
    payloads = [
        (
            i,
            base.raw_text,
            sweep_config.parameter,
            value,
            sweep_config.paired,
            os.path.join(out_dir, f"member_{i:02d}"),
            save_final,
            sweep_config.moment_threshold,
        )
        for i, value in enumerate(sweep_config.values)
    ]
    results: list[dict | None] = [None] * len(payloads)
    failures: dict[int, str] = {}
    if parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            for index, metrics, error in pool.map(_sweep_member_entry, payloads):
                results[index] = metrics
                if error is not None:
                    failures[index] = error
    else:
        for payload in payloads:
            index, metrics, error = _sweep_member_entry(payload)
            results[index] = metrics
            if error is not None:
                failures[index] = error
            if verbose:
                print(f"member {index}: {'ok' if error is None else error}")

    report_lines = [f"sweep parameter: {sweep_config.parameter}", f"values: {sweep_config.values}"]

    ok = [i for i in range(len(results)) if results[i] is not None]
    if sweep_config.parameter == "hbar" and sweep_config.paired and len(ok) >= 2:
        lyap = _sweep_lyapunov(sweep_config)
        if lyap is not None:
            report_lines.append(
                f"classical lyapunov: {lyap.value:.6g} +- {lyap.stderr:.2g}"
                f" ({'low confidence' if lyap.low_confidence else 'clear'})"
            )
            report_lines.append(f"1/lambda: {1.0 / lyap.value:.6g}")
        for detector in ("moment", "ratio_classical", "ratio_quantum"):
            usable = [
                i for i in ok
                if results[i].get(f"breakdown_{detector}_reached", 0.0) == 1.0
            ]
            if len(usable) >= 2:
                slope, se = _fit_breakdown_slope(
                    [sweep_config.values[i] for i in usable],
                    [results[i][f"breakdown_{detector}"] for i in usable],
                )
                report_lines.append(
                    f"breakdown[{detector}]: slope vs ln(1/hbar) = {slope:.6g} +- {se:.2g}"
                    f" over {len(usable)} members"
                )
            else:
                report_lines.append(f"breakdown[{detector}]: not enough crossings to fit")
        robust = _robust_moment_slope(sweep_config, out_dir, ok)
        if robust is not None:
            slope_med, levels = robust
            report_lines.append(
                f"breakdown[moment] robust slope (median over {levels} thresholds): {slope_med:.6g}"
            )

    if sweep_config.parameter == "D" and len(ok) >= 2:
        if isinstance(base.potential, Inverted):
            lam = base.potential.lambda0
            xs = [2.0 * sweep_config.values[i] / lam for i in ok if "sigma_c_estimate_sq" in results[i]]
            ys = [results[i]["sigma_c_estimate_sq"] for i in ok if "sigma_c_estimate_sq" in results[i]]
            if len(xs) >= 2:
                slope = float(np.polyfit(xs, ys, 1)[0])
                report_lines.append(f"sigma_c^2 vs 2D/lambda slope: {slope:.6g}")

    if sweep_config.parameter == "dt" and len(ok) >= 3:
        finest = min(ok, key=lambda i: sweep_config.values[i])
        from .snapshots import load_snapshot

        ref_field, _ = load_snapshot(os.path.join(out_dir, f"member_{finest:02d}", "final.wig"))
        errs, dts = [], []
        for i in ok:
            if i == finest:
                continue
            fld, _ = load_snapshot(os.path.join(out_dir, f"member_{i:02d}", "final.wig"))
            errs.append(l2_distance(fld, ref_field))
            dts.append(sweep_config.values[i])
        if len(errs) >= 2:
            slope = float(np.polyfit(np.log(dts), np.log(errs), 1)[0])
            report_lines.append(f"error vs dt log-log slope: {slope:.6g}")

    # summary CSV: union of metric keys over successful members
    keys = sorted({k for i in ok for k in results[i]})
    names = ["value"] + keys
    columns = [np.asarray([sweep_config.values[i] for i in ok], dtype=float)]
    for key in keys:
        columns.append(np.asarray([results[i].get(key, math.nan) for i in ok], dtype=float))
    if ok:
        _write_csv(os.path.join(out_dir, "summary.csv"), names, columns)

    if failures:
        with open(os.path.join(out_dir, "failures.json"), "w", encoding="ascii") as fh:
            json.dump({str(k): v for k, v in failures.items()}, fh, indent=1)
            fh.write("\n")
        report_lines.append(f"failed members: {sorted(failures)}")

    fit_report = "\n".join(report_lines) + "\n"
    with open(os.path.join(out_dir, "fit_report.txt"), "w", encoding="utf-8") as fh:
        fh.write(fit_report)

    result = SweepResult(
        values=list(sweep_config.values),
        metrics=results,
        failures=failures,
        fit_report=fit_report,
    )
    if failures:
        raise PartialSweepError(
            f"{len(failures)} of {len(payloads)} members failed; partial results in {out_dir}"
        )
    return result


#: multipliers of the configured moment threshold probed by the robust fit
THRESHOLD_BAND = (0.4, 0.5, 0.6, 0.75, 1.0, 1.25, 1.5)


def _robust_moment_slope(sweep_config: SweepConfig, out_dir: str, ok: list[int]):
    """Median breakdown-scaling slope over a band of detector thresholds.

    Any single threshold's crossing times carry the staircase noise of the
    divergence envelope; the scaling slope itself is threshold-independent,
    so the median over a band is a far steadier estimate. Only threshold
    levels crossed by every member enter the median.
    """
    slopes = []
    envelopes = {}
    for i in ok:
        path = os.path.join(out_dir, f"member_{i:02d}", "divergence.csv")
        if not os.path.exists(path):
            return None
        record = TrajectoryRecord.from_csv(path)
        if "rel_mean_x2_envelope" not in record.columns:
            return None
        envelopes[i] = (record.times, record["rel_mean_x2_envelope"])
    for factor in THRESHOLD_BAND:
        theta = sweep_config.moment_threshold * factor
        values, times = [], []
        for i in ok:
            tt, env = envelopes[i]
            b = breakdown_time(tt, env, theta)
            if not b.reached:
                break
            values.append(sweep_config.values[i])
            times.append(b.time)
        else:
            if len(values) >= 2:
                slope, _ = _fit_breakdown_slope(values, times)
                slopes.append(slope)
    if not slopes:
        return None
    return float(np.median(slopes)), len(slopes)


def _sweep_lyapunov(sweep_config: SweepConfig):
    base = sweep_config.base
    opts = sweep_config.lyapunov or {}
    state = base.state
    x0 = opts.get("x0", getattr(state, "x0", 0.0) + getattr(state, "sigma_x", 0.5) / 2)
    p0 = opts.get("p0", getattr(state, "p0", 0.0) + 0.1)
    duration = opts.get("duration", 1000.0)
    dt = opts.get("dt", 2e-3)
    try:
        return classical_lyapunov(
            base.potential, x0, p0, duration, mass=base.grid.mass, dt=dt
        )
    except WignerLabError:
        return None
