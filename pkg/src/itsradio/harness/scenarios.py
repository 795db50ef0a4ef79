"""Scenario runners: one pipeline per mode, deterministic CSV outputs and a
JSON summary of the headline metrics."""

from __future__ import annotations

import dataclasses
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .. import __version__
from ..channel import (
    correlated_branch,
    rayleigh_fade_trace,
    two_path_response,
    write_fade_csv,
)
from ..commlink import burst_seed, jamming_margin_curve, processing_gain_db, run_link, write_margin_csv
from ..csvio import write_csv
from ..diversity import (
    RegionLabel,
    RssiTrace,
    classify_regions,
    region_intervals,
    selection_outage_probability,
    spatial_separation_report,
    write_regions_csv,
)
from ..radar import (
    estimate_nearest,
    max_unambiguous_range,
    receive_pair,
    target_channel,
    write_range_csv,
)
from ..signal import DEFAULT_START_MARKER, Frame, make_hop_plan, spread
from .config import ConfigError, ScenarioConfig

__all__ = [
    "ScenarioError",
    "RunArtifacts",
    "PrtRow",
    "run_scenario",
    "prt_sweep",
    "list_scenarios",
    "load_scenario",
]


class ScenarioError(RuntimeError):
    def __init__(self, scenario: str, message: str):
        self.scenario = scenario
        super().__init__(f"scenario {scenario!r}: {message}")
        self.message = message

    def as_dict(self) -> dict:
        return {"error": "simulation failed", "scenario": self.scenario, "detail": self.message}


@dataclass
class RunArtifacts:
    out_dir: Path
    files: list[Path] = field(default_factory=list)
    summary: dict = field(default_factory=dict)


class PrtRow(NamedTuple):
    prt_s: float
    valid: bool
    max_unambiguous_range_m: float
    ranging_error_m: float | None
    detections: int
    trials: int


# -- bundled scenarios --------------------------------------------------------


def _scenario_dir():
    return resources.files("itsradio") / "scenarios"


def list_scenarios() -> list[str]:
    return sorted(p.name[: -len(".yaml")] for p in _scenario_dir().iterdir() if p.name.endswith(".yaml"))


def load_scenario(name: str) -> ScenarioConfig:
    path = _scenario_dir() / f"{name}.yaml"
    if not path.is_file():
        raise ConfigError(name, [f"name: no bundled scenario called {name!r}"])
    import yaml

    return ScenarioConfig.from_dict(yaml.safe_load(path.read_text()))


# -- helpers --------------------------------------------------------------------


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, RegionLabel):
        return v.value
    return v


def _write_json(path: Path, data: dict) -> Path:
    text = json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n"
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)
    return path


def _meta(cfg: ScenarioConfig, seed: int) -> dict:
    return {"config": cfg.name, "seed": seed, "version": __version__}


def _frame(cfg: ScenarioConfig) -> Frame:
    return Frame(code=cfg.build_code(), start_marker=tuple(cfg.params.get("start_marker", DEFAULT_START_MARKER)))


# -- mode pipelines ---------------------------------------------------------------


def _run_fading(cfg: ScenarioConfig, seed: int, out: Path, plot: bool):
    p = cfg.params
    code, timing = cfg.build_code(), cfg.build_timing()
    model = cfg.build_channel(code, timing)
    fd, dur, dt = float(p["doppler_hz"]), float(p["duration_s"]), float(p["sample_interval_s"])
    thr = float(p.get("fade_threshold_db", 10.0))
    ga = rayleigh_fade_trace(fd, dur, dt, seed)
    gb = correlated_branch(ga, rayleigh_fade_trace(fd, dur, dt, burst_seed(seed, 1)), model.antenna_decorrelation)
    # RSSI is measured on the preamble of each burst
    pre = spread(DEFAULT_START_MARKER, code, timing.samples_per_chip).samples
    rng = np.random.default_rng([seed, 2])
    sigma = math.sqrt(model.noise_psd / 2)

    def measure(g):
        rx = g[:, None] * pre[None, :]
        if sigma:
            rx = rx + sigma * (rng.standard_normal(rx.shape) + 1j * rng.standard_normal(rx.shape))
        return 10 * np.log10(np.mean(np.abs(rx) ** 2, axis=1))

    ra, rb = measure(ga), measure(gb)
    sel = np.where(rb > ra, 1, 0)
    rs = np.where(sel == 1, rb, ra)
    t = np.arange(ga.size) * dt
    meta = _meta(cfg, seed)
    files = [out / f"fade_trace_seed{seed}.csv", out / f"rssi_seed{seed}.csv"]
    write_fade_csv(ga, dt, files[0], meta)
    write_csv(
        files[1],
        ["time_s", "rssi_a_db", "rssi_b_db", "selected_antenna", "selected_db"],
        zip(t, ra, rb, sel, rs),
        meta,
    )
    ref = np.median(ra)
    p_single, p_sel = selection_outage_probability(-thr, int(p.get("n_trials", 10_000)), model.antenna_decorrelation, seed)
    summary = {
        "rssi_span_db": float(ra.max() - ra.min()),
        "mean_power_a": float(np.mean(np.abs(ga) ** 2)),
        "outage_time_a": float(np.mean(ra < ref - thr)),
        "outage_time_b": float(np.mean(rb < ref - thr)),
        "outage_time_selected": float(np.mean(rs < ref - thr)),
        "antenna_b_share": float(sel.mean()),
        "p_single": p_single,
        "p_selected": p_sel,
    }
    if "antenna_separation_m" in p:
        rep = spatial_separation_report(float(p["antenna_separation_m"]), float(cfg.carriers_hz[0]))
        summary["separation"] = rep._asdict()
    if plot:
        from .. import plotting

        files.append(plotting.plot_rssi(t, ra, rb, rs, out / f"rssi_seed{seed}.png", title=cfg.name))
    return files, summary


def _run_region(cfg: ScenarioConfig, seed: int, out: Path, plot: bool):
    p = cfg.params
    f_lo, f_hi = sorted(float(f) for f in cfg.carriers_hz)
    g1, g2 = p.get("path_gains", [1.0, 0.97])
    dur, dt = float(p["duration_s"]), float(p["sample_interval_s"])
    period = float(p.get("period_s", dur))
    centre, swing = float(p["delta_tau_center_s"]), float(p["delta_tau_swing_s"])
    t = np.arange(int(round(dur / dt))) * dt
    dtau = centre + swing * np.sin(2 * np.pi * t / period)
    rng = np.random.default_rng([seed, 3])
    jitter = float(p.get("jitter_db", 0.0))

    def level(f):
        lv = 20 * np.log10(np.maximum(two_path_response(f, g1, 0.0, g2, dtau), 1e-12))
        return lv + jitter * rng.standard_normal(t.size) if jitter else lv

    lo, hi = RssiTrace(t, level(f_lo)), RssiTrace(t, level(f_hi))
    labels = classify_regions(lo, hi, float(p.get("fade_threshold_db", 10.0)))
    path = out / f"regions_seed{seed}.csv"
    write_regions_csv(lo, hi, labels, path, _meta(cfg, seed))
    runs = region_intervals(labels)
    counts = {lab.value: 0 for lab in RegionLabel}
    for _, lab in labels:
        counts[lab.value] += 1
    summary = {
        "carriers_hz": [f_lo, f_hi],
        "region_fraction": {k: v / len(labels) for k, v in counts.items()},
        "region_duration_s": {k: v * dt for k, v in counts.items()},
        "intervals": [[r.value, a, b] for r, a, b in runs if r is not RegionLabel.I],
        "fade_depth_lo_db": float(np.median(lo.levels_db) - lo.levels_db.min()),
        "fade_depth_hi_db": float(np.median(hi.levels_db) - hi.levels_db.min()),
    }
    files = [path]
    if plot:
        from .. import plotting

        files.append(plotting.plot_regions(t, lo.levels_db, hi.levels_db, labels, (f_lo, f_hi), out / f"regions_seed{seed}.png"))
    return files, summary


def _run_jamming(cfg: ScenarioConfig, seed: int, out: Path, plot: bool):
    p = cfg.params
    code, timing = cfg.build_code(), cfg.build_timing()
    hop = None
    if "hopping" in p:
        h = p["hopping"]
        hop = make_hop_plan(int(h["n_channels"]), float(h.get("dwell_s", 1e-3)), seed)
    kwargs = dict(
        n_bits=int(p.get("n_bits", 5000)),
        ebn0_db=float(p.get("ebn0_db", 20.0)),
        timing=timing,
        jammer_kind=p.get("jammer_kind"),
        hop_plan=hop,
    )
    curve = jamming_margin_curve(code, [float(x) for x in p["offsets_hz"]], float(p.get("ber_ceiling", 1e-2)), seed, **kwargs)
    path = out / f"jamming_margin_seed{seed}.csv"
    write_margin_csv(curve, path, _meta(cfg, seed))
    summary = {
        "code_length": code.length,
        "processing_gain_db": processing_gain_db(code.length),
        "margin_db": {repr(o): m for o, m in curve},
        "hopping_channels": len(hop.carriers_hz) if hop else 0,
    }
    files = [path]
    if plot:
        from .. import plotting

        files.append(plotting.plot_margin(curve, out / f"jamming_margin_seed{seed}.png", title=cfg.name))
    return files, summary


def _radar_model(cfg: ScenarioConfig, ranges: Sequence[float], gains=None):
    base = cfg.build_channel()
    return target_channel(ranges, gains, base.noise_psd, base.fading, base.antenna_decorrelation)


def _run_radar(cfg: ScenarioConfig, seed: int, out: Path, plot: bool):
    p = cfg.params
    timing = cfg.build_timing()
    frame = _frame(cfg)
    ranges = [float(r) for r in p["target_ranges_m"]]
    model = _radar_model(cfg, ranges, p.get("target_gains"))
    n = int(p.get("n_bursts", 20))
    listen = p.get("listen_samples")
    rows = []
    for b in range(n):
        ra, rb = receive_pair(frame, timing, model, float(cfg.carriers_hz[0]), burst_seed(seed, b), listen)
        rows.append((b * timing.prt_s, estimate_nearest(ra, rb, frame, timing)))
    path = out / f"ranges_seed{seed}.csv"
    write_range_csv(rows, path, _meta(cfg, seed))
    hits = [e for _, e in rows if e.detected]
    truth = min(ranges) if ranges else None
    summary = {
        "bursts": n,
        "detection_rate": len(hits) / n,
        "nearest_true_range_m": truth,
        "mean_abs_range_error_m": float(np.mean([abs(e.range_m - truth) for e in hits])) if hits and truth is not None else None,
        "mean_rejected_peaks": float(np.mean([e.rejected_peaks for e in hits])) if hits else None,
        "antenna_1_share": float(np.mean([e.antenna_used for e in hits])) if hits else None,
        "range_resolution_m": timing.range_resolution_m,
    }
    files = [path]
    if plot:
        from .. import plotting

        files.append(plotting.plot_ranges(rows, ranges, out / f"ranges_seed{seed}.png", title=cfg.name))
    return files, summary


def _run_comm(cfg: ScenarioConfig, seed: int, out: Path, plot: bool):
    p = cfg.params
    code, timing = cfg.build_code(), cfg.build_timing()
    model = cfg.build_channel(code, timing)
    bits = np.random.default_rng([seed, 5]).integers(0, 2, int(p["n_bits"]))
    burst = int(p.get("burst_bits", 100))
    carrier = float(cfg.carriers_hz[0])
    results = {
        "selection": run_link(bits, code, model, timing, seed, carrier_hz=carrier, burst_bits=burst, diversity=True),
        "single": run_link(bits, code, model, timing, seed, carrier_hz=carrier, burst_bits=burst, diversity=False),
    }
    path = out / f"link_seed{seed}.csv"
    write_csv(
        path,
        ["receiver", "bits_sent", "bit_errors", "ber", "snr_db"],
        ((k, r.bits_sent, r.bit_errors, r.ber, r.snr_db) for k, r in results.items()),
        _meta(cfg, seed),
    )
    summary = {f"ber_{k}": r.ber for k, r in results.items()}
    summary["snr_db"] = results["single"].snr_db
    summary["bits"] = int(bits.size)
    return [path], summary


def prt_sweep(prt_values_s: Sequence[float], base_config: ScenarioConfig, seed: int | None = None) -> list[PrtRow]:
    """Validity, unambiguous range and Monte Carlo ranging error per PRT.

    Each trial listens for one full PRT. A target beyond the unambiguous
    range of a PRT is not ranged for it.
    """
    if any(not prt > 0 for prt in prt_values_s):
        raise ValueError("PRT values must be positive")
    seed = base_config.seeds[0] if seed is None else seed
    p = base_config.params
    target = float(p["target_range_m"])
    trials = int(p.get("n_trials", 20))
    frame = _frame(base_config)
    base_timing = base_config.build_timing()
    model = _radar_model(base_config, [target])
    carrier = float(base_config.carriers_hz[0])
    rows = []
    for prt in prt_values_s:
        timing = dataclasses.replace(base_timing, prt_s=float(prt))
        unamb = max_unambiguous_range(float(prt))
        errors = []
        n_done = 0
        if target < unamb.range_m:
            n_done = trials
            for k in range(trials):
                ra, rb = receive_pair(frame, timing, model, carrier, burst_seed(seed, k))
                est = estimate_nearest(ra, rb, frame, timing)
                if est.detected:
                    errors.append(abs(est.range_m - target))
        err = float(np.mean(errors)) if errors else None
        rows.append(PrtRow(float(prt), unamb.valid, unamb.range_m, err, len(errors), n_done))
    return rows


def _run_prt(cfg: ScenarioConfig, seed: int, out: Path, plot: bool):
    rows = prt_sweep([float(x) for x in cfg.params["prt_values_s"]], cfg, seed)
    path = out / f"prt_sweep_seed{seed}.csv"
    write_csv(
        path,
        ["prt_s", "valid", "max_unambiguous_range_m", "ranging_error_m", "detections", "trials"],
        rows,
        _meta(cfg, seed),
    )
    summary = {
        "valid_prt_s": [r.prt_s for r in rows if r.valid],
        "invalid_prt_s": [r.prt_s for r in rows if not r.valid],
        "max_unambiguous_range_m": {repr(r.prt_s): r.max_unambiguous_range_m for r in rows},
        "ranging_error_m": {repr(r.prt_s): r.ranging_error_m for r in rows},
    }
    files = [path]
    if plot:
        from .. import plotting

        files.append(plotting.plot_prt(rows, out / f"prt_sweep_seed{seed}.png", title=cfg.name))
    return files, summary


_PIPELINES: dict[str, Callable] = {
    "fading_demo": _run_fading,
    "region_demo": _run_region,
    "jamming_demo": _run_jamming,
    "radar": _run_radar,
    "comm": _run_comm,
    "prt_sweep": _run_prt,
}


def run_scenario(config: ScenarioConfig, out_dir=None, plot: bool = False) -> RunArtifacts:
    """Run every seed of a validated scenario and write its artifacts.

    Files land in ``<out_dir or config.output_path>/<name>/``; the summary
    goes to ``summary.json`` beside the CSVs.
    """
    config.validate()
    out = Path(out_dir if out_dir is not None else config.output_path) / config.name
    arts = RunArtifacts(out)
    per_seed = {}
    pipeline = _PIPELINES[config.mode]
    for seed in config.seeds:
        try:
            files, summary = pipeline(config, seed, out, plot)
        except (ValueError, KeyError, TypeError, ArithmeticError) as exc:
            raise ScenarioError(config.name, f"seed {seed}: {exc}") from exc
        arts.files.extend(files)
        per_seed[str(seed)] = summary
    arts.summary = {"name": config.name, "mode": config.mode, "version": __version__, "seeds": per_seed}
    arts.files.append(_write_json(out / "summary.json", arts.summary))
    return arts
