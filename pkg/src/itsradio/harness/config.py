"""Scenario configuration: YAML in, validated objects out.

Validation runs before any simulation and reports every problem at once.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from ..channel import ChannelModel, ChannelTap, Interferer, noise_psd_for_chip_snr, noise_psd_for_ebn0
from ..pn_code import ChipSequence, barker13, msequence
from ..radar import RadarTiming, range_to_delay

MODES = ("radar", "comm", "fading_demo", "region_demo", "jamming_demo", "prt_sweep")

# mode -> params keys that must be present
REQUIRED_PARAMS = {
    "radar": ("target_ranges_m",),
    "comm": ("n_bits",),
    "fading_demo": ("doppler_hz", "duration_s", "sample_interval_s"),
    "region_demo": ("delta_tau_center_s", "delta_tau_swing_s", "duration_s", "sample_interval_s"),
    "jamming_demo": ("offsets_hz",),
    "prt_sweep": ("prt_values_s", "target_range_m"),
}


class ConfigError(ValueError):
    """Invalid scenario; ``errors`` lists every offending field."""

    def __init__(self, scenario: str, errors: list[str]):
        self.scenario = scenario
        self.errors = list(errors)
        super().__init__(f"scenario {scenario!r}: " + "; ".join(self.errors))

    def as_dict(self) -> dict:
        return {"error": "invalid config", "scenario": self.scenario, "fields": self.errors}


@dataclass
class ScenarioConfig:
    name: str
    mode: str
    code: dict = field(default_factory=lambda: {"type": "barker13"})
    channel: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)
    carriers_hz: list = field(default_factory=lambda: [5.8e9])
    seeds: list = field(default_factory=lambda: [0])
    output_path: str = "out"
    params: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        if not isinstance(data, dict):
            raise ConfigError("?", ["config: top level must be a mapping"])
        known = {f for f in cls.__dataclass_fields__}
        unknown = sorted(set(data) - known)
        name = str(data.get("name", "") or "?")
        if unknown:
            raise ConfigError(name, [f"{k}: unknown field" for k in unknown])
        cfg = cls(**{k: copy.deepcopy(v) for k, v in data.items()})
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        with Path(path).open() as fh:
            return cls.from_dict(yaml.safe_load(fh))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "mode": self.mode,
            "code": self.code,
            "channel": self.channel,
            "timing": self.timing,
            "carriers_hz": self.carriers_hz,
            "seeds": self.seeds,
            "output_path": self.output_path,
            "params": self.params,
        }

    def dump(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    # -- validation ---------------------------------------------------------

    def validate(self) -> None:
        errs: list[str] = []
        if not isinstance(self.name, str) or not self.name.strip():
            errs.append("name: must be a nonempty string")
        if self.mode not in MODES:
            errs.append(f"mode: must be one of {', '.join(MODES)}")
        if not isinstance(self.seeds, list) or not self.seeds:
            errs.append("seeds: must be a nonempty list of integers")
        elif not all(isinstance(s, int) and not isinstance(s, bool) and s >= 0 for s in self.seeds):
            errs.append("seeds: every seed must be a nonnegative integer")
        if not isinstance(self.carriers_hz, list) or not self.carriers_hz:
            errs.append("carriers_hz: must be a nonempty list")
        elif not all(_is_num(f) and f > 0 for f in self.carriers_hz):
            errs.append("carriers_hz: every carrier must be a positive number")
        if not isinstance(self.params, dict):
            errs.append("params: must be a mapping")
        timing = code = None
        try:
            timing = self.build_timing()
        except (TypeError, ValueError) as exc:
            errs.append(f"timing: {exc}")
        try:
            code = self.build_code()
        except (TypeError, ValueError, KeyError) as exc:
            errs.append(f"code: {exc}")
        if timing is not None and code is not None:
            try:
                self.build_channel(code, timing)
            except (TypeError, ValueError, KeyError) as exc:
                errs.append(f"channel: {exc}")
        if self.mode in MODES and isinstance(self.params, dict):
            for key in REQUIRED_PARAMS[self.mode]:
                if key not in self.params:
                    errs.append(f"params.{key}: required for mode {self.mode}")
            errs.extend(self._mode_checks())
        if errs:
            raise ConfigError(self.name if isinstance(self.name, str) and self.name else "?", errs)

    def _mode_checks(self) -> list[str]:
        p = self.params
        errs = []

        def positive(key):
            if key in p and not (_is_num(p[key]) and p[key] > 0):
                errs.append(f"params.{key}: must be a positive number")

        def num_list(key, minimum=None, strict=False):
            if key not in p:
                return
            v = p[key]
            if not isinstance(v, list) or not v or not all(_is_num(x) for x in v):
                errs.append(f"params.{key}: must be a nonempty list of numbers")
            elif minimum is not None and any((x <= minimum) if strict else (x < minimum) for x in v):
                errs.append(f"params.{key}: values must be {'>' if strict else '>='} {minimum}")

        for key in ("doppler_hz", "duration_s", "sample_interval_s", "n_bits", "n_trials", "n_bursts",
                    "burst_bits", "period_s", "target_range_m"):
            positive(key)
        num_list("target_ranges_m", 0.0)
        num_list("prt_values_s", 0.0, strict=True)
        num_list("offsets_hz")
        num_list("target_gains")
        if isinstance(p.get("target_gains"), list) and isinstance(p.get("target_ranges_m"), list):
            if len(p["target_gains"]) != len(p["target_ranges_m"]):
                errs.append("params.target_gains: needs one gain per entry of target_ranges_m")
        if "ber_ceiling" in p and not (_is_num(p["ber_ceiling"]) and 0 < p["ber_ceiling"] < 0.5):
            errs.append("params.ber_ceiling: must lie in (0, 0.5)")
        if "fade_threshold_db" in p and not (_is_num(p["fade_threshold_db"]) and p["fade_threshold_db"] > 0):
            errs.append("params.fade_threshold_db: must be positive")
        if self.mode == "region_demo" and isinstance(self.carriers_hz, list) and len(self.carriers_hz) != 2:
            errs.append("carriers_hz: region_demo needs exactly two carriers (lower, upper)")
        if self.mode == "fading_demo" and {"duration_s", "sample_interval_s"} <= set(p):
            if _is_num(p["duration_s"]) and _is_num(p["sample_interval_s"]) and p["sample_interval_s"] > 0:
                if p["duration_s"] / p["sample_interval_s"] < 2:
                    errs.append("params.duration_s: trace needs at least two samples")
        return errs

    # -- builders -----------------------------------------------------------

    def build_timing(self) -> RadarTiming:
        t = dict(self.timing or {})
        unknown = set(t) - {"prt_s", "samples_per_chip", "chip_rate_hz"}
        if unknown:
            raise ValueError(f"unknown keys {sorted(unknown)}")
        return RadarTiming(**t)

    def build_code(self) -> ChipSequence:
        spec = dict(self.code or {"type": "barker13"})
        kind = spec.get("type", "barker13")
        if kind == "barker13":
            return barker13()
        if kind == "msequence":
            return msequence(int(spec["degree"]), spec.get("taps"))
        if kind == "chips":
            return ChipSequence.from_text(str(spec["chips"]))
        raise ValueError(f"unknown code type {kind!r}")

    def build_channel(self, code: ChipSequence | None = None, timing: RadarTiming | None = None) -> ChannelModel:
        code = code or self.build_code()
        timing = timing or self.build_timing()
        ch = dict(self.channel or {})
        unknown = set(ch) - {"taps", "noise_psd", "chip_snr_db", "ebn0_db", "interferers",
                             "antenna_decorrelation", "fading"}
        if unknown:
            raise ValueError(f"unknown keys {sorted(unknown)}")
        noise_keys = [k for k in ("noise_psd", "chip_snr_db", "ebn0_db") if k in ch]
        if len(noise_keys) > 1:
            raise ValueError(f"give at most one of noise_psd, chip_snr_db, ebn0_db (got {noise_keys})")
        noise = 0.0
        if "noise_psd" in ch:
            noise = float(ch["noise_psd"])
        elif "chip_snr_db" in ch:
            noise = noise_psd_for_chip_snr(float(ch["chip_snr_db"]), timing.samples_per_chip)
        elif "ebn0_db" in ch:
            noise = noise_psd_for_ebn0(float(ch["ebn0_db"]), code.length, timing.samples_per_chip)
        taps = tuple(_build_tap(t) for t in ch.get("taps", [{}]))
        interferers = tuple(_build_interferer(i) for i in ch.get("interferers", []))
        return ChannelModel(
            taps,
            noise,
            interferers,
            float(ch.get("antenna_decorrelation", 1.0)),
            str(ch.get("fading", "none")),
        )


def _is_num(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _build_tap(spec: dict) -> ChannelTap:
    spec = dict(spec or {})
    unknown = set(spec) - {"delay_s", "range_m", "gain", "gain_db", "phase_deg", "doppler_hz"}
    if unknown:
        raise ValueError(f"tap has unknown keys {sorted(unknown)}")
    if "delay_s" in spec and "range_m" in spec:
        raise ValueError("tap takes delay_s or range_m, not both")
    delay = range_to_delay(float(spec["range_m"])) if "range_m" in spec else float(spec.get("delay_s", 0.0))
    if "gain" in spec and "gain_db" in spec:
        raise ValueError("tap takes gain or gain_db, not both")
    mag = 10 ** (float(spec["gain_db"]) / 20) if "gain_db" in spec else float(spec.get("gain", 1.0))
    phase = math.radians(float(spec.get("phase_deg", 0.0)))
    gain = mag * complex(math.cos(phase), math.sin(phase))
    return ChannelTap(delay, gain, float(spec.get("doppler_hz", 0.0)))


def _build_interferer(spec: dict) -> Interferer:
    spec = dict(spec)
    power = spec.get("power_db", float("-inf"))
    power = float("-inf") if power in (None, "-inf", "off") else float(power)
    return Interferer(str(spec["kind"]), power, float(spec.get("freq_offset_hz", 0.0)))
